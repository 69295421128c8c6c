//! Random-forest classifier over pixel feature vectors.
//!
//! Trees are grown on bootstrap resamples with Gini splits over a random
//! feature subset per node ("mtry"), with no depth cap. Prediction averages
//! the leaf class frequencies over all trees (soft voting), so outputs are
//! probability triples rather than hard votes.

mod cv;
mod io;
mod tree;

pub use cv::{cross_validate, CvReport};
pub use io::{load_model, save_model};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::PixelClass;
use tree::{build_tree, Tree};

/// Default number of trees.
pub const DEFAULT_TREES: usize = 100;

/// Default number of split candidates per node, about sqrt(159).
pub const DEFAULT_FEATURES_PER_SPLIT: usize = 13;

/// Labeled feature rows, densely packed.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    fingerprint: Vec<String>,
    features: Vec<f32>,
    labels: Vec<PixelClass>,
}

impl TrainingSet {
    /// Empty set for the given feature fingerprint (ordered feature names).
    pub fn new(fingerprint: Vec<String>) -> Self {
        TrainingSet {
            fingerprint,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Builds a set from `(row, class)` pairs, as produced by pixel sampling.
    pub fn from_rows(
        fingerprint: Vec<String>,
        rows: impl IntoIterator<Item = (Vec<f32>, PixelClass)>,
    ) -> Result<Self> {
        let mut ts = TrainingSet::new(fingerprint);
        for (row, class) in rows {
            ts.push_row(&row, class)?;
        }
        Ok(ts)
    }

    pub fn push_row(&mut self, row: &[f32], class: PixelClass) -> Result<()> {
        if row.len() != self.fingerprint.len() {
            return Err(Error::Training(format!(
                "row has {} features, fingerprint has {}",
                row.len(),
                self.fingerprint.len()
            )));
        }
        self.features.extend_from_slice(row);
        self.labels.push(class);
        Ok(())
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.fingerprint.len()
    }

    pub fn fingerprint(&self) -> &[String] {
        &self.fingerprint
    }

    pub fn row(&self, i: usize) -> &[f32] {
        let n = self.num_features();
        &self.features[i * n..(i + 1) * n]
    }

    pub fn label(&self, i: usize) -> PixelClass {
        self.labels[i]
    }

    pub(crate) fn value(&self, i: usize, feature: usize) -> f32 {
        self.features[i * self.num_features() + feature]
    }

    /// Rows per class (lesion, skin, other).
    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0usize; 3];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }

    /// Checks the set is trainable: at least one row of every class.
    pub fn validate_for_training(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Training("training set is empty".into()));
        }
        let counts = self.class_counts();
        for class in PixelClass::ALL {
            if counts[class.index()] == 0 {
                return Err(Error::Training(format!(
                    "class '{}' has no training samples",
                    class.label()
                )));
            }
        }
        Ok(())
    }
}

/// SplitMix64: decorrelates per-tree seeds derived from one master seed.
/// Also reused as a stateless per-pixel hash by the fixture generator.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn tree_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ (index as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15))
}

/// A trained forest plus the fingerprint of the features it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    fingerprint: Vec<String>,
    features_per_split: usize,
    trees: Vec<Tree>,
}

impl ForestModel {
    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn features_per_split(&self) -> usize {
        self.features_per_split
    }

    /// Ordered feature names this model expects.
    pub fn fingerprint(&self) -> &[String] {
        &self.fingerprint
    }

    pub(crate) fn from_parts(
        fingerprint: Vec<String>,
        features_per_split: usize,
        trees: Vec<Tree>,
    ) -> Self {
        ForestModel {
            fingerprint,
            features_per_split,
            trees,
        }
    }

    pub(crate) fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Class probabilities for one feature vector.
    ///
    /// Soft voting: the mean over trees of each leaf's class frequencies.
    /// The output sums to 1 up to float rounding.
    pub fn predict_proba(&self, x: &[f32]) -> Result<[f64; 3]> {
        if x.len() != self.fingerprint.len() {
            return Err(Error::FingerprintMismatch(format!(
                "model expects {} features, vector has {}",
                self.fingerprint.len(),
                x.len()
            )));
        }
        Ok(self.predict_proba_on(|f| x[f] as f64))
    }

    /// Class probabilities with a feature accessor (no length check; the
    /// accessor must honor the model's fingerprint indices).
    pub fn predict_proba_on(&self, get: impl Fn(usize) -> f64) -> [f64; 3] {
        let mut acc = [0.0f64; 3];
        for t in &self.trees {
            let f = t.leaf_frequencies(&get);
            acc[0] += f[0];
            acc[1] += f[1];
            acc[2] += f[2];
        }
        let n = self.trees.len() as f64;
        [acc[0] / n, acc[1] / n, acc[2] / n]
    }

    /// Most probable class; ties go to the earlier class in canonical order.
    pub fn predict(&self, x: &[f32]) -> Result<PixelClass> {
        let p = self.predict_proba(x)?;
        Ok(argmax_class(&p))
    }
}

/// Index of the maximal probability, first-wins on ties.
pub(crate) fn argmax_class(p: &[f64; 3]) -> PixelClass {
    let mut best = 0;
    for i in 1..3 {
        if p[i] > p[best] {
            best = i;
        }
    }
    PixelClass::from_index(best).expect("index < 3")
}

/// Trains a forest of `n_trees` trees using `features_per_split` candidates
/// per node. Deterministic for a given seed at any thread count: every tree
/// has its own seed derived from `seed`, and trees are collected in order.
pub fn train(
    data: &TrainingSet,
    n_trees: usize,
    features_per_split: usize,
    seed: u64,
) -> Result<ForestModel> {
    if n_trees == 0 {
        return Err(Error::Parameter("n_trees must be >= 1".into()));
    }
    if features_per_split == 0 {
        return Err(Error::Parameter("features_per_split must be >= 1".into()));
    }
    data.validate_for_training()?;
    let trees: Vec<Tree> = (0..n_trees)
        .into_par_iter()
        .map(|t| build_tree(data, features_per_split, tree_seed(seed, t)))
        .collect();
    Ok(ForestModel {
        fingerprint: data.fingerprint().to_vec(),
        features_per_split,
        trees,
    })
}
