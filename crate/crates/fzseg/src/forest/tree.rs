//! A single CART-style decision tree with Gini splits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forest::TrainingSet;

/// Tree node. Nodes are stored preorder: a child index is always greater
/// than its parent's, which also guarantees traversal terminates.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Split {
        feature: u16,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        /// Training-sample counts per class at this leaf.
        counts: [u64; 3],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    /// Walks the tree with a feature accessor; returns the class-count
    /// distribution of the leaf, normalized to frequencies.
    pub(crate) fn leaf_frequencies(&self, get: impl Fn(usize) -> f64) -> [f64; 3] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if get(*feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { counts } => {
                    let total = (counts[0] + counts[1] + counts[2]) as f64;
                    return [
                        counts[0] as f64 / total,
                        counts[1] as f64 / total,
                        counts[2] as f64 / total,
                    ];
                }
            }
        }
    }
}

fn class_counts(data: &TrainingSet, samples: &[u32]) -> [u64; 3] {
    let mut c = [0u64; 3];
    for &i in samples {
        c[data.label(i as usize).index()] += 1;
    }
    c
}

fn is_pure(counts: &[u64; 3]) -> bool {
    counts.iter().filter(|&&c| c > 0).count() <= 1
}

/// Gini impurity of a count triple, times the sample share of the node:
/// the split criterion is the weighted sum over both children.
fn weighted_gini(counts: &[u64; 3], node_n: f64, total_n: f64) -> f64 {
    let mut sum_sq = 0.0;
    for &c in counts {
        let p = c as f64 / node_n;
        sum_sq += p * p;
    }
    (node_n / total_n) * (1.0 - sum_sq)
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
}

/// Finds the best Gini split over `mtry` feature candidates sampled without
/// replacement. Returns `None` when the node is pure, too small, or no
/// candidate feature varies. Ties keep the first qualifying (feature,
/// boundary) in sampled order, which pins the result for a given RNG state.
fn find_split(
    data: &TrainingSet,
    samples: &[u32],
    counts: &[u64; 3],
    mtry: usize,
    rng: &mut ChaCha8Rng,
    scratch: &mut Vec<(f32, u8)>,
) -> Option<SplitChoice> {
    let n = samples.len();
    if n < 2 || is_pure(counts) {
        return None;
    }
    // Partial Fisher-Yates: the first mtry entries end up being a uniform
    // draw without replacement.
    let n_features = data.num_features();
    let mtry = mtry.min(n_features);
    let mut pool: Vec<u16> = (0..n_features as u16).collect();
    for k in 0..mtry {
        let j = rng.random_range(k..n_features);
        pool.swap(k, j);
    }

    let total_n = n as f64;
    let mut best: Option<(f64, SplitChoice)> = None;
    for &f in &pool[..mtry] {
        let f = f as usize;
        scratch.clear();
        scratch.extend(
            samples
                .iter()
                .map(|&i| (data.value(i as usize, f), data.label(i as usize).index() as u8)),
        );
        scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0u64; 3];
        let mut right = *counts;
        for i in 0..n - 1 {
            let c = scratch[i].1 as usize;
            left[c] += 1;
            right[c] -= 1;
            if scratch[i].0 < scratch[i + 1].0 {
                let imp = weighted_gini(&left, (i + 1) as f64, total_n)
                    + weighted_gini(&right, (n - 1 - i) as f64, total_n);
                if best.as_ref().is_none_or(|(b, _)| imp < *b) {
                    best = Some((
                        imp,
                        SplitChoice {
                            feature: f,
                            threshold: (scratch[i].0 as f64 + scratch[i + 1].0 as f64) / 2.0,
                        },
                    ));
                }
            }
        }
    }
    best.map(|(_, choice)| choice)
}

/// Grows one tree on a bootstrap sample of `data`.
///
/// The bootstrap has the same size as the data (drawn with replacement);
/// nodes stop at purity or fewer than 2 samples; there is no depth cap.
pub(crate) fn build_tree(data: &TrainingSet, mtry: usize, seed: u64) -> Tree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = data.len();
    let bootstrap: Vec<u32> = (0..n).map(|_| rng.random_range(0..n) as u32).collect();

    enum Patch {
        Root,
        Left(usize),
        Right(usize),
    }
    let mut nodes: Vec<Node> = Vec::new();
    let mut scratch: Vec<(f32, u8)> = Vec::new();
    // Depth-first, left child first: pushing right before left makes the
    // node order preorder without recursion.
    let mut stack: Vec<(Vec<u32>, Patch)> = vec![(bootstrap, Patch::Root)];
    while let Some((samples, patch)) = stack.pop() {
        let idx = nodes.len() as u32;
        match patch {
            Patch::Root => {}
            Patch::Left(p) => {
                if let Node::Split { left, .. } = &mut nodes[p] {
                    *left = idx;
                }
            }
            Patch::Right(p) => {
                if let Node::Split { right, .. } = &mut nodes[p] {
                    *right = idx;
                }
            }
        }
        let counts = class_counts(data, &samples);
        match find_split(data, &samples, &counts, mtry, &mut rng, &mut scratch) {
            None => nodes.push(Node::Leaf { counts }),
            Some(choice) => {
                nodes.push(Node::Split {
                    feature: choice.feature as u16,
                    threshold: choice.threshold,
                    left: 0,
                    right: 0,
                });
                let (mut ls, mut rs) = (Vec::new(), Vec::new());
                for &i in &samples {
                    if data.value(i as usize, choice.feature) as f64 <= choice.threshold {
                        ls.push(i);
                    } else {
                        rs.push(i);
                    }
                }
                debug_assert!(!ls.is_empty() && !rs.is_empty());
                let p = idx as usize;
                stack.push((rs, Patch::Right(p)));
                stack.push((ls, Patch::Left(p)));
            }
        }
    }
    Tree { nodes }
}
