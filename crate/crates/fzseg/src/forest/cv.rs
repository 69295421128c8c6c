//! Stratified k-fold cross-validation with pooled accuracy and macro AUC.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forest::{argmax_class, train, TrainingSet};
use crate::PixelClass;

/// Cross-validation summary.
#[derive(Debug, Clone)]
pub struct CvReport {
    /// Fraction of held-out rows whose argmax class matches the label.
    pub accuracy: f64,
    /// Macro average of the three one-vs-rest AUCs, pooled over folds.
    pub auc: f64,
    /// Pooled confusion matrix: `confusion[truth][predicted]`.
    pub confusion: [[u64; 3]; 3],
    /// Number of folds actually run.
    pub folds: usize,
}

impl std::fmt::Display for CvReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{}-fold cross-validation: accuracy {:.4}, macro AUC {:.4}",
            self.folds, self.accuracy, self.auc
        )?;
        writeln!(f, "confusion (rows: truth, cols: predicted)")?;
        writeln!(f, "{:>8} {:>8} {:>8} {:>8}", "", "lesion", "skin", "other")?;
        for class in PixelClass::ALL {
            let row = self.confusion[class.index()];
            writeln!(
                f,
                "{:>8} {:>8} {:>8} {:>8}",
                class.label(),
                row[0],
                row[1],
                row[2]
            )?;
        }
        Ok(())
    }
}

/// One-vs-rest AUC by the rank-sum (Mann-Whitney) formula with averaged
/// ranks for tied scores. `None` when one of the groups is empty.
fn auc_one_vs_rest(scored: &mut [(f64, bool)]) -> Option<f64> {
    let n_pos = scored.iter().filter(|s| s.1).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    scored.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        while j < scored.len() && scored[j].0 == scored[i].0 {
            j += 1;
        }
        // Ranks are 1-based; tied entries share the average rank.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for s in &scored[i..j] {
            if s.1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos as f64) * (n_pos as f64 + 1.0) / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Stratified fold assignment: shuffles each class separately (seeded) and
/// deals its rows round-robin over the folds, so every fold sees close to
/// the global class mix.
fn fold_assignment(data: &TrainingSet, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; data.len()];
    for class in PixelClass::ALL {
        let mut rows: Vec<usize> = (0..data.len())
            .filter(|&i| data.label(i) == class)
            .collect();
        rows.shuffle(&mut rng);
        for (pos, row) in rows.into_iter().enumerate() {
            assignment[row] = pos % k;
        }
    }
    assignment
}

/// Runs stratified k-fold cross-validation and pools the held-out
/// predictions into one report.
///
/// Needs `k >= 2` and at least `k` rows of every class so every training
/// fold keeps all three classes.
pub fn cross_validate(
    data: &TrainingSet,
    k: usize,
    n_trees: usize,
    features_per_split: usize,
    seed: u64,
) -> Result<CvReport> {
    if k < 2 {
        return Err(Error::Parameter(format!("k must be >= 2, got {k}")));
    }
    data.validate_for_training()?;
    let counts = data.class_counts();
    for class in PixelClass::ALL {
        if counts[class.index()] < k {
            return Err(Error::Training(format!(
                "class '{}' has {} rows, fewer than k = {k}",
                class.label(),
                counts[class.index()]
            )));
        }
    }
    let assignment = fold_assignment(data, k, seed);
    let mut correct = 0u64;
    let mut confusion = [[0u64; 3]; 3];
    // Pooled (score, is-positive) pairs per class for the macro AUC.
    let mut pooled: [Vec<(f64, bool)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for fold in 0..k {
        let mut train_set = TrainingSet::new(data.fingerprint().to_vec());
        let mut test_rows: Vec<usize> = Vec::new();
        for i in 0..data.len() {
            if assignment[i] == fold {
                test_rows.push(i);
            } else {
                train_set.push_row(data.row(i), data.label(i))?;
            }
        }
        let model = train(
            &train_set,
            n_trees,
            features_per_split,
            // One derived seed per fold keeps folds independent.
            seed ^ (fold as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15),
        )?;
        for &i in &test_rows {
            let p = model.predict_proba(data.row(i))?;
            let truth = data.label(i);
            let predicted = argmax_class(&p);
            confusion[truth.index()][predicted.index()] += 1;
            if predicted == truth {
                correct += 1;
            }
            for class in PixelClass::ALL {
                pooled[class.index()].push((p[class.index()], truth == class));
            }
        }
    }
    let mut auc_sum = 0.0;
    let mut auc_n = 0usize;
    for scored in &mut pooled {
        if let Some(a) = auc_one_vs_rest(scored) {
            auc_sum += a;
            auc_n += 1;
        }
    }
    Ok(CvReport {
        accuracy: correct as f64 / data.len() as f64,
        auc: auc_sum / auc_n as f64,
        confusion,
        folds: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_perfect_and_reversed() {
        let mut s = vec![(0.9, true), (0.8, true), (0.2, false), (0.1, false)];
        assert_eq!(auc_one_vs_rest(&mut s), Some(1.0));
        let mut s = vec![(0.1, true), (0.2, true), (0.8, false), (0.9, false)];
        assert_eq!(auc_one_vs_rest(&mut s), Some(0.0));
    }

    #[test]
    fn auc_with_ties_averages_ranks() {
        // All scores equal: AUC must be exactly 0.5.
        let mut s = vec![(0.5, true), (0.5, false), (0.5, true), (0.5, false)];
        assert_eq!(auc_one_vs_rest(&mut s), Some(0.5));
    }

    #[test]
    fn auc_degenerate_groups() {
        let mut s = vec![(0.5, true), (0.7, true)];
        assert_eq!(auc_one_vs_rest(&mut s), None);
        let mut empty: Vec<(f64, bool)> = Vec::new();
        assert_eq!(auc_one_vs_rest(&mut empty), None);
    }

    #[test]
    fn auc_agrees_with_pair_counting() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.random_range(2..40);
            let mut s: Vec<(f64, bool)> = (0..n)
                .map(|_| {
                    (
                        // Coarse grid to force plenty of ties.
                        (rng.random_range(0..5) as f64) / 4.0,
                        rng.random::<f64>() < 0.5,
                    )
                })
                .collect();
            let n_pos = s.iter().filter(|v| v.1).count();
            let n_neg = s.len() - n_pos;
            if n_pos == 0 || n_neg == 0 {
                continue;
            }
            // Direct definition: P(pos > neg) + 0.5 P(pos == neg).
            let mut num = 0.0;
            for a in s.iter().filter(|v| v.1) {
                for b in s.iter().filter(|v| !v.1) {
                    num += if a.0 > b.0 {
                        1.0
                    } else if a.0 == b.0 {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
            let expected = num / (n_pos * n_neg) as f64;
            let got = auc_one_vs_rest(&mut s).unwrap();
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        }
    }

    #[test]
    fn folds_are_stratified() {
        let mut ts = TrainingSet::new(vec!["x".into()]);
        for i in 0..30 {
            ts.push_row(&[i as f32], PixelClass::Lesion).unwrap();
        }
        for i in 0..20 {
            ts.push_row(&[i as f32], PixelClass::Skin).unwrap();
        }
        for i in 0..10 {
            ts.push_row(&[i as f32], PixelClass::Other).unwrap();
        }
        let assignment = fold_assignment(&ts, 5, 0);
        for fold in 0..5 {
            let mut counts = [0usize; 3];
            for i in 0..ts.len() {
                if assignment[i] == fold {
                    counts[ts.label(i).index()] += 1;
                }
            }
            assert_eq!(counts, [6, 4, 2], "fold {fold}");
        }
    }

    #[test]
    fn cv_rejects_undersized_classes() {
        let mut ts = TrainingSet::new(vec!["x".into()]);
        for class in PixelClass::ALL {
            for i in 0..3 {
                ts.push_row(&[i as f32], class).unwrap();
            }
        }
        assert!(cross_validate(&ts, 4, 3, 1, 0).is_err());
        assert!(cross_validate(&ts, 1, 3, 1, 0).is_err());
        assert!(cross_validate(&ts, 3, 3, 1, 0).is_ok());
    }
}
