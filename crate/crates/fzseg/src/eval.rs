//! Pixel-level scoring of predicted masks against ground truth: confusion
//! counts, the five standard challenge metrics, and batch evaluation over
//! prediction/ground-truth directories.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::imaging::{load_mask, BinaryMask};

/// Pixel confusion between a predicted and a ground-truth mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub true_neg: u64,
    pub false_pos: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }
}

/// Counts agreement pixel by pixel; foreground = lesion.
pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    if (pred.width(), pred.height()) != (gt.width(), gt.height()) {
        return Err(Error::DimensionMismatch {
            expected_w: gt.width(),
            expected_h: gt.height(),
            actual_w: pred.width(),
            actual_h: pred.height(),
        });
    }
    let mut c = ConfusionCounts {
        true_pos: 0,
        true_neg: 0,
        false_pos: 0,
        false_neg: 0,
    };
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        match (p, g) {
            (true, true) => c.true_pos += 1,
            (false, false) => c.true_neg += 1,
            (true, false) => c.false_pos += 1,
            (false, true) => c.false_neg += 1,
        }
    }
    Ok(c)
}

/// The five challenge metrics for one image.
///
/// Each metric lives in [0, 1]. A 0/0 ratio (e.g. sensitivity with an empty
/// ground truth) scores 1.0 — empty agreeing with empty is a perfect
/// answer — and sets the corresponding degenerate flag.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub accuracy: f64,
    pub dice: f64,
    pub jaccard: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Names of metrics that hit the 0/0 convention.
    pub degenerate: Vec<&'static str>,
}

/// Computes the metric row from confusion counts. `total` must be > 0.
pub fn metrics(c: &ConfusionCounts) -> Result<MetricsRow> {
    if c.total() == 0 {
        return Err(Error::Empty("confusion counts cover zero pixels".into()));
    }
    let mut degenerate = Vec::new();
    let mut ratio = |name: &'static str, num: u64, den: u64| -> f64 {
        if den == 0 {
            degenerate.push(name);
            1.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = (c.true_pos + c.true_neg) as f64 / c.total() as f64;
    let sensitivity = ratio("sensitivity", c.true_pos, c.true_pos + c.false_neg);
    let specificity = ratio("specificity", c.true_neg, c.true_neg + c.false_pos);
    let dice = ratio(
        "dice",
        2 * c.true_pos,
        2 * c.true_pos + c.false_pos + c.false_neg,
    );
    let jaccard = ratio(
        "jaccard",
        c.true_pos,
        c.true_pos + c.false_pos + c.false_neg,
    );
    Ok(MetricsRow {
        accuracy,
        dice,
        jaccard,
        sensitivity,
        specificity,
        degenerate,
    })
}

impl MetricsRow {
    fn values(&self) -> [f64; 5] {
        [
            self.accuracy,
            self.dice,
            self.jaccard,
            self.sensitivity,
            self.specificity,
        ]
    }
}

impl fmt::Display for MetricsRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "accuracy {:.4}  dice {:.4}  jaccard {:.4}  sensitivity {:.4}  specificity {:.4}",
            self.accuracy, self.dice, self.jaccard, self.sensitivity, self.specificity
        )?;
        if !self.degenerate.is_empty() {
            write!(f, "  (degenerate: {})", self.degenerate.join(", "))?;
        }
        Ok(())
    }
}

/// Batch evaluation report: per-image rows, their unweighted mean, and the
/// inputs that could not be scored.
pub struct DatasetReport {
    /// (image stem, row), sorted by stem.
    pub rows: Vec<(String, MetricsRow)>,
    /// Unweighted mean over `rows`; `None` when nothing was scored.
    pub mean: Option<MetricsRow>,
    /// (image stem, what went wrong), excluded from the mean.
    pub errors: Vec<(String, String)>,
}

fn mean_row(rows: &[(String, MetricsRow)]) -> Option<MetricsRow> {
    if rows.is_empty() {
        return None;
    }
    let n = rows.len() as f64;
    let mut acc = [0f64; 5];
    for (_, row) in rows {
        for (slot, v) in acc.iter_mut().zip(row.values()) {
            *slot += v;
        }
    }
    Some(MetricsRow {
        accuracy: acc[0] / n,
        dice: acc[1] / n,
        jaccard: acc[2] / n,
        sensitivity: acc[3] / n,
        specificity: acc[4] / n,
        degenerate: Vec::new(),
    })
}

/// Derives the dataset stem for a prediction file name.
///
/// The segmenter writes `<stem>_mask.png`, so a trailing `_mask` is
/// stripped; bare `<stem>.png` predictions work too. Auxiliary outputs
/// (`_overlay`, `_trace`, probability images) are not predictions and give
/// `None`.
fn prediction_stem(path: &Path) -> Option<String> {
    let stem = path.file_stem()?.to_str()?;
    for aux in ["_overlay", "_trace", "_prob_lesion", "_prob_skin", "_prob_other"] {
        if stem.ends_with(aux) {
            return None;
        }
    }
    Some(stem.strip_suffix("_mask").unwrap_or(stem).to_string())
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Scores every prediction in `pred_dir` against its ground truth in
/// `gt_dir`.
///
/// Ground truth follows the challenge convention `<stem>_Segmentation.png`
/// (255 = lesion). Unreadable masks or missing ground truths become error
/// rows; only cleanly scored images contribute to the mean. The report is
/// sorted by stem either way.
pub fn evaluate_dataset(pred_dir: &Path, gt_dir: &Path) -> Result<DatasetReport> {
    let mut predictions: BTreeMap<String, PathBuf> = BTreeMap::new();
    for entry in fs::read_dir(pred_dir).map_err(|e| Error::io(pred_dir, e))? {
        let path = entry.map_err(|e| Error::io(pred_dir, e))?.path();
        if !path.is_file() || !is_png(&path) {
            continue;
        }
        if let Some(stem) = prediction_stem(&path) {
            predictions.insert(stem, path);
        }
    }
    if predictions.is_empty() {
        return Err(Error::Empty(format!(
            "no prediction masks found in {}",
            pred_dir.display()
        )));
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (stem, pred_path) in predictions {
        let gt_path = gt_dir.join(format!("{stem}_Segmentation.png"));
        if !gt_path.is_file() {
            errors.push((stem, format!("missing ground truth {}", gt_path.display())));
            continue;
        }
        let outcome = load_mask(&pred_path).and_then(|pred| {
            let gt = load_mask(&gt_path)?;
            metrics(&confusion(&pred, &gt)?)
        });
        match outcome {
            Ok(row) => rows.push((stem, row)),
            Err(e) => errors.push((stem, e.to_string())),
        }
    }
    let mean = mean_row(&rows);
    Ok(DatasetReport { rows, mean, errors })
}

impl DatasetReport {
    /// Writes the report as CSV: one line per image, then the mean row.
    ///
    /// Columns: image, accuracy, dice, jaccard, sensitivity, specificity,
    /// flags. Error rows carry the message in the flags column and empty
    /// metric fields.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io_err = |e: std::io::Error| Error::io(path, e);
        writeln!(
            out,
            "image,accuracy,dice,jaccard,sensitivity,specificity,flags"
        )
        .map_err(io_err)?;
        let write_row = |out: &mut dyn std::io::Write,
                         name: &str,
                         row: &MetricsRow|
         -> std::io::Result<()> {
            writeln!(
                out,
                "{name},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                row.accuracy,
                row.dice,
                row.jaccard,
                row.sensitivity,
                row.specificity,
                row.degenerate.join(" ")
            )
        };
        for (stem, row) in &self.rows {
            write_row(&mut out, stem, row).map_err(io_err)?;
        }
        for (stem, msg) in &self.errors {
            writeln!(out, "{stem},,,,,,error: {}", msg.replace(',', ";")).map_err(io_err)?;
        }
        if let Some(mean) = &self.mean {
            write_row(&mut out, "mean", mean).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}
