//! The segmentation pipeline: fuzzy classification, artifact-aware Otsu
//! thresholding on the blue channel, and morphological post-processing.
//!
//! Degraded-input handling: the pipeline never fails on weird content, it
//! falls back and records a flag instead. The detectors are
//!
//! * empty lesion+skin region after the artifact cut -> retry without the
//!   erosions; still empty -> threshold over the whole image
//!   (`degraded:region_fallback`, `degraded:region_empty`);
//! * no pixels pass the skin cut -> neutral mid-gray skin color
//!   (`degraded:no_skin_pixels`);
//! * Otsu separability eta = sigma_between^2 / sigma_total^2 below
//!   [`SEPARABILITY_FLOOR`] -> `degraded:low_separability` (a histogram with
//!   no real bimodality, e.g. an all-skin image);
//! * the selected component covers less than [`FRAGMENTATION_FLOOR`] of the
//!   thresholded foreground -> `degraded:fragmented_foreground`.

use crate::error::{Error, Result};
use crate::features::{extract_features_with, options_for_fingerprint};
use crate::forest::ForestModel;
use crate::fuzzy::{alpha_cut, classify_image, probability_images, FuzzyPartition};
use crate::imaging::{
    dilate, erode, fill_holes, largest_component, median_filter, most_centered_component,
    resize_bicubic, upsize_mask, BinaryMask, Gray8Image, RgbImage, StructuringElement,
};
use crate::PixelClass;

/// Below this between-class variance share the Otsu split is considered
/// uninformative and the result flagged degraded.
pub const SEPARABILITY_FLOOR: f64 = 0.75;

/// The selected component must cover at least this share of the thresholded
/// foreground, otherwise the foreground was fragmentary noise.
pub const FRAGMENTATION_FLOOR: f64 = 0.30;

/// Tunable pipeline parameters. `Default` gives the published values.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationConfig {
    /// Alpha for the artifact ("other") cut.
    pub thr_other: f64,
    /// Alpha for the skin cut used by the skin-color estimate.
    pub thr_skin: f64,
    /// Images are resized to this width (aspect preserved) before anything
    /// else happens.
    pub working_width: usize,
    /// Disk radius for the erosions while building the lesion+skin region,
    /// and for the dilate/erode pair gating the mask afterwards.
    pub erode_radius_region: usize,
    /// Window side for the median blur used by artifact inpainting.
    pub median_window: usize,
    /// Radius of the central interior disk, as a fraction of min(w, h).
    pub interior_fraction: f64,
    /// Disk radius of the final opening.
    pub post_open_radius: usize,
    /// Disk radius of the final closing.
    pub post_close_radius: usize,
    /// How many of the largest components compete for "most centered".
    pub top_k_components: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            thr_other: 0.5,
            thr_skin: 0.5,
            working_width: 768,
            erode_radius_region: 5,
            median_window: 15,
            interior_fraction: 0.375,
            post_open_radius: 7,
            post_close_radius: 9,
            top_k_components: 3,
        }
    }
}

impl SegmentationConfig {
    /// Checks every field is inside its documented domain.
    pub fn validate(&self) -> Result<()> {
        let check_alpha = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parameter(format!(
                    "{name} must be within [0, 1], got {v}"
                )));
            }
            Ok(())
        };
        check_alpha("thr_other", self.thr_other)?;
        check_alpha("thr_skin", self.thr_skin)?;
        if self.working_width < 2 {
            return Err(Error::Parameter(format!(
                "working_width must be >= 2, got {}",
                self.working_width
            )));
        }
        if self.erode_radius_region == 0 {
            return Err(Error::Parameter("erode_radius_region must be >= 1".into()));
        }
        if self.median_window < 3 || self.median_window % 2 == 0 {
            return Err(Error::Parameter(format!(
                "median_window must be odd and >= 3, got {}",
                self.median_window
            )));
        }
        if !(self.interior_fraction > 0.0 && self.interior_fraction <= 0.5) {
            return Err(Error::Parameter(format!(
                "interior_fraction must be in (0, 0.5], got {}",
                self.interior_fraction
            )));
        }
        if self.post_open_radius == 0 || self.post_close_radius == 0 {
            return Err(Error::Parameter(
                "post-processing radii must be >= 1".into(),
            ));
        }
        if self.top_k_components == 0 {
            return Err(Error::Parameter("top_k_components must be >= 1".into()));
        }
        Ok(())
    }
}

/// Pixels whose "other" membership clears the cut: hair, rulers, vignettes...
pub fn artifact_mask(p: &FuzzyPartition, thr_other: f64) -> BinaryMask {
    alpha_cut(p, PixelClass::Other, thr_other)
}

/// The lesion+skin region: complement of the artifact cut, eroded, reduced
/// to its largest component, hole-filled, eroded again.
///
/// When that comes out empty (artifact-dominated frame), falls back to the
/// bare complement and reports `degraded = true`.
pub fn lesion_skin_mask(
    artifacts: &BinaryMask,
    cfg: &SegmentationConfig,
) -> Result<(BinaryMask, bool)> {
    let se = StructuringElement::disk(cfg.erode_radius_region)?;
    let base = artifacts.complement();
    let region = erode(
        &fill_holes(&largest_component(&erode(&base, &se))),
        &se,
    );
    if region.is_empty() {
        Ok((base, true))
    } else {
        Ok((region, false))
    }
}

/// Estimates the skin color as the channel-wise median over the skin cut.
///
/// The median of an even-sized sample is the lower middle value. With no
/// skin pixels at all the estimate falls back to mid-gray (128, 128, 128)
/// and reports `degraded = true`.
pub fn skin_color(
    img: &RgbImage,
    p: &FuzzyPartition,
    thr_skin: f64,
) -> Result<([u8; 3], bool)> {
    if (img.width(), img.height()) != (p.width(), p.height()) {
        return Err(Error::DimensionMismatch {
            expected_w: img.width(),
            expected_h: img.height(),
            actual_w: p.width(),
            actual_h: p.height(),
        });
    }
    let cut = alpha_cut(p, PixelClass::Skin, thr_skin);
    let n = cut.count();
    if n == 0 {
        return Ok(([128, 128, 128], true));
    }
    let mut color = [0u8; 3];
    for (c, slot) in color.iter_mut().enumerate() {
        let mut hist = [0u32; 256];
        for (i, &keep) in cut.data().iter().enumerate() {
            if keep {
                hist[img.data()[3 * i + c] as usize] += 1;
            }
        }
        // Lower median: rank ceil(n/2) in the cumulative histogram.
        let rank = n.div_ceil(2) as u32;
        let mut seen = 0u32;
        for (v, &count) in hist.iter().enumerate() {
            seen += count;
            if seen >= rank {
                *slot = v as u8;
                break;
            }
        }
    }
    Ok((color, false))
}

/// Repaints artifact pixels with the skin color, median-blurs that, and
/// splices the blurred values back into the original at artifact pixels.
///
/// Returns `(blurred, for_thresholding)`: the blurred frame is useful for
/// inspection; the second image is the actual thresholding input. With no
/// artifacts the output equals the input exactly.
pub fn inpaint_for_thresholding(
    img: &RgbImage,
    artifacts: &BinaryMask,
    skin: [u8; 3],
    cfg: &SegmentationConfig,
) -> Result<(RgbImage, RgbImage)> {
    if (img.width(), img.height()) != (artifacts.width(), artifacts.height()) {
        return Err(Error::DimensionMismatch {
            expected_w: img.width(),
            expected_h: img.height(),
            actual_w: artifacts.width(),
            actual_h: artifacts.height(),
        });
    }
    let mut painted = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if artifacts.get(x, y) {
                painted.set_pixel(x, y, skin);
            }
        }
    }
    let blurred = median_filter(&painted, cfg.median_window)?;
    let mut for_thresholding = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if artifacts.get(x, y) {
                for_thresholding.set_pixel(x, y, blurred.pixel(x, y));
            }
        }
    }
    Ok((blurred, for_thresholding))
}

/// Otsu's threshold over an 8-bit histogram, maximizing the between-class
/// variance with exact integer arithmetic.
///
/// For a split at t (background <= t), with w0 pixels of value-sum s0 on the
/// left and N pixels of total sum S, the between-class variance is
/// proportional to `(s0 N - S w0)^2 / (w0 (N - w0))`. Numerator and
/// denominator fit u128, and candidate fractions are compared by quotient
/// then cross-multiplied remainder, so no floats are involved anywhere: ties
/// are exact and resolved toward the smallest threshold.
pub fn otsu_threshold(hist: &[u64; 256]) -> Result<u8> {
    let n: u64 = hist.iter().sum();
    if n == 0 {
        return Err(Error::Empty("otsu histogram has no samples".into()));
    }
    let total_sum: u128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u128 * c as u128)
        .sum();
    // Single-valued histogram: that value is the only sensible answer.
    let nonzero: Vec<usize> = (0..256).filter(|&v| hist[v] > 0).collect();
    if nonzero.len() == 1 {
        return Ok(nonzero[0] as u8);
    }
    let mut best_t = 0u8;
    // Score as (quotient, remainder-cross) fraction A^2 / B kept exactly.
    let mut best: Option<(u128, u128, u128)> = None; // (a2, b, quotient)
    let mut w0 = 0u128;
    let mut s0 = 0u128;
    for t in 0..255usize {
        w0 += hist[t] as u128;
        s0 += (t as u128) * hist[t] as u128;
        if w0 == 0 {
            continue;
        }
        let w1 = n as u128 - w0;
        if w1 == 0 {
            break;
        }
        // A = s0 * N - S * w0 can be negative; square its magnitude.
        let lhs = s0 * n as u128;
        let rhs = total_sum * w0;
        let a = lhs.abs_diff(rhs);
        // a <= 255 * N * N <= 2^8 * 2^48 * ... : for image-sized histograms
        // (N < 2^24) a < 2^56, so a^2 fits u128 comfortably.
        let a2 = a * a;
        let b = w0 * w1;
        let better = match &best {
            None => true,
            Some((ba2, bb, bq)) => {
                let q = a2 / b;
                match q.cmp(bq) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        // Compare remainders: r/b > br/bb  <=>  r*bb > br*b.
                        let r = a2 % b;
                        let br = ba2 % bb;
                        r * bb > br * b
                    }
                }
            }
        };
        if better {
            best = Some((a2, b, a2 / b));
            best_t = t as u8;
        }
    }
    Ok(best_t)
}

/// Builds a histogram of 8-bit values.
pub fn histogram(values: impl IntoIterator<Item = u8>) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for v in values {
        hist[v as usize] += 1;
    }
    hist
}

/// Outcome of the initial thresholding stage.
pub struct ThresholdOutcome {
    /// The initial lesion mask (whole image, thresholded on blue).
    pub mask: BinaryMask,
    /// The Otsu threshold that produced it.
    pub threshold: u8,
    /// Between-class variance share at the chosen threshold, in [0, 1];
    /// degenerate histograms give 0.
    pub separability: f64,
}

/// Otsu on the blue channel over `region`, then `blue <= t` image-wide.
///
/// Dark pixels are the lesion side. The histogram comes only from
/// `region` (the lesion+skin area), but the cut applies to every pixel; the
/// post-processing stage re-applies the spatial constraints.
pub fn initial_lesion_mask(img: &RgbImage, region: &BinaryMask) -> Result<ThresholdOutcome> {
    if (img.width(), img.height()) != (region.width(), region.height()) {
        return Err(Error::DimensionMismatch {
            expected_w: img.width(),
            expected_h: img.height(),
            actual_w: region.width(),
            actual_h: region.height(),
        });
    }
    if region.is_empty() {
        return Err(Error::Empty("thresholding region is empty".into()));
    }
    let blue: Vec<u8> = img.channel(2);
    let hist = histogram(
        blue.iter()
            .zip(region.data())
            .filter(|(_, &keep)| keep)
            .map(|(&v, _)| v),
    );
    let t = otsu_threshold(&hist)?;
    let mask = BinaryMask::new(
        img.width(),
        img.height(),
        blue.iter().map(|&v| v <= t).collect(),
    )?;
    Ok(ThresholdOutcome {
        mask,
        threshold: t,
        separability: separability(&hist, t),
    })
}

/// Between-class variance share eta = sigma_b^2 / sigma_total^2 at threshold
/// t (0 for degenerate histograms).
fn separability(hist: &[u64; 256], t: u8) -> f64 {
    let n: u64 = hist.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mean: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum::<f64>()
        / nf;
    let var_total: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| {
            let d = v as f64 - mean;
            d * d * c as f64
        })
        .sum::<f64>()
        / nf;
    if var_total == 0.0 {
        return 0.0;
    }
    let (mut w0, mut s0) = (0f64, 0f64);
    for v in 0..=t as usize {
        w0 += hist[v] as f64;
        s0 += (v * hist[v] as usize) as f64;
    }
    let w1 = nf - w0;
    if w0 == 0.0 || w1 == 0.0 {
        return 0.0;
    }
    let (m0, m1) = (s0 / w0, (mean * nf - s0) / w1);
    let var_between = (w0 / nf) * (w1 / nf) * (m0 - m1) * (m0 - m1);
    (var_between / var_total).clamp(0.0, 1.0)
}

/// Everything the post-processing stage wants to report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PostprocessNote {
    /// Gating the mask left nothing; fell back to the ungated mask.
    GateEmptied,
    /// The selected component was a small fraction of the thresholded
    /// foreground (fragmented threshold output).
    FragmentedForeground,
    /// The final opening would have split or emptied the mask; skipped.
    OpeningSkipped,
    /// The final closing would have split or emptied the mask; skipped.
    ClosingSkipped,
}

impl PostprocessNote {
    pub fn flag(&self) -> &'static str {
        match self {
            PostprocessNote::GateEmptied => "degraded:gate_emptied",
            PostprocessNote::FragmentedForeground => "degraded:fragmented_foreground",
            PostprocessNote::OpeningSkipped => "postprocess:opening_skipped",
            PostprocessNote::ClosingSkipped => "postprocess:closing_skipped",
        }
    }
}

fn is_single_component(mask: &BinaryMask) -> bool {
    !mask.is_empty() && largest_component(mask).count() == mask.count()
}

/// Morphological post-processing of the initial mask.
///
/// 1. Build the interior disk (radius `interior_fraction * min(w, h)` around
///    the image center) and the lesion+skin support L = complement of the
///    artifact cut.
/// 2. Gate the mask with `(dilate(L) inside) union (erode(L) outside)`: near
///    the center the support is read generously, near the borders strictly.
/// 3. Keep the most centered of the top-k largest components, fill its
///    holes, then open and close with disk SEs — each only applied when it
///    neither empties nor splits the mask.
///
/// The result is a single 8-connected component without holes (or empty),
/// plus notes about any fallbacks taken.
pub fn postprocess(
    mask: &BinaryMask,
    p: &FuzzyPartition,
    cfg: &SegmentationConfig,
) -> Result<(BinaryMask, Vec<PostprocessNote>)> {
    if (mask.width(), mask.height()) != (p.width(), p.height()) {
        return Err(Error::DimensionMismatch {
            expected_w: mask.width(),
            expected_h: mask.height(),
            actual_w: p.width(),
            actual_h: p.height(),
        });
    }
    cfg.validate()?;
    let (w, h) = (mask.width(), mask.height());
    let mut notes = Vec::new();

    let radius = cfg.interior_fraction * w.min(h) as f64;
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let interior = BinaryMask::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        dx * dx + dy * dy <= radius * radius
    });

    let support = artifact_mask(p, cfg.thr_other).complement();
    let se = StructuringElement::disk(cfg.erode_radius_region)?;
    let gate = dilate(&support, &se)
        .intersect(&interior)
        .union(&erode(&support, &se).intersect(&interior.complement()));
    let gated = mask.intersect(&gate);

    let mut current = most_centered_component(&gated, cfg.top_k_components);
    if current.is_empty() && !mask.is_empty() {
        // The gate ate everything; select from the raw mask instead.
        notes.push(PostprocessNote::GateEmptied);
        current = most_centered_component(mask, cfg.top_k_components);
    }
    let reference = if gated.is_empty() { mask } else { &gated };
    if !current.is_empty()
        && (current.count() as f64) < FRAGMENTATION_FLOOR * reference.count() as f64
    {
        notes.push(PostprocessNote::FragmentedForeground);
    }
    current = fill_holes(&current);

    let open_se = StructuringElement::disk(cfg.post_open_radius)?;
    let opened = dilate(&erode(&current, &open_se), &open_se);
    if is_single_component(&opened) {
        current = opened;
    } else if !current.is_empty() {
        notes.push(PostprocessNote::OpeningSkipped);
    }
    let close_se = StructuringElement::disk(cfg.post_close_radius)?;
    let closed = erode(&dilate(&current, &close_se), &close_se);
    if is_single_component(&closed) {
        current = closed;
    } else if !current.is_empty() {
        notes.push(PostprocessNote::ClosingSkipped);
    }
    // The kept opening/closing cannot re-split the mask, but closing against
    // the border can carve a hole; guarantee the no-hole invariant.
    current = fill_holes(&current);
    Ok((current, notes))
}

/// Intermediate images of one pipeline run, for inspection.
pub enum TraceImage {
    Rgb(RgbImage),
    Gray(Gray8Image),
    Mask(BinaryMask),
}

/// A record of one pipeline run: flags, scalar outcomes and (optionally)
/// every intermediate image keyed by a short stage name.
pub struct SegmentationTrace {
    /// Degradation and fallback flags, in the order they occurred.
    pub flags: Vec<String>,
    /// Otsu threshold on the blue channel.
    pub threshold: u8,
    /// Between-class variance share at that threshold.
    pub separability: f64,
    /// Estimated skin color.
    pub skin_color: [u8; 3],
    /// `(stage name, image)` pairs; empty unless stage recording was on.
    pub stages: Vec<(&'static str, TraceImage)>,
}

/// Output of [`segment`]: the mask at original resolution plus the trace.
pub struct SegmentationResult {
    pub mask: BinaryMask,
    pub trace: SegmentationTrace,
}

impl SegmentationResult {
    /// Whether any degradation fallback fired.
    pub fn is_degraded(&self) -> bool {
        self.trace.flags.iter().any(|f| f.starts_with("degraded:"))
    }
}

/// Runs the full pipeline on one image.
///
/// The image is resized to the working width (skipped when already there),
/// classified with `model`, thresholded artifact-aware on the blue channel,
/// post-processed, and the mask is resampled back to the input geometry.
/// With `record_stages` the trace carries every intermediate image.
pub fn segment(
    img: &RgbImage,
    model: &ForestModel,
    cfg: &SegmentationConfig,
    record_stages: bool,
) -> Result<SegmentationResult> {
    cfg.validate()?;
    let opts = options_for_fingerprint(model.fingerprint()).ok_or_else(|| {
        Error::FingerprintMismatch(
            "model was not trained with this extractor's feature set".into(),
        )
    })?;
    let (orig_w, orig_h) = (img.width(), img.height());
    let work = if orig_w == cfg.working_width {
        img.clone()
    } else {
        resize_bicubic(img, cfg.working_width)?
    };
    let mut flags: Vec<String> = Vec::new();
    let mut stages: Vec<(&'static str, TraceImage)> = Vec::new();
    let mut record = |name: &'static str, img: TraceImage| {
        if record_stages {
            stages.push((name, img));
        }
    };
    record("resized", TraceImage::Rgb(work.clone()));

    let stack = extract_features_with(&work, &opts);
    let partition = classify_image(model, &stack)?;
    drop(stack);
    if record_stages {
        let probs = probability_images(&partition);
        record("prob_lesion", TraceImage::Gray(probs.lesion));
        record("prob_skin", TraceImage::Gray(probs.skin));
        record("prob_other", TraceImage::Gray(probs.other));
        record("prob_composite", TraceImage::Rgb(probs.composite));
    }

    let artifacts = artifact_mask(&partition, cfg.thr_other);
    record("artifacts", TraceImage::Mask(artifacts.clone()));
    let (region, region_degraded) = lesion_skin_mask(&artifacts, cfg)?;
    if region_degraded {
        flags.push("degraded:region_fallback".into());
    }
    let region = if region.is_empty() {
        flags.push("degraded:region_empty".into());
        BinaryMask::filled(work.width(), work.height(), true)
    } else {
        region
    };
    record("region", TraceImage::Mask(region.clone()));

    let (skin, skin_degraded) = skin_color(&work, &partition, cfg.thr_skin)?;
    if skin_degraded {
        flags.push("degraded:no_skin_pixels".into());
    }
    let (blurred, for_thresholding) =
        inpaint_for_thresholding(&work, &artifacts, skin, cfg)?;
    record("inpaint_blurred", TraceImage::Rgb(blurred));
    record("for_thresholding", TraceImage::Rgb(for_thresholding.clone()));

    let outcome = initial_lesion_mask(&for_thresholding, &region)?;
    if outcome.separability < SEPARABILITY_FLOOR {
        flags.push("degraded:low_separability".into());
    }
    record("thresholded", TraceImage::Mask(outcome.mask.clone()));

    let (post, notes) = postprocess(&outcome.mask, &partition, cfg)?;
    flags.extend(notes.iter().map(|n| n.flag().to_string()));
    record("postprocessed", TraceImage::Mask(post.clone()));

    let mask = if (post.width(), post.height()) == (orig_w, orig_h) {
        post
    } else {
        upsize_mask(&post, orig_w, orig_h)?
    };
    Ok(SegmentationResult {
        mask,
        trace: SegmentationTrace {
            flags,
            threshold: outcome.threshold,
            separability: outcome.separability,
            skin_color: skin,
            stages,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(SegmentationConfig::default().validate().is_ok());
    }

    #[test]
    fn config_domains_are_enforced() {
        let base = SegmentationConfig::default;
        for bad in [
            SegmentationConfig {
                thr_other: 1.5,
                ..base()
            },
            SegmentationConfig {
                thr_skin: -0.1,
                ..base()
            },
            SegmentationConfig {
                working_width: 1,
                ..base()
            },
            SegmentationConfig {
                erode_radius_region: 0,
                ..base()
            },
            SegmentationConfig {
                median_window: 4,
                ..base()
            },
            SegmentationConfig {
                interior_fraction: 0.0,
                ..base()
            },
            SegmentationConfig {
                interior_fraction: 0.6,
                ..base()
            },
            SegmentationConfig {
                post_open_radius: 0,
                ..base()
            },
            SegmentationConfig {
                top_k_components: 0,
                ..base()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn otsu_two_spikes() {
        let mut hist = [0u64; 256];
        hist[10] = 100;
        hist[200] = 100;
        // Any threshold in [10, 199] separates perfectly; exact tie-breaking
        // picks the smallest.
        assert_eq!(otsu_threshold(&hist).unwrap(), 10);
    }

    #[test]
    fn otsu_single_value_and_empty() {
        let mut hist = [0u64; 256];
        hist[77] = 1234;
        assert_eq!(otsu_threshold(&hist).unwrap(), 77);
        let empty = [0u64; 256];
        assert!(matches!(otsu_threshold(&empty), Err(Error::Empty(_))));
    }

    #[test]
    fn otsu_bimodal_gaussians() {
        // Two well-separated humps; the threshold must land between them.
        let mut hist = [0u64; 256];
        for v in 0..256i64 {
            let g = |m: i64, s: f64, a: f64| {
                let d = (v - m) as f64;
                (a * (-d * d / (2.0 * s * s)).exp()) as u64
            };
            hist[v as usize] = g(60, 12.0, 1000.0) + g(180, 15.0, 800.0);
        }
        let t = otsu_threshold(&hist).unwrap();
        assert!((90..=150).contains(&t), "t = {t}");
    }

    #[test]
    fn separability_extremes() {
        let mut two = [0u64; 256];
        two[0] = 500;
        two[255] = 500;
        let t = otsu_threshold(&two).unwrap();
        assert!((separability(&two, t) - 1.0).abs() < 1e-12);
        let mut one = [0u64; 256];
        one[128] = 100;
        assert_eq!(separability(&one, 128), 0.0);
    }

    #[test]
    fn histogram_counts() {
        let h = histogram([1u8, 1, 3, 255]);
        assert_eq!(h[1], 2);
        assert_eq!(h[3], 1);
        assert_eq!(h[255], 1);
        assert_eq!(h.iter().sum::<u64>(), 4);
    }
}
