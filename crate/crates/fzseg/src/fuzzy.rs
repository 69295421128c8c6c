//! Fuzzy pixel classification: per-pixel class memberships, probability
//! images and alpha-cuts.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureStack;
use crate::forest::ForestModel;
use crate::imaging::{BinaryMask, Gray8Image, RgbImage};
use crate::PixelClass;

/// Per-pixel membership degrees for the three classes.
///
/// Every pixel's memberships sum to 1 (up to 1e-9); each membership plane is
/// a fuzzy set over the image.
#[derive(Debug, Clone)]
pub struct FuzzyPartition {
    width: usize,
    height: usize,
    mu: [Vec<f64>; 3],
}

impl FuzzyPartition {
    /// Builds a partition from three membership planes, enforcing geometry
    /// and the sum-to-one invariant.
    pub fn new(
        width: usize,
        height: usize,
        mu_lesion: Vec<f64>,
        mu_skin: Vec<f64>,
        mu_other: Vec<f64>,
    ) -> Result<Self> {
        let n = width * height;
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero dimension: {width}x{height}"
            )));
        }
        for (name, p) in [
            ("lesion", &mu_lesion),
            ("skin", &mu_skin),
            ("other", &mu_other),
        ] {
            if p.len() != n {
                return Err(Error::InvalidImage(format!(
                    "membership plane '{name}' holds {} values, needs {n}",
                    p.len()
                )));
            }
        }
        for i in 0..n {
            let sum = mu_lesion[i] + mu_skin[i] + mu_other[i];
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidImage(format!(
                    "memberships at pixel {i} sum to {sum}, not 1"
                )));
            }
        }
        Ok(FuzzyPartition {
            width,
            height,
            mu: [mu_lesion, mu_skin, mu_other],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Membership plane of one class, row-major.
    pub fn mu(&self, class: PixelClass) -> &[f64] {
        &self.mu[class.index()]
    }

    /// Membership triple of one pixel.
    pub fn at(&self, x: usize, y: usize) -> [f64; 3] {
        let i = y * self.width + x;
        [self.mu[0][i], self.mu[1][i], self.mu[2][i]]
    }
}

/// Scores every pixel of a feature stack with the forest, producing the
/// fuzzy partition. The stack's feature names must equal the model's
/// fingerprint. Logs a warning when some class gets no support anywhere
/// (usually a sign the model never saw that class in training).
pub fn classify_image(model: &ForestModel, stack: &FeatureStack) -> Result<FuzzyPartition> {
    if stack.names() != model.fingerprint() {
        return Err(Error::FingerprintMismatch(format!(
            "stack has {} planes, model expects {}{}",
            stack.num_features(),
            model.fingerprint().len(),
            if stack.num_features() == model.fingerprint().len() {
                " (same count, different feature names/order)"
            } else {
                ""
            }
        )));
    }
    let n = stack.num_pixels();
    let probs: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|i| model.predict_proba_on(|f| stack.value(i, f) as f64))
        .collect();
    let mut mu = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for p in &probs {
        mu[0].push(p[0]);
        mu[1].push(p[1]);
        mu[2].push(p[2]);
    }
    for class in PixelClass::ALL {
        if mu[class.index()].iter().all(|&v| v == 0.0) {
            log::warn!(
                "class '{}' has zero membership everywhere in this image",
                class.label()
            );
        }
    }
    let [mu_lesion, mu_skin, mu_other] = mu;
    FuzzyPartition::new(stack.width(), stack.height(), mu_lesion, mu_skin, mu_other)
}

/// The 8-bit probability images plus their RGB composite.
pub struct ProbabilityImages {
    pub lesion: Gray8Image,
    pub skin: Gray8Image,
    pub other: Gray8Image,
    /// R = lesion, G = skin, B = other.
    pub composite: RgbImage,
}

/// Quantizes one membership triple to bytes that sum to exactly 255.
///
/// Each membership is scaled by 255 and rounded half-away-from-zero; the
/// leftover (-1, 0 or +1 by construction) is added to the component with the
/// largest membership, ties resolved in class order.
pub(crate) fn quantize_triple(mu: [f64; 3]) -> [u8; 3] {
    let mut q = [0i32; 3];
    for (i, &m) in mu.iter().enumerate() {
        q[i] = (255.0 * m).round() as i32;
    }
    let diff = 255 - (q[0] + q[1] + q[2]);
    if diff != 0 {
        let mut target = 0;
        for i in 1..3 {
            if mu[i] > mu[target] {
                target = i;
            }
        }
        q[target] += diff;
    }
    debug_assert_eq!(q[0] + q[1] + q[2], 255);
    debug_assert!(q.iter().all(|&v| (0..=255).contains(&v)), "{q:?} from {mu:?}");
    [q[0] as u8, q[1] as u8, q[2] as u8]
}

/// Renders the partition as three 8-bit probability images and a composite.
///
/// Per pixel the three bytes sum to exactly 255, so the composite is a
/// lossless visual encoding of the quantized partition.
pub fn probability_images(p: &FuzzyPartition) -> ProbabilityImages {
    let n = p.width() * p.height();
    let mut lesion = Vec::with_capacity(n);
    let mut skin = Vec::with_capacity(n);
    let mut other = Vec::with_capacity(n);
    let mut composite = Vec::with_capacity(3 * n);
    for i in 0..n {
        let q = quantize_triple([p.mu[0][i], p.mu[1][i], p.mu[2][i]]);
        lesion.push(q[0]);
        skin.push(q[1]);
        other.push(q[2]);
        composite.extend_from_slice(&q);
    }
    ProbabilityImages {
        lesion: Gray8Image::new(p.width(), p.height(), lesion).expect("valid dims"),
        skin: Gray8Image::new(p.width(), p.height(), skin).expect("valid dims"),
        other: Gray8Image::new(p.width(), p.height(), other).expect("valid dims"),
        composite: RgbImage::new(p.width(), p.height(), composite).expect("valid dims"),
    }
}

/// Alpha-cut of one class: the crisp set of pixels with membership >= alpha.
pub fn alpha_cut(p: &FuzzyPartition, class: PixelClass, alpha: f64) -> BinaryMask {
    let plane = p.mu(class);
    BinaryMask::new(
        p.width(),
        p.height(),
        plane.iter().map(|&m| m >= alpha).collect(),
    )
    .expect("partition geometry is valid")
}
