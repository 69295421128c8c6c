//! Trainable segmentation of skin lesions in dermoscopy images.
//!
//! The pipeline has three stages:
//!
//! 1. **Fuzzy pixel classification.** Every pixel of the (resized) input is
//!    described by 159 color and texture features and pushed through a random
//!    forest whose soft votes yield a fuzzy partition into *lesion*, *skin*
//!    and *other* (hair, rulers, vignettes, bubbles, ...).
//! 2. **Artifact-aware thresholding.** Pixels that look like artifacts are
//!    repainted with the estimated skin color, and Otsu's method on the blue
//!    channel — restricted to the lesion+skin region — produces an initial
//!    lesion mask.
//! 3. **Morphological post-processing.** The initial mask is gated against
//!    the fuzzy partition, reduced to its most centered component, filled and
//!    smoothed into a single hole-free segment.
//!
//! [`segmentation::segment`] runs the whole pipeline on one image;
//! [`forest::train`] fits the classifier from labeled pixels. The binary in
//! the companion CLI crate wraps both for batch use.

pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod fuzzy;
pub mod imaging;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{confusion, metrics, ConfusionCounts, MetricsRow};
pub use features::{ExtractOptions, FeatureStack, LabelMap};
pub use forest::{ForestModel, TrainingSet};
pub use fuzzy::FuzzyPartition;
pub use imaging::{BinaryMask, Gray8Image, GrayImage, RgbImage};
pub use segmentation::{SegmentationConfig, SegmentationResult};

/// The three pixel categories the classifier distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelClass {
    /// Lesion tissue.
    Lesion,
    /// Healthy skin.
    Skin,
    /// Anything else: hair, ruler marks, vignette corners, gel bubbles, ...
    Other,
}

impl PixelClass {
    /// All classes in canonical order (also the tie-break order).
    pub const ALL: [PixelClass; 3] = [PixelClass::Lesion, PixelClass::Skin, PixelClass::Other];

    /// Canonical index: lesion 0, skin 1, other 2.
    pub fn index(self) -> usize {
        match self {
            PixelClass::Lesion => 0,
            PixelClass::Skin => 1,
            PixelClass::Other => 2,
        }
    }

    /// Inverse of [`PixelClass::index`].
    pub fn from_index(i: usize) -> Option<PixelClass> {
        PixelClass::ALL.get(i).copied()
    }

    /// Label-map code (1, 2, 3). Code 0 means "unlabeled".
    pub fn code(self) -> u8 {
        self.index() as u8 + 1
    }

    /// Inverse of [`PixelClass::code`]; 0 and out-of-range codes give `None`.
    pub fn from_code(c: u8) -> Option<PixelClass> {
        match c {
            1 => Some(PixelClass::Lesion),
            2 => Some(PixelClass::Skin),
            3 => Some(PixelClass::Other),
            _ => None,
        }
    }

    /// Human-readable name.
    pub fn label(self) -> &'static str {
        match self {
            PixelClass::Lesion => "lesion",
            PixelClass::Skin => "skin",
            PixelClass::Other => "other",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_round_trips() {
        for c in PixelClass::ALL {
            assert_eq!(PixelClass::from_index(c.index()), Some(c));
            assert_eq!(PixelClass::from_code(c.code()), Some(c));
        }
        assert_eq!(PixelClass::from_code(0), None);
        assert_eq!(PixelClass::from_code(4), None);
        assert_eq!(PixelClass::from_index(3), None);
    }
}
