//! Per-pixel feature extraction: 16 color features and 143 texture features
//! (159 planes total) describing every pixel of an RGB image.
//!
//! Color features: gray level, R, G, B, and the three components of each of
//! HSV, CIE XYZ, CIE Lab and CIE Luv. (Chromaticity-normalized RGB can be
//! added as three extra planes via [`ExtractOptions`].)
//!
//! Texture features, all derived from the gray plane: the Gaussian scale
//! space at sigmas {1, 2, 4, 8, 16}; Sobel gradient magnitude of the raw
//! gray and each scale; all 10 coarser-minus-finer scale differences;
//! the Laplacian of each scale; eight Hessian-derived maps of the raw gray
//! and each scale; five local statistics over disks of radius sigma on the
//! raw gray; and a 44-filter Gabor bank on the raw gray.

mod fft;
mod filters;
mod gabor;
mod stats;

pub use filters::{
    dog, gaussian_blur, gaussian_kernel, hessian_features, laplacian, sobel_magnitude,
    ScaleSpace, HESSIAN_FEATURE_NAMES, SCALE_SIGMAS,
};
pub use gabor::{default_gabor_bank, gabor_bank, GaborParams};
pub use stats::{local_statistics, LocalStats, STAT_NAMES};

use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{convert_color, to_gray, ColorSpace, RgbImage};
use crate::PixelClass;

/// Number of feature planes in the default configuration.
pub const NUM_FEATURES: usize = 159;

/// Extraction switches. The default matches [`NUM_FEATURES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtractOptions {
    /// Also emit chromaticity-normalized RGB (three extra planes, off by
    /// default). Models remember this via their feature fingerprint.
    pub include_rgb_norm: bool,
}

/// Feature names in plane order; doubles as the model fingerprint.
pub fn feature_names(opts: &ExtractOptions) -> Vec<String> {
    let mut names: Vec<String> = vec!["gray".into()];
    for c in ["rgb.r", "rgb.g", "rgb.b"] {
        names.push(c.into());
    }
    for (space, labels) in [
        ("hsv", ["h", "s", "v"]),
        ("xyz", ["x", "y", "z"]),
        ("lab", ["l", "a", "b"]),
        ("luv", ["l", "u", "v"]),
    ] {
        for l in labels {
            names.push(format!("{space}.{l}"));
        }
    }
    if opts.include_rgb_norm {
        for l in ["r", "g", "b"] {
            names.push(format!("rgbn.{l}"));
        }
    }
    let sig = |s: f64| format!("s{}", s as u64);
    for s in SCALE_SIGMAS {
        names.push(format!("value.{}", sig(s)));
    }
    names.push("sobel.gray".into());
    for s in SCALE_SIGMAS {
        names.push(format!("sobel.{}", sig(s)));
    }
    for i in 1..SCALE_SIGMAS.len() {
        for j in 0..i {
            names.push(format!("dog.{}_{}", sig(SCALE_SIGMAS[i]), sig(SCALE_SIGMAS[j])));
        }
    }
    for s in SCALE_SIGMAS {
        names.push(format!("lap.{}", sig(s)));
    }
    for plane in std::iter::once("gray".to_string()).chain(SCALE_SIGMAS.iter().map(|&s| sig(s))) {
        for f in HESSIAN_FEATURE_NAMES {
            names.push(format!("hess.{f}.{plane}"));
        }
    }
    for s in SCALE_SIGMAS {
        for f in STAT_NAMES {
            names.push(format!("stats.{f}.r{}", s as u64));
        }
    }
    for (deg, wl) in gabor::default_bank_grid() {
        names.push(format!("gabor.t{deg:03}.w{wl:.2}"));
    }
    names
}

/// All feature planes of one image, plane-major.
///
/// `value(pixel, feature)` is the access primitive; a pixel's full feature
/// vector is spread across planes, which keeps the memory one f32 per value
/// and works well with tree traversal (each pixel touches at most one cache
/// line per plane).
pub struct FeatureStack {
    width: usize,
    height: usize,
    names: Vec<String>,
    planes: Vec<Vec<f32>>,
}

impl FeatureStack {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixels (rows of the implicit feature matrix).
    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    /// Number of feature planes.
    pub fn num_features(&self) -> usize {
        self.planes.len()
    }

    /// Feature names in plane order (the fingerprint).
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// One feature value; `pixel` is the row-major pixel index.
    pub fn value(&self, pixel: usize, feature: usize) -> f32 {
        self.planes[feature][pixel]
    }

    /// Copies one pixel's full feature vector.
    pub fn row(&self, pixel: usize) -> Vec<f32> {
        self.planes.iter().map(|p| p[pixel]).collect()
    }

    /// Borrows one whole plane.
    pub fn plane(&self, feature: usize) -> &[f32] {
        &self.planes[feature]
    }
}

fn to_f32(v: Vec<f64>) -> Vec<f32> {
    v.into_iter().map(|x| x as f32).collect()
}

/// Extracts the default 159-plane feature stack.
pub fn extract_features(img: &RgbImage) -> FeatureStack {
    extract_features_with(img, &ExtractOptions::default())
}

/// Extracts the feature stack with explicit options.
pub fn extract_features_with(img: &RgbImage, opts: &ExtractOptions) -> FeatureStack {
    let (w, h) = (img.width(), img.height());
    let mut planes: Vec<Vec<f32>> = Vec::with_capacity(NUM_FEATURES + 3);

    // Color block.
    let gray = to_gray(img);
    planes.push(gray.data().iter().map(|&v| v as f32).collect());
    for c in 0..3 {
        planes.push(img.channel(c).iter().map(|&v| v as f32).collect());
    }
    for space in [ColorSpace::Hsv, ColorSpace::Xyz, ColorSpace::Lab, ColorSpace::Luv] {
        for p in convert_color(img, space).into_planes() {
            planes.push(to_f32(p));
        }
    }
    if opts.include_rgb_norm {
        for p in convert_color(img, ColorSpace::RgbNorm).into_planes() {
            planes.push(to_f32(p));
        }
    }

    // Texture block, everything from the gray plane.
    let ss = ScaleSpace::build(&gray);
    for i in 0..ss.len() {
        planes.push(ss.plane(i).data().iter().map(|&v| v as f32).collect());
    }
    planes.push(to_f32(sobel_magnitude(&gray).data().to_vec()));
    for i in 0..ss.len() {
        planes.push(to_f32(sobel_magnitude(ss.plane(i)).data().to_vec()));
    }
    for i in 1..ss.len() {
        for j in 0..i {
            planes.push(to_f32(
                dog(&ss, i, j).expect("indices are in range").data().to_vec(),
            ));
        }
    }
    for i in 0..ss.len() {
        planes.push(to_f32(laplacian(ss.plane(i)).data().to_vec()));
    }
    {
        let mut hess_src: Vec<&crate::imaging::GrayImage> = vec![&gray];
        hess_src.extend((0..ss.len()).map(|i| ss.plane(i)));
        for src in hess_src {
            for f in hessian_features(src) {
                planes.push(to_f32(f.data().to_vec()));
            }
        }
    }
    for s in SCALE_SIGMAS {
        let st = local_statistics(&gray, s as usize).expect("radius >= 1");
        for img in [st.mean, st.variance, st.median, st.min, st.max] {
            planes.push(to_f32(img.data().to_vec()));
        }
    }
    for g in gabor_bank(&gray, &default_gabor_bank()).expect("default bank is valid") {
        planes.push(to_f32(g.data().to_vec()));
    }

    let names = feature_names(opts);
    debug_assert_eq!(planes.len(), names.len());
    for p in &planes {
        debug_assert_eq!(p.len(), w * h);
    }
    FeatureStack {
        width: w,
        height: h,
        names,
        planes,
    }
}

/// Derives the extraction options a fingerprint was produced with, or `None`
/// if the fingerprint does not match any configuration of this extractor.
pub fn options_for_fingerprint(fingerprint: &[String]) -> Option<ExtractOptions> {
    for opts in [
        ExtractOptions {
            include_rgb_norm: false,
        },
        ExtractOptions {
            include_rgb_norm: true,
        },
    ] {
        if feature_names(&opts) == fingerprint {
            return Some(opts);
        }
    }
    None
}

/// Per-pixel class annotations: 0 = unlabeled, 1..=3 = [`PixelClass`] codes.
#[derive(Debug, Clone)]
pub struct LabelMap {
    width: usize,
    height: usize,
    codes: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, codes: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero dimension: {width}x{height}"
            )));
        }
        if codes.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "label buffer holds {} codes, {}x{} needs {}",
                codes.len(),
                width,
                height,
                width * height
            )));
        }
        if let Some(&bad) = codes.iter().find(|&&c| c > 3) {
            return Err(Error::InvalidImage(format!(
                "label code {bad} out of range (0..=3)"
            )));
        }
        Ok(LabelMap {
            width,
            height,
            codes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn code(&self, x: usize, y: usize) -> u8 {
        self.codes[y * self.width + x]
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    /// Count of labeled pixels per class (lesion, skin, other).
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for &c in &self.codes {
            if c >= 1 {
                counts[c as usize - 1] += 1;
            }
        }
        counts
    }
}

/// Loads a label map from a PNG with codes 0..=3.
///
/// Gray files are read directly; RGB files are accepted when R = G = B
/// (indexed PNGs commonly expand code i to (i,i,i)).
pub fn load_label_map(path: &Path) -> Result<LabelMap> {
    let dynimg = image::open(path).map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = dynimg.to_rgb8();
    let (w, h) = rgb.dimensions();
    let mut codes = Vec::with_capacity((w * h) as usize);
    for px in rgb.into_raw().chunks_exact(3) {
        if px[0] != px[1] || px[1] != px[2] {
            return Err(Error::InvalidImage(format!(
                "label file {} has a non-gray pixel {:?}; labels use codes 0..=3",
                path.display(),
                px
            )));
        }
        codes.push(px[0]);
    }
    LabelMap::new(w as usize, h as usize, codes).map_err(|e| match e {
        Error::InvalidImage(msg) => {
            Error::InvalidImage(format!("label file {}: {msg}", path.display()))
        }
        other => other,
    })
}

/// Extracts features and gathers `(feature vector, class)` pairs for every
/// labeled pixel. `img` must already be at working resolution and match the
/// label map's geometry.
pub fn sample_pixels(
    img: &RgbImage,
    labels: &LabelMap,
    opts: &ExtractOptions,
) -> Result<Vec<(Vec<f32>, PixelClass)>> {
    if (img.width(), img.height()) != (labels.width(), labels.height()) {
        return Err(Error::DimensionMismatch {
            expected_w: img.width(),
            expected_h: img.height(),
            actual_w: labels.width(),
            actual_h: labels.height(),
        });
    }
    let stack = extract_features_with(img, opts);
    let mut rows = Vec::new();
    for (i, &code) in labels.codes().iter().enumerate() {
        if let Some(class) = PixelClass::from_code(code) {
            rows.push((stack.row(i), class));
        }
    }
    if rows.is_empty() {
        return Err(Error::Empty("no labeled pixels in label map".into()));
    }
    Ok(rows)
}
