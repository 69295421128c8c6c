//! Image containers, file IO, resampling, color conversion and binary
//! morphology.
//!
//! All containers are flat row-major buffers indexed as `y * width + x`.
//! Coordinates are `(x, y)` with `x` growing rightward and `y` downward.

mod color;
mod median;
mod morphology;
mod resize;

pub use color::{convert_color, to_gray, ColorSpace};
pub use median::median_filter;
pub use morphology::{
    dilate, erode, fill_holes, largest_component, most_centered_component, StructuringElement,
};
pub use resize::{resize_bicubic, upsize_mask};

use std::path::Path;

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "zero dimension: {width}x{height}"
        )));
    }
    Ok(())
}

/// 8-bit interleaved RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    /// Wraps an interleaved RGB buffer; `data.len()` must be `3 * width * height`.
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != 3 * width * height {
            return Err(Error::InvalidImage(format!(
                "rgb buffer holds {} bytes, {}x{} needs {}",
                data.len(),
                width,
                height,
                3 * width * height
            )));
        }
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if a dimension is zero (programmer error, unlike file input).
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "from_fn needs positive dims");
        let mut data = Vec::with_capacity(3 * width * height);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        RgbImage {
            width,
            height,
            data,
        }
    }

    /// Uniform color image.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel at `(x, y)`; panics out of bounds.
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Interleaved RGB bytes, row-major.
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// One channel (0 = R, 1 = G, 2 = B) as a packed plane.
    pub fn channel(&self, c: usize) -> Vec<u8> {
        assert!(c < 3);
        self.data.iter().skip(c).step_by(3).copied().collect()
    }
}

/// Real-valued single-channel image (feature planes, filter outputs).
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "gray buffer holds {} values, {}x{} needs {}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "from_fn needs positive dims");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Value at `(x, y)` with coordinates clamped into the image (edge
    /// replication, the border convention every filter in this crate uses).
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }
}

/// 8-bit single-channel image (probability images, saved masks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8Image {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Gray8Image {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "gray8 buffer holds {} bytes, {}x{} needs {}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Gray8Image {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }
}

/// Binary mask; `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "mask buffer holds {} values, {}x{} needs {}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        assert!(width > 0 && height > 0, "filled needs positive dims");
        BinaryMask {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "from_fn needs positive dims");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        BinaryMask {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [bool] {
        &mut self.data
    }

    /// Number of foreground pixels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    /// Logical NOT.
    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| !v).collect(),
        }
    }

    /// Pixelwise AND; panics on dimension mismatch (programmer error).
    pub fn intersect(&self, other: &BinaryMask) -> BinaryMask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a && b)
                .collect(),
        }
    }

    /// Pixelwise OR; panics on dimension mismatch (programmer error).
    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a || b)
                .collect(),
        }
    }
}

/// A stack of real-valued planes sharing one geometry, with channel names.
#[derive(Debug, Clone)]
pub struct MultiChannelImage {
    width: usize,
    height: usize,
    labels: Vec<&'static str>,
    planes: Vec<Vec<f64>>,
}

impl MultiChannelImage {
    pub(crate) fn new(
        width: usize,
        height: usize,
        labels: Vec<&'static str>,
        planes: Vec<Vec<f64>>,
    ) -> Self {
        assert_eq!(labels.len(), planes.len());
        for p in &planes {
            assert_eq!(p.len(), width * height);
        }
        MultiChannelImage {
            width,
            height,
            labels,
            planes,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Channel names, e.g. `["h", "s", "v"]`.
    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    pub fn num_planes(&self) -> usize {
        self.planes.len()
    }

    pub(crate) fn into_planes(self) -> Vec<Vec<f64>> {
        self.planes
    }
}

/// Decodes `path` (PNG or JPEG) into 8-bit RGB.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let dynimg = image::open(path).map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = dynimg.to_rgb8();
    let (w, h) = rgb.dimensions();
    RgbImage::new(w as usize, h as usize, rgb.into_raw())
}

/// Writes an RGB image as PNG.
pub fn save_rgb_png(img: &RgbImage, path: &Path) -> Result<()> {
    image::save_buffer(
        path,
        img.data(),
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::Rgb8,
    )
    .map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes an 8-bit gray image as PNG.
pub fn save_gray_png(img: &Gray8Image, path: &Path) -> Result<()> {
    image::save_buffer(
        path,
        img.data(),
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::L8,
    )
    .map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a mask as an 8-bit PNG with foreground 255, background 0.
pub fn save_mask_png(mask: &BinaryMask, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = mask.data().iter().map(|&v| if v { 255 } else { 0 }).collect();
    image::save_buffer(
        path,
        &bytes,
        mask.width() as u32,
        mask.height() as u32,
        image::ExtendedColorType::L8,
    )
    .map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a mask PNG: any channel value >= 128 counts as foreground.
///
/// Accepts gray or RGB files (ground truth is usually 0/255 gray; some tools
/// save it as RGB).
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let dynimg = image::open(path).map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })?;
    let gray = dynimg.to_luma8();
    let (w, h) = gray.dimensions();
    BinaryMask::new(
        w as usize,
        h as usize,
        gray.into_raw().iter().map(|&v| v >= 128).collect(),
    )
}
