//! Color-space conversions used by the feature extractor.
//!
//! All conversions start from 8-bit sRGB. XYZ/Lab/Luv use the D65 sRGB
//! matrix; the reference white is taken as the matrix image of RGB(1,1,1)
//! (the row sums), so neutral grays map to exactly a* = b* = u* = v* = 0.

use crate::imaging::{GrayImage, MultiChannelImage, RgbImage};

/// Color spaces the extractor can project into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    /// Chromaticity-normalized RGB: each channel divided by R+G+B.
    RgbNorm,
    /// Hue (degrees, [0, 360)), saturation and value in [0, 1].
    Hsv,
    /// CIE XYZ (D65), components in [0, ~1.09].
    Xyz,
    /// CIE L*a*b* (D65).
    Lab,
    /// CIE L*u*v* (D65).
    Luv,
}

/// sRGB linearization for one 8-bit value, tabulated once.
fn srgb_linear_lut() -> [f64; 256] {
    let mut lut = [0f64; 256];
    for (i, slot) in lut.iter_mut().enumerate() {
        let c = i as f64 / 255.0;
        *slot = if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        };
    }
    lut
}

/// sRGB (D65) linear-RGB -> XYZ matrix.
const M: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

/// Reference white = matrix image of (1, 1, 1).
fn white() -> (f64, f64, f64) {
    (
        M[0][0] + M[0][1] + M[0][2],
        M[1][0] + M[1][1] + M[1][2],
        M[2][0] + M[2][1] + M[2][2],
    )
}

fn xyz_from_linear(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    (
        M[0][0] * r + M[0][1] * g + M[0][2] * b,
        M[1][0] * r + M[1][1] * g + M[1][2] * b,
        M[2][0] * r + M[2][1] * g + M[2][2] * b,
    )
}

/// Lab companding function.
fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// HSV with H in degrees [0, 360), S and V in [0, 1]. Gray pixels get H = 0;
/// black gets S = 0.
pub(crate) fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let rf = r as f64 / 255.0;
    let gf = g as f64 / 255.0;
    let bf = b as f64 / 255.0;
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == rf {
        60.0 * ((gf - bf) / delta)
    } else if max == gf {
        60.0 * ((bf - rf) / delta + 2.0)
    } else {
        60.0 * ((rf - gf) / delta + 4.0)
    };
    let h = if h < 0.0 { h + 360.0 } else { h };
    // Guard the h == 360.0 corner that ((g-b)/delta) == -0.0 rounding can hit.
    let h = if h >= 360.0 { h - 360.0 } else { h };
    (h, s, v)
}

pub(crate) fn rgb_to_xyz(lut: &[f64; 256], r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    xyz_from_linear(lut[r as usize], lut[g as usize], lut[b as usize])
}

pub(crate) fn xyz_to_lab(x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let (xn, yn, zn) = white();
    let fx = lab_f(x / xn);
    let fy = lab_f(y / yn);
    let fz = lab_f(z / zn);
    (116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

pub(crate) fn xyz_to_luv(x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let (xn, yn, zn) = white();
    let l = 116.0 * lab_f(y / yn) - 16.0;
    let denom = x + 15.0 * y + 3.0 * z;
    let wdenom = xn + 15.0 * yn + 3.0 * zn;
    let (un, vn) = (4.0 * xn / wdenom, 9.0 * yn / wdenom);
    // Black has no chromaticity; pin u' v' to the white point so u* = v* = 0.
    let (up, vp) = if denom > 0.0 {
        (4.0 * x / denom, 9.0 * y / denom)
    } else {
        (un, vn)
    };
    (l, 13.0 * l * (up - un), 13.0 * l * (vp - vn))
}

/// Chromaticity-normalized RGB; black maps to (1/3, 1/3, 1/3).
pub(crate) fn rgb_normalized(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let s = r as u32 + g as u32 + b as u32;
    if s == 0 {
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    } else {
        let s = s as f64;
        (r as f64 / s, g as f64 / s, b as f64 / s)
    }
}

/// Plain channel average `(R + G + B) / 3` as a real-valued plane.
pub fn to_gray(img: &RgbImage) -> GrayImage {
    let mut data = Vec::with_capacity(img.width() * img.height());
    for px in img.data().chunks_exact(3) {
        data.push((px[0] as f64 + px[1] as f64 + px[2] as f64) / 3.0);
    }
    GrayImage::new(img.width(), img.height(), data).expect("source image is valid")
}

/// Projects an RGB image into `space`, producing three named planes.
pub fn convert_color(img: &RgbImage, space: ColorSpace) -> MultiChannelImage {
    let n = img.width() * img.height();
    let mut p0 = Vec::with_capacity(n);
    let mut p1 = Vec::with_capacity(n);
    let mut p2 = Vec::with_capacity(n);
    let lut = srgb_linear_lut();
    let labels: [&'static str; 3] = match space {
        ColorSpace::RgbNorm => ["r", "g", "b"],
        ColorSpace::Hsv => ["h", "s", "v"],
        ColorSpace::Xyz => ["x", "y", "z"],
        ColorSpace::Lab => ["l", "a", "b"],
        ColorSpace::Luv => ["l", "u", "v"],
    };
    for px in img.data().chunks_exact(3) {
        let (r, g, b) = (px[0], px[1], px[2]);
        let (a, bb, c) = match space {
            ColorSpace::RgbNorm => rgb_normalized(r, g, b),
            ColorSpace::Hsv => rgb_to_hsv(r, g, b),
            ColorSpace::Xyz => rgb_to_xyz(&lut, r, g, b),
            ColorSpace::Lab => {
                let (x, y, z) = rgb_to_xyz(&lut, r, g, b);
                xyz_to_lab(x, y, z)
            }
            ColorSpace::Luv => {
                let (x, y, z) = rgb_to_xyz(&lut, r, g, b);
                xyz_to_luv(x, y, z)
            }
        };
        p0.push(a);
        p1.push(bb);
        p2.push(c);
    }
    MultiChannelImage::new(img.width(), img.height(), labels.to_vec(), vec![p0, p1, p2])
}
