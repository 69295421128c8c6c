//! Bicubic resampling (Catmull-Rom, a = -0.5) with edge replication.

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, RgbImage};

/// Cubic convolution kernel with a = -0.5 (Catmull-Rom).
fn cubic(x: f64) -> f64 {
    const A: f64 = -0.5;
    let x = x.abs();
    if x <= 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
    } else {
        0.0
    }
}

/// Per output coordinate: the four source taps (clamped) and their weights.
///
/// Source position uses the half-pixel convention
/// `src = (dst + 0.5) * (src_len / dst_len) - 0.5`, so an identity resize
/// lands exactly on source centers and the kernel degenerates to (0, 1, 0, 0):
/// scale-1 resampling is bit-exact.
fn tap_plan(src_len: usize, dst_len: usize) -> Vec<([usize; 4], [f64; 4])> {
    let scale = src_len as f64 / dst_len as f64;
    (0..dst_len)
        .map(|d| {
            let src = (d as f64 + 0.5) * scale - 0.5;
            let base = src.floor();
            let f = src - base;
            let base = base as isize;
            let mut idx = [0usize; 4];
            let mut w = [0f64; 4];
            for t in 0..4 {
                let s = base - 1 + t as isize;
                idx[t] = s.clamp(0, src_len as isize - 1) as usize;
                w[t] = cubic(f - (t as f64 - 1.0));
            }
            (idx, w)
        })
        .collect()
}

/// Resamples one plane to `tw x th`. Horizontal pass, then vertical, both in
/// f64; no clamping here (callers decide the output range).
pub(crate) fn resize_plane(
    plane: &[f64],
    w: usize,
    h: usize,
    tw: usize,
    th: usize,
) -> Vec<f64> {
    debug_assert_eq!(plane.len(), w * h);
    let xplan = tap_plan(w, tw);
    let mut horiz = vec![0f64; tw * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        let out = &mut horiz[y * tw..(y + 1) * tw];
        for (d, (idx, wt)) in xplan.iter().enumerate() {
            out[d] = wt[0] * row[idx[0]]
                + wt[1] * row[idx[1]]
                + wt[2] * row[idx[2]]
                + wt[3] * row[idx[3]];
        }
    }
    let yplan = tap_plan(h, th);
    let mut out = vec![0f64; tw * th];
    for (d, (idx, wt)) in yplan.iter().enumerate() {
        let rows: [&[f64]; 4] = [
            &horiz[idx[0] * tw..idx[0] * tw + tw],
            &horiz[idx[1] * tw..idx[1] * tw + tw],
            &horiz[idx[2] * tw..idx[2] * tw + tw],
            &horiz[idx[3] * tw..idx[3] * tw + tw],
        ];
        let dst = &mut out[d * tw..(d + 1) * tw];
        for x in 0..tw {
            dst[x] = wt[0] * rows[0][x] + wt[1] * rows[1][x] + wt[2] * rows[2][x] + wt[3] * rows[3][x];
        }
    }
    out
}

/// Target height that keeps the aspect ratio: `round(h * tw / w)`, at least 1.
pub(crate) fn proportional_height(w: usize, h: usize, tw: usize) -> usize {
    ((h as f64 * tw as f64 / w as f64).round() as usize).max(1)
}

/// Bicubic resize to `target_width`, height chosen to preserve aspect ratio.
///
/// Channels are resampled independently; outputs are rounded and clamped to
/// [0, 255] (bicubic overshoots near edges).
pub fn resize_bicubic(img: &RgbImage, target_width: usize) -> Result<RgbImage> {
    if target_width < 2 {
        return Err(Error::Parameter(format!(
            "target width must be >= 2, got {target_width}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let tw = target_width;
    let th = proportional_height(w, h, tw);
    let mut data = vec![0u8; 3 * tw * th];
    for c in 0..3 {
        let plane: Vec<f64> = img.channel(c).iter().map(|&v| v as f64).collect();
        let resized = resize_plane(&plane, w, h, tw, th);
        for (i, v) in resized.iter().enumerate() {
            data[3 * i + c] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    RgbImage::new(tw, th, data)
}

/// Scales a working-resolution mask back up to `orig_w x orig_h`.
///
/// The mask becomes a {0, 255} plane, is resampled bicubically, and every
/// value >= 127.5 becomes foreground (ties toward foreground).
pub fn upsize_mask(mask: &BinaryMask, orig_w: usize, orig_h: usize) -> Result<BinaryMask> {
    if orig_w == 0 || orig_h == 0 {
        return Err(Error::Parameter(format!(
            "target dims must be positive, got {orig_w}x{orig_h}"
        )));
    }
    let plane: Vec<f64> = mask
        .data()
        .iter()
        .map(|&v| if v { 255.0 } else { 0.0 })
        .collect();
    let resized = resize_plane(&plane, mask.width(), mask.height(), orig_w, orig_h);
    BinaryMask::new(
        orig_w,
        orig_h,
        resized.iter().map(|&v| v >= 127.5).collect(),
    )
}
