//! Square-window median filter for 8-bit RGB images.

use crate::error::{Error, Result};
use crate::imaging::RgbImage;

/// Median-filters one packed 8-bit plane with a `(2r+1)^2` window and edge
/// replication, using a sliding 256-bin histogram per row.
///
/// Edge replication means clamped coordinates, so border windows contain
/// repeated pixels and every window holds exactly `(2r+1)^2` samples.
fn median_plane(data: &[u8], w: usize, h: usize, r: usize) -> Vec<u8> {
    let side = 2 * r + 1;
    let rank = (side * side).div_ceil(2); // middle of an odd-sized window
    let clamp_x = |x: isize| -> usize { x.clamp(0, w as isize - 1) as usize };
    let clamp_y = |y: isize| -> usize { y.clamp(0, h as isize - 1) as usize };
    let mut out = vec![0u8; w * h];
    let mut hist = [0u32; 256];
    for y in 0..h {
        hist.fill(0);
        // Rows the window sees at this y, with replication.
        let rows: Vec<usize> = (-(r as isize)..=r as isize)
            .map(|dy| clamp_y(y as isize + dy))
            .collect();
        // Prime the histogram for x = 0.
        for dx in -(r as isize)..=r as isize {
            let cx = clamp_x(dx);
            for &ry in &rows {
                hist[data[ry * w + cx] as usize] += 1;
            }
        }
        for x in 0..w {
            if x > 0 {
                let out_col = clamp_x(x as isize - 1 - r as isize);
                let in_col = clamp_x(x as isize + r as isize);
                for &ry in &rows {
                    hist[data[ry * w + out_col] as usize] -= 1;
                    hist[data[ry * w + in_col] as usize] += 1;
                }
            }
            let mut seen = 0u32;
            for (v, &count) in hist.iter().enumerate() {
                seen += count;
                if seen >= rank as u32 {
                    out[y * w + x] = v as u8;
                    break;
                }
            }
        }
    }
    out
}

/// Channel-wise median filter with an odd square window of side >= 3.
pub fn median_filter(img: &RgbImage, window: usize) -> Result<RgbImage> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::Parameter(format!(
            "median window must be odd and >= 3, got {window}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let r = window / 2;
    let mut data = vec![0u8; 3 * w * h];
    for c in 0..3 {
        let plane = img.channel(c);
        let filtered = median_plane(&plane, w, h, r);
        for (i, v) in filtered.into_iter().enumerate() {
            data[3 * i + c] = v;
        }
    }
    RgbImage::new(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct per-window median for cross-checking.
    fn brute_median(img: &RgbImage, window: usize) -> RgbImage {
        let r = window as isize / 2;
        let (w, h) = (img.width() as isize, img.height() as isize);
        RgbImage::from_fn(img.width(), img.height(), |x, y| {
            let mut out = [0u8; 3];
            for (c, slot) in out.iter_mut().enumerate() {
                let mut vals = Vec::new();
                for dy in -r..=r {
                    for dx in -r..=r {
                        let cx = (x as isize + dx).clamp(0, w - 1) as usize;
                        let cy = (y as isize + dy).clamp(0, h - 1) as usize;
                        vals.push(img.pixel(cx, cy)[c]);
                    }
                }
                vals.sort_unstable();
                *slot = vals[vals.len() / 2];
            }
            out
        })
    }

    #[test]
    fn rejects_bad_windows() {
        let img = RgbImage::filled(4, 4, [1, 2, 3]);
        assert!(median_filter(&img, 2).is_err());
        assert!(median_filter(&img, 1).is_err());
        assert!(median_filter(&img, 4).is_err());
        assert!(median_filter(&img, 3).is_ok());
    }

    #[test]
    fn constant_image_unchanged() {
        let img = RgbImage::filled(10, 8, [40, 90, 160]);
        assert_eq!(median_filter(&img, 5).unwrap(), img);
    }

    #[test]
    fn lone_bright_pixel_disappears() {
        let mut img = RgbImage::filled(9, 9, [10, 10, 10]);
        img.set_pixel(4, 4, [250, 250, 250]);
        let out = median_filter(&img, 3).unwrap();
        assert_eq!(out.pixel(4, 4), [10, 10, 10]);
    }

    #[test]
    fn matches_brute_force_on_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let img = RgbImage::from_fn(13, 11, |_, _| {
            [rng.random(), rng.random(), rng.random()]
        });
        for window in [3, 5, 7] {
            assert_eq!(
                median_filter(&img, window).unwrap(),
                brute_median(&img, window),
                "window {window}"
            );
        }
    }

    #[test]
    fn window_larger_than_image_is_fine() {
        let img = RgbImage::from_fn(4, 3, |x, y| [(x * 50 + y * 30) as u8; 3]);
        let out = median_filter(&img, 9).unwrap();
        assert_eq!(out, brute_median(&img, 9));
    }
}
