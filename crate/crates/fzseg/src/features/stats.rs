//! Local order and moment statistics over disk neighborhoods.

use crate::error::{Error, Result};
use crate::imaging::{GrayImage, StructuringElement};

/// The five per-pixel statistics, computed over a disk window.
pub struct LocalStats {
    pub mean: GrayImage,
    pub variance: GrayImage,
    pub median: GrayImage,
    pub min: GrayImage,
    pub max: GrayImage,
}

/// Names of the statistics in output order.
pub const STAT_NAMES: [&str; 5] = ["mean", "var", "median", "min", "max"];

/// Computes mean, population variance, median, min and max of the values in
/// a disk of the given radius around each pixel.
///
/// Windows are clipped at image borders (no replication), so border windows
/// are genuinely smaller. The scan visits the window in a fixed order — dy
/// ascending, then dx ascending — and accumulates the sum and the sum of
/// squares in that order, making results reproducible operation-for-operation
/// (`variance = sumsq/n - mean^2`, never clamped). The median of an
/// even-sized window is the lower middle value.
pub fn local_statistics(plane: &GrayImage, radius: usize) -> Result<LocalStats> {
    if radius == 0 {
        return Err(Error::Parameter("statistics radius must be >= 1".into()));
    }
    let se = StructuringElement::disk(radius)?;
    let (w, h) = (plane.width(), plane.height());
    let r = radius as isize;
    let mut mean = GrayImage::filled(w, h, 0.0);
    let mut variance = GrayImage::filled(w, h, 0.0);
    let mut median = GrayImage::filled(w, h, 0.0);
    let mut min = GrayImage::filled(w, h, 0.0);
    let mut max = GrayImage::filled(w, h, 0.0);
    let mut window: Vec<f64> = Vec::with_capacity((2 * radius + 1) * (2 * radius + 1));
    for y in 0..h as isize {
        for x in 0..w as isize {
            window.clear();
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for dy in -r..=r {
                let sy = y + dy;
                if sy < 0 || sy >= h as isize {
                    continue;
                }
                let hw = se.half_width(dy as i32) as isize;
                for dx in -hw..=hw {
                    let sx = x + dx;
                    if sx < 0 || sx >= w as isize {
                        continue;
                    }
                    let v = plane.get(sx as usize, sy as usize);
                    sum += v;
                    sumsq += v * v;
                    if v < lo {
                        lo = v;
                    }
                    if v > hi {
                        hi = v;
                    }
                    window.push(v);
                }
            }
            let n = window.len() as f64;
            let m = sum / n;
            let i = (y as usize) * w + x as usize;
            mean.data_mut()[i] = m;
            variance.data_mut()[i] = sumsq / n - m * m;
            min.data_mut()[i] = lo;
            max.data_mut()[i] = hi;
            let mid = (window.len() - 1) / 2;
            let (_, med, _) = window.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
            median.data_mut()[i] = *med;
        }
    }
    Ok(LocalStats {
        mean,
        variance,
        median,
        min,
        max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_radius_zero() {
        let img = GrayImage::filled(4, 4, 1.0);
        assert!(local_statistics(&img, 0).is_err());
    }

    #[test]
    fn constant_image_statistics() {
        let img = GrayImage::filled(9, 7, 60.0);
        let s = local_statistics(&img, 2).unwrap();
        for i in 0..9 * 7 {
            assert_eq!(s.mean.data()[i], 60.0);
            assert_eq!(s.variance.data()[i], 0.0);
            assert_eq!(s.median.data()[i], 60.0);
            assert_eq!(s.min.data()[i], 60.0);
            assert_eq!(s.max.data()[i], 60.0);
        }
    }

    #[test]
    fn checkerboard_extremes() {
        let img = GrayImage::from_fn(8, 8, |x, y| if (x + y) % 2 == 0 { 0.0 } else { 255.0 });
        let s = local_statistics(&img, 1).unwrap();
        for y in 1..7 {
            for x in 1..7 {
                assert_eq!(s.min.get(x, y), 0.0);
                assert_eq!(s.max.get(x, y), 255.0);
                // The radius-1 disk is a 5-pixel cross whose 4 arms all have
                // the opposite color, so the median is the majority color.
                let other = 255.0 - img.get(x, y);
                assert_eq!(s.median.get(x, y), other);
            }
        }
    }

    #[test]
    fn median_of_even_window_is_lower_middle() {
        // Corner pixel at radius 1 sees a clipped 3-sample window; make a
        // 2-sample window via a 1x2 image: disk row dy=-1,1 clipped, dx in
        // {-1,0,1} clipped -> at (0,0) of a 2x1 image the window is {v0, v1}.
        let img = GrayImage::new(2, 1, vec![10.0, 20.0]).unwrap();
        let s = local_statistics(&img, 1).unwrap();
        assert_eq!(s.median.get(0, 0), 10.0); // lower of {10, 20}
        assert_eq!(s.median.get(1, 0), 10.0);
        assert_eq!(s.mean.get(0, 0), 15.0);
    }

    #[test]
    fn window_clipping_at_corner() {
        // At a corner with radius 1 the disk covers 3 pixels.
        let img = GrayImage::from_fn(4, 4, |x, y| (y * 4 + x) as f64);
        let s = local_statistics(&img, 1).unwrap();
        // Window at (0,0): {(0,0)=0, (1,0)=1, (0,1)=4}.
        assert_eq!(s.mean.get(0, 0), (0.0 + 1.0 + 4.0) / 3.0);
        assert_eq!(s.min.get(0, 0), 0.0);
        assert_eq!(s.max.get(0, 0), 4.0);
        assert_eq!(s.median.get(0, 0), 1.0);
    }

    #[test]
    fn variance_is_shift_sensitive_only_to_spread() {
        let img = GrayImage::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let s = local_statistics(&img, 1).unwrap();
        // Window at x=1: {1,2,3}: mean 2, population variance 2/3.
        assert!((s.mean.get(1, 0) - 2.0).abs() < 1e-15);
        assert!((s.variance.get(1, 0) - 2.0 / 3.0).abs() < 1e-12);
    }
}
