//! Linear filters for the texture features: Gaussian scale space, Sobel
//! magnitude, differences of Gaussians, Laplacian and Hessian-derived maps.
//!
//! Every filter replicates edge pixels outside the image.

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Scales at which the texture features are computed.
pub const SCALE_SIGMAS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// Normalized 1-D Gaussian with half-width `ceil(3 * sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0);
    let hw = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-hw..=hw)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

fn convolve_1d_rows(src: &GrayImage, kernel: &[f64]) -> GrayImage {
    let (w, h) = (src.width(), src.height());
    let hw = (kernel.len() / 2) as isize;
    let mut out = GrayImage::filled(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                acc += kv * src.get_clamped(x as isize + t as isize - hw, y as isize);
            }
            out.set(x, y, acc);
        }
    }
    out
}

fn convolve_1d_cols(src: &GrayImage, kernel: &[f64]) -> GrayImage {
    let (w, h) = (src.width(), src.height());
    let hw = (kernel.len() / 2) as isize;
    let mut out = GrayImage::filled(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                acc += kv * src.get_clamped(x as isize, y as isize + t as isize - hw);
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// Separable Gaussian blur with edge replication.
pub fn gaussian_blur(src: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")));
    }
    let k = gaussian_kernel(sigma);
    Ok(convolve_1d_cols(&convolve_1d_rows(src, &k), &k))
}

/// The gray plane blurred at each of [`SCALE_SIGMAS`].
pub struct ScaleSpace {
    planes: Vec<GrayImage>,
}

impl ScaleSpace {
    pub fn build(gray: &GrayImage) -> ScaleSpace {
        let planes = SCALE_SIGMAS
            .iter()
            .map(|&s| gaussian_blur(gray, s).expect("sigmas are positive"))
            .collect();
        ScaleSpace { planes }
    }

    pub fn sigmas(&self) -> &'static [f64] {
        &SCALE_SIGMAS
    }

    /// Blurred plane for scale index `i` (sigma = SCALE_SIGMAS[i]).
    pub fn plane(&self, i: usize) -> &GrayImage {
        &self.planes[i]
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }
}

/// Gradient magnitude from the 3x3 Sobel pair.
pub fn sobel_magnitude(src: &GrayImage) -> GrayImage {
    let (w, h) = (src.width(), src.height());
    GrayImage::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let p = |dx: isize, dy: isize| src.get_clamped(x + dx, y + dy);
        let gx = p(1, -1) + 2.0 * p(1, 0) + p(1, 1) - p(-1, -1) - 2.0 * p(-1, 0) - p(-1, 1);
        let gy = p(-1, 1) + 2.0 * p(0, 1) + p(1, 1) - p(-1, -1) - 2.0 * p(0, -1) - p(1, -1);
        (gx * gx + gy * gy).sqrt()
    })
}

/// Difference of two scale-space planes: `plane(i) - plane(j)`, `i > j`
/// (coarser minus finer).
pub fn dog(ss: &ScaleSpace, i: usize, j: usize) -> Result<GrayImage> {
    if i >= ss.len() || j >= i {
        return Err(Error::Parameter(format!(
            "dog wants scale indices i > j within 0..{}, got ({i}, {j})",
            ss.len()
        )));
    }
    let a = ss.plane(i);
    let b = ss.plane(j);
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x - y)
        .collect();
    GrayImage::new(a.width(), a.height(), data)
}

/// 4-neighbor Laplacian: `I(x-1,y) + I(x+1,y) + I(x,y-1) + I(x,y+1) - 4 I(x,y)`.
pub fn laplacian(src: &GrayImage) -> GrayImage {
    let (w, h) = (src.width(), src.height());
    GrayImage::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        src.get_clamped(x - 1, y) + src.get_clamped(x + 1, y) + src.get_clamped(x, y - 1)
            + src.get_clamped(x, y + 1)
            - 4.0 * src.get_clamped(x, y)
    })
}

/// The eight Hessian-derived maps, in feature order.
pub const HESSIAN_FEATURE_NAMES: [&str; 8] = [
    "trace", "det", "norm", "l1", "l2", "orient", "ldiff", "ldiff2",
];

/// Per-pixel Hessian analysis of one plane.
///
/// Second derivatives use central differences
/// (`Ixx = I(x-1) - 2 I(x) + I(x+1)`, `Ixy` the four-corner stencil /4).
/// Returns, in order: trace, determinant, Frobenius norm
/// `sqrt(Ixx^2 + 2 Ixy^2 + Iyy^2)`, the ordered eigenvalues
/// `l1 >= l2`, the orientation `atan2(2 Ixy, Ixx - Iyy) / 2` of the
/// first eigenvector, the eigenvalue difference and its square.
pub fn hessian_features(src: &GrayImage) -> [GrayImage; 8] {
    let (w, h) = (src.width(), src.height());
    let n = w * h;
    let mut out: [GrayImage; 8] = std::array::from_fn(|_| GrayImage::filled(w, h, 0.0));
    for i in 0..n {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        let p = |dx: isize, dy: isize| src.get_clamped(x + dx, y + dy);
        let ixx = p(-1, 0) - 2.0 * p(0, 0) + p(1, 0);
        let iyy = p(0, -1) - 2.0 * p(0, 0) + p(0, 1);
        let ixy = (p(1, 1) - p(1, -1) - p(-1, 1) + p(-1, -1)) / 4.0;
        let trace = ixx + iyy;
        let det = ixx * iyy - ixy * ixy;
        let norm = (ixx * ixx + 2.0 * ixy * ixy + iyy * iyy).sqrt();
        // Eigenvalues of [[ixx, ixy], [ixy, iyy]].
        let mid = trace / 2.0;
        let disc = ((ixx - iyy) / 2.0) * ((ixx - iyy) / 2.0) + ixy * ixy;
        let half = disc.sqrt();
        let l1 = mid + half;
        let l2 = mid - half;
        let orient = 0.5 * (2.0 * ixy).atan2(ixx - iyy);
        let vals = [trace, det, norm, l1, l2, orient, l1 - l2, (l1 - l2) * (l1 - l2)];
        for (k, v) in vals.into_iter().enumerate() {
            out[k].data_mut()[i as usize] = v;
        }
    }
    out
}
