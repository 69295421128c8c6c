//! Gabor filter bank, evaluated by FFT convolution.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::features::fft::{good_fft_size, Fft2d};
use crate::imaging::GrayImage;

/// Parameters of one Gabor filter (cosine carrier under a Gaussian).
#[derive(Debug, Clone, Copy)]
pub struct GaborParams {
    /// Carrier wavelength in pixels (> 0).
    pub wavelength: f64,
    /// Carrier orientation in radians.
    pub orientation: f64,
    /// Carrier phase offset in radians.
    pub phase: f64,
    /// Gaussian envelope sigma in pixels (> 0).
    pub sigma: f64,
    /// Envelope aspect ratio gamma (> 0; 1 = isotropic).
    pub aspect: f64,
}

impl GaborParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !(self.sigma > 0.0) || !(self.aspect > 0.0) {
            return Err(Error::Parameter(format!(
                "gabor parameters must be positive: wavelength {}, sigma {}, aspect {}",
                self.wavelength, self.sigma, self.aspect
            )));
        }
        Ok(())
    }

    /// Kernel half-width: `ceil(3 * sigma)`.
    pub fn half_width(&self) -> usize {
        (3.0 * self.sigma).ceil() as usize
    }

    /// Evaluates the real part of the kernel at offset `(dx, dy)`.
    ///
    /// `x' = dx cos(theta) + dy sin(theta)`, `y' = -dx sin(theta) + dy cos(theta)`,
    /// `g = exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) * cos(2 pi x' / lambda + psi)`.
    pub fn eval(&self, dx: f64, dy: f64) -> f64 {
        let (s, c) = self.orientation.sin_cos();
        let xr = dx * c + dy * s;
        let yr = -dx * s + dy * c;
        let g2 = self.aspect * self.aspect;
        let env = (-(xr * xr + g2 * yr * yr) / (2.0 * self.sigma * self.sigma)).exp();
        env * (2.0 * std::f64::consts::PI * xr / self.wavelength + self.phase).cos()
    }
}

/// The default 44-filter bank: orientations {0, 45, 90, 135} degrees crossed
/// with wavelengths `2^(k/2)` for k = 3..=13, sigma = 0.56 * wavelength,
/// aspect 0.5, phase 0. Orientation-major order (all wavelengths for 0
/// degrees, then 45, ...).
pub fn default_gabor_bank() -> Vec<GaborParams> {
    let mut bank = Vec::with_capacity(44);
    for t in 0..4 {
        let orientation = t as f64 * std::f64::consts::FRAC_PI_4;
        for k in 3..=13 {
            let wavelength = 2f64.powf(k as f64 / 2.0);
            bank.push(GaborParams {
                wavelength,
                orientation,
                phase: 0.0,
                sigma: 0.56 * wavelength,
                aspect: 0.5,
            });
        }
    }
    bank
}

/// Orientation/wavelength grid of [`default_gabor_bank`], for feature naming.
pub(crate) fn default_bank_grid() -> Vec<(u32, f64)> {
    let mut grid = Vec::with_capacity(44);
    for t in 0..4 {
        for k in 3..=13 {
            grid.push((t * 45, 2f64.powf(k as f64 / 2.0)));
        }
    }
    grid
}

/// Convolves `src` with every filter in `bank`, returning one response plane
/// per filter (same order).
///
/// This is exact linear convolution with replicated edges: the image is
/// padded by the largest kernel half-width, both operands go through one
/// shared FFT grid, and two real kernels ride one complex transform (kernel A
/// in the real lane, kernel B in the imaginary lane; linearity splits the
/// responses back apart).
pub fn gabor_bank(src: &GrayImage, bank: &[GaborParams]) -> Result<Vec<GrayImage>> {
    if bank.is_empty() {
        return Err(Error::Parameter("gabor bank is empty".into()));
    }
    for p in bank {
        p.validate()?;
    }
    let (w, h) = (src.width(), src.height());
    let m = bank.iter().map(|p| p.half_width()).max().unwrap();
    let rows = good_fft_size(h + 2 * m);
    let cols = good_fft_size(w + 2 * m);
    let mut planner = FftPlanner::new();
    let fft = Fft2d::new(&mut planner, rows, cols);
    let mut scratch: Vec<Complex<f64>> = Vec::new();

    // Pad with edge replication into the FFT grid. The replicated margin is
    // m wide; whatever the circular wrap-around does beyond it cannot reach
    // any output pixel (kernels have support <= m).
    let mut image_spec = vec![Complex::default(); rows * cols];
    for gy in 0..rows.min(h + 2 * m) {
        for gx in 0..cols.min(w + 2 * m) {
            let sx = (gx as isize - m as isize).clamp(0, w as isize - 1) as usize;
            let sy = (gy as isize - m as isize).clamp(0, h as isize - 1) as usize;
            image_spec[gy * cols + gx] = Complex::new(src.get(sx, sy), 0.0);
        }
    }
    fft.forward(&mut image_spec, &mut scratch);

    let mut out: Vec<GrayImage> = Vec::with_capacity(bank.len());
    let mut kernel = vec![Complex::default(); rows * cols];
    for pair in bank.chunks(2) {
        kernel.iter_mut().for_each(|v| *v = Complex::default());
        // Wrap each kernel around the origin of the grid; lane 0 real,
        // lane 1 imaginary.
        for (lane, p) in pair.iter().enumerate() {
            let hw = p.half_width() as isize;
            for dy in -hw..=hw {
                let gy = dy.rem_euclid(rows as isize) as usize;
                for dx in -hw..=hw {
                    let gx = dx.rem_euclid(cols as isize) as usize;
                    let v = p.eval(dx as f64, dy as f64);
                    if lane == 0 {
                        kernel[gy * cols + gx].re += v;
                    } else {
                        kernel[gy * cols + gx].im += v;
                    }
                }
            }
        }
        fft.forward(&mut kernel, &mut scratch);
        for (k, s) in kernel.iter_mut().zip(&image_spec) {
            *k *= s;
        }
        fft.inverse(&mut kernel, &mut scratch);
        let norm = fft.norm();
        for lane in 0..pair.len() {
            let mut plane = GrayImage::filled(w, h, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let v = kernel[(y + m) * cols + (x + m)];
                    plane.set(x, y, if lane == 0 { v.re } else { v.im } / norm);
                }
            }
            out.push(plane);
        }
    }
    Ok(out)
}
