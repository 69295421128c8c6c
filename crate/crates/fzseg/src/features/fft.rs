//! Minimal 2-D FFT plumbing on top of rustfft, used for fast large-kernel
//! convolution (the Gabor bank).

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Smallest 5-smooth number >= n (rustfft is fast for 2/3/5 factors).
pub(crate) fn good_fft_size(n: usize) -> usize {
    fn smooth(mut m: usize) -> bool {
        for f in [2, 3, 5] {
            while m % f == 0 {
                m /= f;
            }
        }
        m == 1
    }
    let mut m = n.max(1);
    while !smooth(m) {
        m += 1;
    }
    m
}

/// Forward/inverse 2-D FFT over a fixed `rows x cols` complex grid.
pub(crate) struct Fft2d {
    rows: usize,
    cols: usize,
    fwd_row: Arc<dyn Fft<f64>>,
    fwd_col: Arc<dyn Fft<f64>>,
    inv_row: Arc<dyn Fft<f64>>,
    inv_col: Arc<dyn Fft<f64>>,
}

fn transpose(src: &[Complex<f64>], rows: usize, cols: usize, dst: &mut Vec<Complex<f64>>) {
    dst.clear();
    dst.resize(rows * cols, Complex::default());
    for y in 0..rows {
        for x in 0..cols {
            dst[x * rows + y] = src[y * cols + x];
        }
    }
}

impl Fft2d {
    pub(crate) fn new(planner: &mut FftPlanner<f64>, rows: usize, cols: usize) -> Fft2d {
        Fft2d {
            rows,
            cols,
            fwd_row: planner.plan_fft_forward(cols),
            fwd_col: planner.plan_fft_forward(rows),
            inv_row: planner.plan_fft_inverse(cols),
            inv_col: planner.plan_fft_inverse(rows),
        }
    }

    /// Total number of samples; inverse transforms need dividing by this.
    pub(crate) fn norm(&self) -> f64 {
        (self.rows * self.cols) as f64
    }

    fn pass(
        &self,
        buf: &mut Vec<Complex<f64>>,
        scratch: &mut Vec<Complex<f64>>,
        row_fft: &Arc<dyn Fft<f64>>,
        col_fft: &Arc<dyn Fft<f64>>,
    ) {
        row_fft.process(buf);
        transpose(buf, self.rows, self.cols, scratch);
        col_fft.process(scratch);
        transpose(scratch, self.cols, self.rows, buf);
    }

    /// In-place forward 2-D FFT of a row-major buffer.
    pub(crate) fn forward(&self, buf: &mut Vec<Complex<f64>>, scratch: &mut Vec<Complex<f64>>) {
        debug_assert_eq!(buf.len(), self.rows * self.cols);
        self.pass(buf, scratch, &self.fwd_row, &self.fwd_col);
    }

    /// In-place inverse 2-D FFT (unnormalized; divide by [`Fft2d::norm`]).
    pub(crate) fn inverse(&self, buf: &mut Vec<Complex<f64>>, scratch: &mut Vec<Complex<f64>>) {
        debug_assert_eq!(buf.len(), self.rows * self.cols);
        self.pass(buf, scratch, &self.inv_row, &self.inv_col);
    }
}
