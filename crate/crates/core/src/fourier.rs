//! 2-D FFT on the doubled canvas used for glare simulation and deconvolution.
//!
//! An image of `w x h` is embedded at offset `(w/2, h/2)` in a zero canvas of
//! `2w x 2h`. Any two image pixels are less than `w` (resp. `h`) apart, so
//! circular convolution on the canvas equals linear convolution with zero
//! boundaries once the centred window is cropped back out.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plans for one canvas size.
#[derive(Clone)]
pub struct Fft2d {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2d").field("width", &self.width).field("height", &self.height).finish()
    }
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.apply(buf, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform including the `1/N` normalisation.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.apply(buf, &self.row_inv, &self.col_inv);
        let scale = 1.0 / self.len() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn apply(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(buf.len(), self.len());
        rows.process(buf);
        let mut t = transpose(buf, self.width, self.height);
        cols.process(&mut t);
        let back = transpose(&t, self.height, self.width);
        buf.copy_from_slice(&back);
    }
}

fn transpose(src: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut dst = vec![Complex64::new(0.0, 0.0); src.len()];
    for y in 0..height {
        for x in 0..width {
            dst[x * height + y] = src[y * width + x];
        }
    }
    dst
}

/// Offset of the image window inside its doubled canvas.
#[inline]
pub fn window_offset(width: usize, height: usize) -> (usize, usize) {
    (width / 2, height / 2)
}

/// Zero canvas of `2w x 2h` with `plane` embedded in the centred window.
pub fn embed(plane: &[f64], width: usize, height: usize) -> Vec<Complex64> {
    let cw = 2 * width;
    let (ox, oy) = window_offset(width, height);
    let mut canvas = vec![Complex64::new(0.0, 0.0); cw * 2 * height];
    for y in 0..height {
        for x in 0..width {
            canvas[(y + oy) * cw + x + ox].re = plane[y * width + x];
        }
    }
    canvas
}

/// Real part of the centred window of a canvas.
pub fn crop(canvas: &[Complex64], width: usize, height: usize) -> Vec<f64> {
    let cw = 2 * width;
    let (ox, oy) = window_offset(width, height);
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            out.push(canvas[(y + oy) * cw + x + ox].re);
        }
    }
    out
}
