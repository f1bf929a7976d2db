//! Parametric glare-spread function, its rasterisation and Fourier-domain
//! glare simulation.
//!
//! The GSF is the radially symmetric model
//!
//! ```text
//! g(r) = p1 * delta(r) + p2 * exp(-p3 * r^p4)
//! ```
//!
//! with `r` in sensor pixels. It is rasterised on a grid twice the image size
//! (a bright pixel in one corner can reach the opposite corner) and normalised
//! to unit sum. Convolution runs on a zero-padded doubled canvas so light that
//! leaves the frame is absorbed instead of wrapping around.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, Fft2d};
use crate::radiance::RadianceMap;

/// The four GSF parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsfParams {
    /// Mass of the delta spike at the centre.
    pub p1: f64,
    /// Amplitude of the glare tail.
    pub p2: f64,
    /// Decay rate of the tail.
    pub p3: f64,
    /// Decay exponent of the tail.
    pub p4: f64,
}

impl Default for GsfParams {
    fn default() -> Self {
        Self { p1: 0.9, p2: 0.004, p3: 0.3, p4: 0.9 }
    }
}

impl GsfParams {
    pub fn new(p1: f64, p2: f64, p3: f64, p4: f64) -> Self {
        Self { p1, p2, p3, p4 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.as_array().iter().all(|v| v.is_finite())
            && self.p1 > 0.0
            && self.p2 >= 0.0
            && self.p3 > 0.0
            && self.p4 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("need finite p1 > 0, p2 >= 0, p3 > 0, p4 > 0; got {self:?}")))
        }
    }

    /// Sum of the un-normalised rasterised kernel for a `width x height` image.
    pub fn raw_mass(&self, width: usize, height: usize) -> f64 {
        self.p1 + self.p2 * tail_sum(self.p3, self.p4, width, height)
    }

    /// Rescales `(p1, p2)` so the rasterised kernel already sums to one for
    /// this image size, making `p1` the direct-transmission fraction.
    ///
    /// The rasterised kernel is invariant under a common scaling of `p1` and
    /// `p2`; the canonical form picks the unique representative.
    pub fn canonical(&self, width: usize, height: usize) -> Self {
        let mass = self.raw_mass(width, height);
        Self { p1: self.p1 / mass, p2: self.p2 / mass, ..*self }
    }
}

fn tail_sum(p3: f64, p4: f64, width: usize, height: usize) -> f64 {
    let (cx, cy) = (width as f64, height as f64);
    let mut sum = 0.0;
    for y in 0..2 * height {
        let dy = y as f64 - cy;
        for x in 0..2 * width {
            let dx = x as f64 - cx;
            let r = (dx * dx + dy * dy).sqrt();
            sum += (-p3 * r.powf(p4)).exp();
        }
    }
    sum
}

/// Continuous GSF value at radius `r` (pixels); at `r = 0` the delta spike is
/// reported as its mass, i.e. the result is `p1 + p2`.
pub fn eval_gsf(params: &GsfParams, r: f64) -> f64 {
    let tail = params.p2 * (-params.p3 * r.powf(params.p4)).exp();
    if r == 0.0 {
        params.p1 + tail
    } else {
        tail
    }
}

/// Rasterised, unit-sum GSF on a `2w x 2h` grid centred at `(w, h)`, with its
/// Fourier transform cached in FFT (origin-at-corner) layout.
#[derive(Debug, Clone)]
pub struct GsfKernel {
    base_width: usize,
    base_height: usize,
    params: GsfParams,
    spatial: Vec<f64>,
    spectrum: Vec<Complex64>,
    fft: Fft2d,
}

/// Builds the normalised kernel for a `width x height` image.
pub fn rasterize_kernel(params: &GsfParams, width: usize, height: usize) -> Result<GsfKernel> {
    params.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!("kernel base must be non-empty, got {width}x{height}")));
    }
    let (kw, kh) = (2 * width, 2 * height);
    let mut spatial = vec![0.0; kw * kh];
    for y in 0..kh {
        let dy = y as f64 - height as f64;
        for x in 0..kw {
            let dx = x as f64 - width as f64;
            spatial[y * kw + x] = if x == width && y == height {
                params.p1 + params.p2
            } else {
                params.p2 * (-params.p3 * (dx * dx + dy * dy).sqrt().powf(params.p4)).exp()
            };
        }
    }
    let sum: f64 = spatial.iter().sum();
    if !(sum.is_finite() && sum > 0.0) || spatial.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("kernel for {params:?} is not finite")));
    }
    for v in &mut spatial {
        *v /= sum;
    }

    let fft = Fft2d::new(kw, kh);
    // move the centre (w, h) to the origin
    let mut spectrum = vec![Complex64::new(0.0, 0.0); kw * kh];
    for y in 0..kh {
        let sy = (y + kh - height) % kh;
        for x in 0..kw {
            let sx = (x + kw - width) % kw;
            spectrum[sy * kw + sx].re = spatial[y * kw + x];
        }
    }
    fft.forward(&mut spectrum);
    Ok(GsfKernel { base_width: width, base_height: height, params: *params, spatial, spectrum, fft })
}

impl GsfKernel {
    pub fn base_width(&self) -> usize {
        self.base_width
    }

    pub fn base_height(&self) -> usize {
        self.base_height
    }

    pub fn params(&self) -> &GsfParams {
        &self.params
    }

    /// Kernel grid, `2w x 2h` row-major, centre at `(w, h)`.
    pub fn spatial(&self) -> &[f64] {
        &self.spatial
    }

    /// Value at the offset `(dx, dy)` from the centre; zero outside the grid.
    pub fn tap(&self, dx: isize, dy: isize) -> f64 {
        let x = self.base_width as isize + dx;
        let y = self.base_height as isize + dy;
        if x < 0 || y < 0 || x >= 2 * self.base_width as isize || y >= 2 * self.base_height as isize {
            return 0.0;
        }
        self.spatial[y as usize * 2 * self.base_width + x as usize]
    }

    /// Fourier transform of the kernel in FFT layout (centre at the origin).
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Inverse transform of the cached spectrum, in the same layout as
    /// [`GsfKernel::spatial`]; used to check spectrum consistency.
    pub fn spatial_from_spectrum(&self) -> Vec<f64> {
        let (kw, kh) = (2 * self.base_width, 2 * self.base_height);
        let mut buf = self.spectrum.clone();
        self.fft.inverse(&mut buf);
        let mut out = vec![0.0; kw * kh];
        for y in 0..kh {
            let sy = (y + kh - self.base_height) % kh;
            for x in 0..kw {
                let sx = (x + kw - self.base_width) % kw;
                out[y * kw + x] = buf[sy * kw + sx].re;
            }
        }
        out
    }

    pub(crate) fn check_plane(&self, len: usize) -> Result<()> {
        if len != self.base_width * self.base_height {
            return Err(Error::Kernel(format!(
                "plane of {len} pixels does not match kernel base {}x{}",
                self.base_width, self.base_height
            )));
        }
        Ok(())
    }

    pub(crate) fn check_image(&self, img: &RadianceMap) -> Result<()> {
        if img.width() != self.base_width || img.height() != self.base_height {
            return Err(Error::Kernel(format!(
                "image {}x{} does not match kernel base {}x{}",
                img.width(),
                img.height(),
                self.base_width,
                self.base_height
            )));
        }
        Ok(())
    }

    /// Forward transform of a zero-padded plane.
    pub(crate) fn transform_plane(&self, plane: &[f64]) -> Vec<Complex64> {
        let mut canvas = fourier::embed(plane, self.base_width, self.base_height);
        self.fft.forward(&mut canvas);
        canvas
    }

    /// Inverse-transforms `spectrum` and crops the image window.
    pub(crate) fn finish_plane(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.fft.inverse(&mut spectrum);
        fourier::crop(&spectrum, self.base_width, self.base_height)
    }

    /// `G * plane` with zero boundaries, unclamped.
    pub fn convolve_plane(&self, plane: &[f64]) -> Result<Vec<f64>> {
        self.check_plane(plane.len())?;
        let mut spec = self.transform_plane(plane);
        for (s, g) in spec.iter_mut().zip(&self.spectrum) {
            *s *= g;
        }
        Ok(self.finish_plane(spec))
    }

    /// Adjoint of [`GsfKernel::convolve_plane`] (correlation with the kernel).
    pub fn correlate_plane(&self, plane: &[f64]) -> Result<Vec<f64>> {
        self.check_plane(plane.len())?;
        let mut spec = self.transform_plane(plane);
        for (s, g) in spec.iter_mut().zip(&self.spectrum) {
            *s *= g.conj();
        }
        Ok(self.finish_plane(spec))
    }
}

/// A `w x h` plane embedded in the centre of a zero `2w x 2h` canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedImage {
    width: usize,
    height: usize,
    canvas: Vec<f64>,
}

impl PaddedImage {
    pub fn new(plane: &[f64], width: usize, height: usize) -> Result<Self> {
        if plane.len() != width * height || width == 0 {
            return Err(Error::Dimension(format!("plane of {} pixels does not match {width}x{height}", plane.len())));
        }
        let canvas = fourier::embed(plane, width, height).into_iter().map(|c| c.re).collect();
        Ok(Self { width, height, canvas })
    }

    pub fn original_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Canvas values, `2w x 2h` row-major.
    pub fn canvas(&self) -> &[f64] {
        &self.canvas
    }

    /// Whether canvas position `(x, y)` lies in the embedded window.
    pub fn in_window(&self, x: usize, y: usize) -> bool {
        let (ox, oy) = fourier::window_offset(self.width, self.height);
        x >= ox && x < ox + self.width && y >= oy && y < oy + self.height
    }
}

/// Glare simulation `l_s = l_in * g` evaluated in the Fourier domain on the
/// zero-padded canvas; channels are processed independently.
pub fn simulate_glare(l_in: &RadianceMap, kernel: &GsfKernel) -> Result<RadianceMap> {
    kernel.check_image(l_in)?;
    let planes = l_in.planes().iter().map(|p| kernel.convolve_plane(p)).collect::<Result<Vec<_>>>()?;
    RadianceMap::from_planes(l_in.width(), l_in.height(), &planes)
}
