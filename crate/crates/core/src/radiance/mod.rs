//! Linear radiance images, CFA demosaicing, white balance and image I/O.
//!
//! [`RadianceMap`] is the pixel currency of the whole crate: every stage from
//! HDR merging to glare removal consumes and produces linear, non-negative
//! values stored row-major with interleaved channels.

mod demosaic;
mod io;

pub use demosaic::{demosaic_bilinear, CfaPattern, RawFrame};
pub use io::{load_image, load_pfm, load_png16, save_image, save_pfm, save_png16, PngSidecar};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear radiance image, row-major, channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceMap {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RadianceMap {
    /// Builds a map after checking dimensions, finiteness and non-negativity.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, channels)?;
        if data.len() != width * height * channels {
            return Err(Error::Dimension(format!(
                "expected {} samples for {width}x{height}x{channels}, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite value at sample {i}")));
        }
        if let Some(i) = data.iter().position(|v| *v < 0.0) {
            return Err(Error::InvalidData(format!("negative value {} at sample {i}", data[i])));
        }
        Ok(Self { width, height, channels, data })
    }

    /// Builds a map from arithmetic output: negatives (and `-0.0`) become `0.0`.
    ///
    /// Non-finite values are still rejected.
    pub fn from_clamped(width: usize, height: usize, channels: usize, mut data: Vec<f64>) -> Result<Self> {
        for v in &mut data {
            if *v <= 0.0 {
                *v = 0.0;
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::filled(width, height, channels, 0.0)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        check_dims(width, height, channels)?;
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Stacks single-channel planes into one interleaved map.
    pub fn from_planes(width: usize, height: usize, planes: &[Vec<f64>]) -> Result<Self> {
        let channels = planes.len();
        check_dims(width, height, channels)?;
        let n = width * height;
        if planes.iter().any(|p| p.len() != n) {
            return Err(Error::Dimension("plane length does not match width*height".into()));
        }
        let mut data = vec![0.0; n * channels];
        for (c, plane) in planes.iter().enumerate() {
            for (i, v) in plane.iter().enumerate() {
                data[i * channels + c] = *v;
            }
        }
        Self::from_clamped(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Copy of channel `c` as a `width * height` plane.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.channels).copied().collect()
    }

    pub fn planes(&self) -> Vec<Vec<f64>> {
        (0..self.channels).map(|c| self.plane(c)).collect()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Multiplies every sample by `factor` (must be finite and non-negative).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::Argument(format!("scale factor {factor} must be finite and >= 0")));
        }
        let data = self.data.iter().map(|v| v * factor).collect();
        Self::new(self.width, self.height, self.channels, data)
    }

    pub fn same_shape(&self, other: &RadianceMap) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Mean of channel `c` inside `rect`.
    pub fn region_mean(&self, rect: &Rect, c: usize) -> Result<f64> {
        rect.check_inside(self.width, self.height)?;
        let mut acc = 0.0;
        for y in rect.y..rect.y + rect.h {
            for x in rect.x..rect.x + rect.w {
                acc += self.get(x, y, c);
            }
        }
        Ok(acc / (rect.w * rect.h) as f64)
    }
}

fn check_dims(width: usize, height: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!("image must be non-empty, got {width}x{height}")));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::Dimension(format!("channels must be 1 or 3, got {channels}")));
    }
    Ok(())
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn check_inside(&self, width: usize, height: usize) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::Argument(format!("empty rectangle {self:?}")));
        }
        if self.x + self.w > width || self.y + self.h > height {
            return Err(Error::Argument(format!("rectangle {self:?} exceeds {width}x{height} image")));
        }
        Ok(())
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

/// Per-channel gains so the patch means of R, G and B all equal the green mean.
pub fn white_balance(img: &RadianceMap, white_patch: &Rect) -> Result<RadianceMap> {
    if img.channels() != 3 {
        return Err(Error::Dimension(format!("white balance needs 3 channels, got {}", img.channels())));
    }
    let means = (0..3).map(|c| img.region_mean(white_patch, c)).collect::<Result<Vec<_>>>()?;
    for (channel, &mean) in means.iter().enumerate() {
        if !(mean > 0.0) {
            return Err(Error::DegeneratePatch { channel, mean });
        }
    }
    let gains = [means[1] / means[0], 1.0, means[1] / means[2]];
    let data =
        img.data().chunks_exact(3).flat_map(|px| [px[0] * gains[0], px[1] * gains[1], px[2] * gains[2]]).collect();
    RadianceMap::from_clamped(img.width(), img.height(), 3, data)
}
