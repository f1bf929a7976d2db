use serde::{Deserialize, Serialize};

use super::RadianceMap;
use crate::error::{Error, Result};

/// 2x2 Bayer tile layouts, named by the top-left row then second row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CfaPattern {
    Rggb,
    Bggr,
    Grbg,
    Gbrg,
}

impl CfaPattern {
    /// Channel index (0 = R, 1 = G, 2 = B) sampled at `(x, y)`.
    pub fn channel_at(self, x: usize, y: usize) -> usize {
        let tile = match self {
            CfaPattern::Rggb => [[0, 1], [1, 2]],
            CfaPattern::Bggr => [[2, 1], [1, 0]],
            CfaPattern::Grbg => [[1, 0], [2, 1]],
            CfaPattern::Gbrg => [[1, 2], [0, 1]],
        };
        tile[y & 1][x & 1]
    }
}

impl std::str::FromStr for CfaPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RGGB" => Ok(CfaPattern::Rggb),
            "BGGR" => Ok(CfaPattern::Bggr),
            "GRBG" => Ok(CfaPattern::Grbg),
            "GBRG" => Ok(CfaPattern::Gbrg),
            other => Err(Error::Argument(format!("unknown CFA pattern `{other}`"))),
        }
    }
}

/// Undemosaiced sensor frame with integer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    width: usize,
    height: usize,
    bit_depth: u32,
    cfa: CfaPattern,
    samples: Vec<u16>,
}

impl RawFrame {
    pub fn new(width: usize, height: usize, bit_depth: u32, cfa: CfaPattern, samples: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "raw frame must have even, non-zero dimensions, got {width}x{height}"
            )));
        }
        if !(8..=16).contains(&bit_depth) {
            return Err(Error::Argument(format!("bit depth {bit_depth} outside 8..=16")));
        }
        if samples.len() != width * height {
            return Err(Error::Dimension(format!("expected {} samples, got {}", width * height, samples.len())));
        }
        let max = ((1u32 << bit_depth) - 1) as u16;
        if let Some(i) = samples.iter().position(|&s| s > max) {
            return Err(Error::InvalidData(format!(
                "sample {} at index {i} exceeds {bit_depth}-bit range",
                samples[i]
            )));
        }
        Ok(Self { width, height, bit_depth, cfa, samples })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u32 {
        self.bit_depth
    }

    pub fn cfa(&self) -> CfaPattern {
        self.cfa
    }

    pub fn samples(&self) -> &[u16] {
        &self.samples
    }
}

/// Bilinear demosaic: each missing channel is the mean of the same-colour
/// samples in the 3x3 neighbourhood (in-bounds only); measured samples pass
/// through unchanged.
pub fn demosaic_bilinear(raw: &RawFrame) -> Result<RadianceMap> {
    let (w, h) = (raw.width, raw.height);
    let mut data = vec![0.0; w * h * 3];
    for y in 0..h {
        for x in 0..w {
            let own = raw.cfa.channel_at(x, y);
            let mut sum = [0.0f64; 3];
            let mut count = [0u32; 3];
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let c = raw.cfa.channel_at(nx, ny);
                    sum[c] += raw.samples[ny * w + nx] as f64;
                    count[c] += 1;
                }
            }
            let out = &mut data[(y * w + x) * 3..(y * w + x) * 3 + 3];
            for c in 0..3 {
                out[c] = if c == own {
                    raw.samples[y * w + x] as f64
                } else {
                    // every 3x3 window of a Bayer mosaic with even dimensions
                    // holds at least one sample of each colour
                    sum[c] / count[c] as f64
                };
            }
        }
    }
    RadianceMap::new(w, h, 3, data)
}
