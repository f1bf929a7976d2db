//! Saturated/unsaturated image partition.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::radiance::RadianceMap;

/// Pixel mask `S` (true = saturated) and its complement `U`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationPartition {
    width: usize,
    height: usize,
    #[serde(skip)]
    mask: Vec<bool>,
    threshold: f64,
    saturated: usize,
}

impl SaturationPartition {
    /// Builds a partition from an explicit mask.
    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>, threshold: f64) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::Dimension(format!("mask of {} pixels for {width}x{height}", mask.len())));
        }
        let saturated = mask.iter().filter(|m| **m).count();
        Ok(Self { width, height, mask, threshold, saturated })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_saturated(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `|S|`.
    pub fn saturated_count(&self) -> usize {
        self.saturated
    }

    /// `|U|`.
    pub fn unsaturated_count(&self) -> usize {
        self.mask.len() - self.saturated
    }
}

/// 8-neighbour dilation by one pixel.
pub fn dilate(mask: &[bool], width: usize, height: usize) -> Vec<bool> {
    let mut out = mask.to_vec();
    for y in 0..height {
        for x in 0..width {
            if !mask[y * width + x] {
                continue;
            }
            for ny in y.saturating_sub(1)..=(y + 1).min(height - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(width - 1) {
                    out[ny * width + nx] = true;
                }
            }
        }
    }
    out
}

/// Marks pixels where any channel reaches `threshold_frac * ceiling`, then
/// dilates by one pixel. `ceiling` defaults to the image maximum.
pub fn detect_saturation(y: &RadianceMap, threshold_frac: f64, ceiling: Option<f64>) -> Result<SaturationPartition> {
    if !(threshold_frac > 0.0 && threshold_frac <= 1.0) {
        return Err(Error::Argument(format!("threshold fraction {threshold_frac} outside (0, 1]")));
    }
    let ceiling = ceiling.unwrap_or_else(|| y.max());
    if !(ceiling > 0.0 && ceiling.is_finite()) {
        return Err(Error::Degenerate(format!("saturation ceiling {ceiling} must be positive")));
    }
    let threshold = threshold_frac * ceiling;
    let (w, h, ch) = (y.width(), y.height(), y.channels());
    let raw: Vec<bool> = (0..w * h).map(|i| y.data()[i * ch..(i + 1) * ch].iter().any(|&v| v >= threshold)).collect();
    let part = SaturationPartition::from_mask(w, h, dilate(&raw, w, h), threshold)?;
    debug_assert_eq!(part.saturated_count() + part.unsaturated_count(), w * h);
    if part.unsaturated_count() == 0 {
        return Err(Error::Degenerate("every pixel is saturated".into()));
    }
    Ok(part)
}
