//! Dark-pixel selection and stray-light estimation.

use serde::Serialize;

use super::partition::SaturationPartition;
use crate::error::{Error, Result};
use crate::filter::gaussian_blur;
use crate::radiance::RadianceMap;

/// Dark pixels `D ⊆ U` and the stray light observed there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarkPixelSet {
    /// Pixel indices, row-major, sorted ascending.
    #[serde(skip)]
    pub indices: Vec<usize>,
    /// Stray estimate per channel, aligned with `indices`.
    #[serde(skip)]
    pub stray_estimate: Vec<Vec<f64>>,
    pub blur_sigma: f64,
}

impl DarkPixelSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Separable minimum filter of radius `r` with clipped borders.
fn min_filter(plane: &[f64], width: usize, height: usize, r: usize) -> Vec<f64> {
    let mut tmp = vec![f64::INFINITY; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(width - 1);
            tmp[y * width + x] = plane[y * width + lo..=y * width + hi].iter().copied().fold(f64::INFINITY, f64::min);
        }
    }
    let mut out = vec![f64::INFINITY; plane.len()];
    for y in 0..height {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(height - 1);
        for x in 0..width {
            out[y * width + x] = (lo..=hi).map(|yy| tmp[yy * width + x]).fold(f64::INFINITY, f64::min);
        }
    }
    out
}

/// Dark-channel selection on the blurred image.
///
/// The dark channel of a pixel in `U` is the minimum over channels and over
/// the `patch x patch` window restricted to `U`. `D` holds the darkest
/// `ceil(quantile * |U|)` pixels (ties by index); the stray estimate is the
/// blurred value there.
pub fn estimate_dark_stray(
    y: &RadianceMap,
    part: &SaturationPartition,
    sigma: f64,
    patch: usize,
    quantile: f64,
) -> Result<DarkPixelSet> {
    if !(sigma > 0.0) || patch == 0 || patch.is_multiple_of(2) || !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::Argument(format!(
            "dark-pixel options need sigma > 0, odd patch >= 1, quantile in (0, 1]; got {sigma}, {patch}, {quantile}"
        )));
    }
    let (w, h) = (y.width(), y.height());
    if part.width() != w || part.height() != h {
        return Err(Error::Dimension("partition does not match the image".into()));
    }
    if part.unsaturated_count() == 0 {
        return Err(Error::Degenerate("no unsaturated pixels".into()));
    }
    let blurred: Vec<Vec<f64>> = y.planes().iter().map(|p| gaussian_blur(p, w, h, sigma)).collect();
    let channel_min: Vec<f64> = (0..w * h)
        .map(|i| {
            if part.is_saturated(i) {
                f64::INFINITY
            } else {
                blurred.iter().map(|b| b[i]).fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    let dark = min_filter(&channel_min, w, h, patch / 2);
    let mut order: Vec<usize> = (0..w * h).filter(|&i| !part.is_saturated(i)).collect();
    order.sort_by(|&a, &b| dark[a].total_cmp(&dark[b]).then(a.cmp(&b)));
    let n = ((quantile * order.len() as f64).ceil() as usize).clamp(1, order.len());
    let mut indices = order[..n].to_vec();
    indices.sort_unstable();
    let stray_estimate = blurred.iter().map(|b| indices.iter().map(|&i| b[i].max(0.0)).collect()).collect();
    Ok(DarkPixelSet { indices, stray_estimate, blur_sigma: sigma })
}
