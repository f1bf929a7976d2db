//! Wiener deconvolution with a known kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsf::GsfKernel;
use crate::radiance::RadianceMap;

/// Default noise-to-signal ratio for measured images.
pub const DEFAULT_NSR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerConfig {
    pub nsr: f64,
}

impl Default for WienerConfig {
    fn default() -> Self {
        Self { nsr: DEFAULT_NSR }
    }
}

impl WienerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nsr >= 0.0) {
            return Err(Error::Argument(format!("nsr must be >= 0, got {}", self.nsr)));
        }
        Ok(())
    }
}

/// Unclamped deconvolution of one plane:
/// `conj(G) * Y / (|G|^2 + nsr)` on the padded canvas, cropped.
pub fn wiener_plane(plane: &[f64], kernel: &GsfKernel, cfg: &WienerConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    kernel.check_plane(plane.len())?;
    let mut spec = kernel.transform_plane(plane);
    for (s, g) in spec.iter_mut().zip(kernel.spectrum()) {
        let power = g.norm_sqr();
        let den = power + cfg.nsr;
        *s = if den > 0.0 && den.is_finite() { *s * g.conj() / den } else { 0.0.into() };
    }
    Ok(kernel.finish_plane(spec))
}

/// Per-channel Wiener deconvolution, clamped to `>= 0`.
pub fn wiener_deconvolve(y: &RadianceMap, kernel: &GsfKernel, cfg: &WienerConfig) -> Result<RadianceMap> {
    kernel.check_image(y)?;
    let planes = y.planes().iter().map(|p| wiener_plane(p, kernel, cfg)).collect::<Result<Vec<_>>>()?;
    RadianceMap::from_planes(y.width(), y.height(), &planes)
}
