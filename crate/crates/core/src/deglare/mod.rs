//! Saturation-aware glare removal.
//!
//! The observed image is split into saturated pixels `S` and the rest `U`.
//! Stray light measured at the darkest pixels of `U` constrains the radiance
//! hidden in `S`; the glare of that estimate replaces `S` and the composite is
//! Wiener deconvolved with the calibrated kernel.

mod dark;
mod partition;
mod solver;
mod wiener;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsf::GsfKernel;
use crate::radiance::RadianceMap;

pub use dark::{estimate_dark_stray, DarkPixelSet};
pub use partition::{detect_saturation, dilate, SaturationPartition};
pub use solver::{default_lambda, estimate_saturated_radiance, ChannelSolve, SaturatedEstimate, SolverOptions};
pub use wiener::{wiener_deconvolve, wiener_plane, WienerConfig, DEFAULT_NSR};

/// What replaces the saturated pixels before deconvolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompositeMode {
    /// The estimated radiance `X_s`.
    Radiance,
    /// The estimate's own glare `(G * X_s)` restricted to `S`.
    Glared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeglareOptions {
    pub sat_threshold: f64,
    /// Known sensor maximum; the image maximum when absent.
    pub ceiling: Option<f64>,
    pub dark_sigma: f64,
    pub dark_patch: usize,
    pub dark_quantile: f64,
    /// Slack penalty; `1e-3` of the mean stray estimate when absent.
    pub lambda1: Option<f64>,
    pub nsr: f64,
    pub composite: CompositeMode,
    /// `solver.tol_fraction` should cover the noise amplitude of noisy input.
    pub solver: SolverOptions,
}

impl Default for DeglareOptions {
    fn default() -> Self {
        Self {
            sat_threshold: 0.98,
            ceiling: None,
            dark_sigma: 2.0,
            dark_patch: 7,
            dark_quantile: 0.05,
            lambda1: None,
            nsr: DEFAULT_NSR,
            composite: CompositeMode::Glared,
            solver: SolverOptions::default(),
        }
    }
}

/// Diagnostics of one run. Constraint fields are `None` when the saturated
/// region is empty and the step that defines them did not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeglareReport {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub threshold: f64,
    pub saturated: usize,
    pub unsaturated: usize,
    pub dark_pixels: usize,
    pub composite: CompositeMode,
    pub solves: Vec<ChannelSolve>,
    /// Estimated flux in `S` per channel.
    pub saturated_flux: Vec<f64>,
    /// `min over U of Y_u - G * X_s`.
    pub unsaturated_residual_min: Option<f64>,
    /// `min over D` of the output.
    pub dark_output_min: Option<f64>,
    /// Minimum of the deconvolved composite before clamping.
    pub deconvolved_raw_min: f64,
    /// Minimum of the returned image.
    pub deconvolved_min: f64,
    pub tolerance: f64,
}

impl DeglareReport {
    /// Whether every recorded constraint residual is within tolerance.
    pub fn constraints_satisfied(&self) -> bool {
        self.unsaturated_residual_min.is_none_or(|v| v >= -self.tolerance)
            && self.dark_output_min.is_none_or(|v| v >= 0.0)
            && self.deconvolved_min >= -self.tolerance
    }
}

/// Runs partition, dark-pixel selection, saturated-radiance estimation,
/// substitution and Wiener deconvolution. With no saturated pixels the
/// result is exactly [`wiener_deconvolve`].
pub fn deglare(y: &RadianceMap, kernel: &GsfKernel, opts: &DeglareOptions) -> Result<(RadianceMap, DeglareReport)> {
    kernel.check_image(y)?;
    let cfg = WienerConfig { nsr: opts.nsr };
    cfg.validate()?;
    let part = detect_saturation(y, opts.sat_threshold, opts.ceiling)?;
    let (w, h, ch) = (y.width(), y.height(), y.channels());
    let tolerance = opts.solver.tol_fraction * y.max();
    let mut report = DeglareReport {
        width: w,
        height: h,
        channels: ch,
        threshold: part.threshold(),
        saturated: part.saturated_count(),
        unsaturated: part.unsaturated_count(),
        dark_pixels: 0,
        composite: opts.composite,
        solves: Vec::new(),
        saturated_flux: vec![0.0; ch],
        unsaturated_residual_min: None,
        dark_output_min: None,
        deconvolved_raw_min: 0.0,
        deconvolved_min: 0.0,
        tolerance,
    };

    let planes = y.planes();
    let composite: Vec<Vec<f64>> = if part.saturated_count() == 0 {
        planes
    } else {
        let dark = estimate_dark_stray(y, &part, opts.dark_sigma, opts.dark_patch, opts.dark_quantile)?;
        let est = estimate_saturated_radiance(y, &part, &dark, kernel, opts.lambda1, &opts.solver)?;
        report.dark_pixels = dark.len();
        report.saturated_flux = est.flux();
        report.unsaturated_residual_min = est.channels.iter().map(|c| c.unsaturated_residual_min).reduce(f64::min);
        report.solves = est.channels.clone();
        let mut out = Vec::with_capacity(ch);
        for (plane, xs) in planes.into_iter().zip(&est.planes) {
            let fill = match opts.composite {
                CompositeMode::Radiance => xs.clone(),
                CompositeMode::Glared => kernel.convolve_plane(xs)?,
            };
            out.push((0..w * h).map(|i| if part.is_saturated(i) { fill[i] } else { plane[i] }).collect());
        }
        let deconvolved = wiener_from_planes(&out, kernel, &cfg, &mut report)?;
        report.dark_output_min = Some(
            dark.indices
                .iter()
                .flat_map(|&i| &deconvolved.data()[i * ch..(i + 1) * ch])
                .copied()
                .fold(f64::INFINITY, f64::min),
        );
        return Ok((deconvolved, report));
    };
    let deconvolved = wiener_from_planes(&composite, kernel, &cfg, &mut report)?;
    Ok((deconvolved, report))
}

fn wiener_from_planes(
    planes: &[Vec<f64>],
    kernel: &GsfKernel,
    cfg: &WienerConfig,
    report: &mut DeglareReport,
) -> Result<RadianceMap> {
    let raw = planes.iter().map(|p| wiener_plane(p, kernel, cfg)).collect::<Result<Vec<_>>>()?;
    report.deconvolved_raw_min = raw.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let out = RadianceMap::from_planes(report.width, report.height, &raw)?;
    report.deconvolved_min = out.data().iter().copied().fold(f64::INFINITY, f64::min);
    if !report.deconvolved_raw_min.is_finite() {
        return Err(Error::Degenerate("deconvolution produced non-finite values".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsf::{rasterize_kernel, simulate_glare, GsfParams};
    use crate::synth::{degrade, make_scene, SceneSpec};

    #[test]
    fn no_saturation_equals_wiener() {
        let mut spec = SceneSpec::empty(16, 16);
        spec.background = 0.5;
        spec.texture = 0.3;
        let x = make_scene(&spec).unwrap();
        let k = rasterize_kernel(&GsfParams::default(), 16, 16).unwrap();
        let y = simulate_glare(&x, &k).unwrap();
        let opts = DeglareOptions { ceiling: Some(10.0), ..Default::default() };
        let (out, rep) = deglare(&y, &k, &opts).unwrap();
        assert_eq!(rep.saturated, 0);
        let plain = wiener_deconvolve(&y, &k, &WienerConfig::default()).unwrap();
        assert_eq!(out, plain);
    }

    #[test]
    fn clipped_scene_reports_constraints() {
        let mut spec = SceneSpec::tunnel(48, 48, 11);
        spec.texture = 0.0;
        let x = make_scene(&spec).unwrap();
        let p = GsfParams::default().canonical(48, 48);
        let (y, _) = degrade(&x, &p, 5.0, 0.0, 0).unwrap();
        let k = rasterize_kernel(&p, 48, 48).unwrap();
        let opts = DeglareOptions { ceiling: Some(5.0), ..Default::default() };
        let (out, rep) = deglare(&y, &k, &opts).unwrap();
        assert!(rep.saturated > 0 && rep.dark_pixels > 0);
        assert!(rep.constraints_satisfied(), "{rep:?}");
        assert!(out.data().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let k = rasterize_kernel(&GsfParams::default(), 8, 8).unwrap();
        let y = RadianceMap::zeros(8, 9, 1).unwrap();
        assert!(matches!(deglare(&y, &k, &DeglareOptions::default()), Err(Error::Kernel(_))));
    }
}
