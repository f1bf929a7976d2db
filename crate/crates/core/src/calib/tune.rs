//! Hold-out selection of the regularisation weight and scene weights.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{fit_joint_gsf, per_scene_residuals, CalibDataset, CalibScene, FitOptions, FitReport};
use crate::error::{Error, Result};
use crate::gsf::GsfParams;

pub const DEFAULT_LAMBDA_GRID: [f64; 4] = [0.0, 1e-4, 1e-2, 1.0];

/// Smallest residual used when inverting residuals into weights.
const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaPolicy {
    /// Every scene weighted 1.
    Uniform,
    /// Weights proportional to the inverse pilot-fit residual, max 1.
    InverseResidual,
}

impl FromStr for AlphaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(AlphaPolicy::Uniform),
            "inverse-residual" => Ok(AlphaPolicy::InverseResidual),
            _ => Err(Error::Argument(format!("unknown alpha policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub params: GsfParams,
    pub lambda: f64,
    pub alphas: Vec<f64>,
    pub holdout_error: f64,
    /// `(lambda, holdout error)` for every grid value, in grid order.
    pub sweep: Vec<(f64, f64)>,
    pub fit: FitReport,
}

/// Mean log-RMSE of `params` over `scenes`.
fn holdout_error(params: &GsfParams, scenes: &[CalibScene]) -> Result<f64> {
    let uniform: Vec<CalibScene> = scenes.iter().map(|s| s.with_alpha(1.0)).collect::<Result<_>>()?;
    let ds = CalibDataset::new(uniform, 0.0)?;
    let res = per_scene_residuals(params, &ds)?;
    Ok(res.iter().map(|r| r.residual).sum::<f64>() / res.len() as f64)
}

/// Fits on `train` for every `lambda` in the grid and keeps the fit with the
/// lowest mean hold-out log-RMSE; ties go to the earlier grid value.
pub fn validate_and_tune(
    train: &CalibDataset,
    holdout: &[CalibScene],
    lambda_grid: &[f64],
    policy: AlphaPolicy,
    init: &GsfParams,
    opts: &FitOptions,
) -> Result<TuneResult> {
    if holdout.is_empty() {
        return Err(Error::Validation("hold-out set is empty".into()));
    }
    if lambda_grid.is_empty() {
        return Err(Error::Argument("lambda grid is empty".into()));
    }
    let mut best: Option<TuneResult> = None;
    let mut sweep = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let uniform = vec![1.0; train.scenes().len()];
        let ds = train.with_lambda(lambda)?.with_alphas(&uniform)?;
        let mut fit = fit_joint_gsf(&ds, init, opts)?;
        let mut alphas = uniform;
        if policy == AlphaPolicy::InverseResidual {
            let inv: Vec<f64> = fit.per_scene_residual.iter().map(|r| 1.0 / r.residual.max(RESIDUAL_FLOOR)).collect();
            let top = inv.iter().copied().fold(0.0, f64::max);
            alphas = inv.iter().map(|v| v / top).collect();
            fit = fit_joint_gsf(&ds.with_alphas(&alphas)?, &fit.params, opts)?;
        }
        let err = holdout_error(&fit.params, holdout)?;
        sweep.push((lambda, err));
        if best.as_ref().is_none_or(|b| err < b.holdout_error) {
            best = Some(TuneResult { params: fit.params, lambda, alphas, holdout_error: err, sweep: Vec::new(), fit });
        }
    }
    let mut best = best.expect("grid is non-empty");
    best.sweep = sweep;
    Ok(best)
}
