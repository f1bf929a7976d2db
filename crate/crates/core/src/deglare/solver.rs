//! Radiance estimation inside the saturated region.
//!
//! For each channel the solver minimises, over `X_s >= Y` on `S` and a slack
//! `z >= 0` standing for the glare of unsaturated content at the dark pixels,
//!
//! ```text
//! 0.5 * |s_D - (G * X_s)(D) - z|^2 + lambda * |z|_1
//! ```
//!
//! where `s_D` is the stray-light estimate. The slack has the closed form
//! `z = max(0, r - lambda)` for residual `r`, which leaves a Huber-type
//! function of `X_s` alone; it is minimised by projected gradient with a
//! Barzilai–Borwein step and monotone backtracking. With `lambda = 0` the
//! slack is fixed at zero, giving non-negative least squares.
//!
//! After every step `X_s` is pulled toward its lower bound just far enough
//! that its glare nowhere exceeds the observed unsaturated image:
//! `Y_u - (G * X_s)(U) >= -tol`.

use serde::{Deserialize, Serialize};

use super::dark::DarkPixelSet;
use super::partition::SaturationPartition;
use crate::error::{Error, Result};
use crate::gsf::GsfKernel;
use crate::radiance::RadianceMap;

/// Consecutive objective increases tolerated before giving up.
const MAX_INCREASES: usize = 10;
/// Step halvings per line search.
const MAX_BACKTRACKS: usize = 60;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop when the relative objective decrease falls below this.
    pub rel_tol: f64,
    /// Constraint tolerance as a fraction of the image maximum.
    pub tol_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 500, rel_tol: 1e-7, tol_fraction: 1e-6 }
    }
}

/// Outcome of one channel's solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSolve {
    pub lambda1: f64,
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
    /// Saturated pixels left at their lower bound.
    pub lower_bound_active: usize,
    /// `min over U of Y_u - (G * X_s)` at exit.
    pub unsaturated_residual_min: f64,
}

/// Full-size planes holding `X_s` on `S` and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturatedEstimate {
    pub planes: Vec<Vec<f64>>,
    pub channels: Vec<ChannelSolve>,
    pub tolerance: f64,
}

impl SaturatedEstimate {
    /// Total estimated flux in `S` per channel.
    pub fn flux(&self) -> Vec<f64> {
        self.planes.iter().map(|p| p.iter().sum()).collect()
    }
}

/// Default `lambda`: `1e-3` times the mean stray estimate of the channel.
pub fn default_lambda(dark: &DarkPixelSet, channel: usize) -> f64 {
    let s = &dark.stray_estimate[channel];
    1e-3 * s.iter().sum::<f64>() / s.len().max(1) as f64
}

struct Problem<'a> {
    kernel: &'a GsfKernel,
    n: usize,
    s_idx: &'a [usize],
    d_idx: &'a [usize],
    u_idx: &'a [usize],
    target: &'a [f64],
    y: Vec<f64>,
    base: Vec<f64>,
    lambda: f64,
    tol: f64,
}

impl Problem<'_> {
    fn scatter(&self, v: &[f64]) -> Vec<f64> {
        let mut plane = vec![0.0; self.n];
        for (&i, &x) in self.s_idx.iter().zip(v) {
            plane[i] = x;
        }
        plane
    }

    fn glare(&self, d: &[f64]) -> Result<Vec<f64>> {
        self.kernel.convolve_plane(&self.scatter(d))
    }

    fn residuals(&self, conv: &[f64]) -> Vec<f64> {
        self.d_idx.iter().zip(self.target).map(|(&i, s)| s - self.base[i] - conv[i]).collect()
    }

    fn objective(&self, conv: &[f64]) -> f64 {
        let lam = self.lambda;
        self.residuals(conv)
            .iter()
            .map(|&r| if lam > 0.0 && r > lam { lam * r - 0.5 * lam * lam } else { 0.5 * r * r })
            .sum()
    }

    fn gradient(&self, conv: &[f64]) -> Result<Vec<f64>> {
        let mut plane = vec![0.0; self.n];
        for (&i, r) in self.d_idx.iter().zip(self.residuals(conv)) {
            plane[i] = -(if self.lambda > 0.0 { r.min(self.lambda) } else { r });
        }
        let back = self.kernel.correlate_plane(&plane)?;
        Ok(self.s_idx.iter().map(|&i| back[i]).collect())
    }

    /// Largest `theta` in `[0, 1]` keeping `Y_u - base - theta * conv >= -tol`.
    fn feasible_scale(&self, conv: &[f64]) -> f64 {
        let mut theta: f64 = 1.0;
        for &i in self.u_idx {
            if conv[i] > 0.0 {
                // half the tolerance absorbs rounding in the rescaled glare
                let room = (self.y[i] - self.base[i] + 0.5 * self.tol).max(0.0);
                theta = theta.min(room / conv[i]);
            }
        }
        theta
    }

    fn min_slack(&self, conv: &[f64]) -> f64 {
        self.u_idx.iter().map(|&i| self.y[i] - self.base[i] - conv[i]).fold(f64::INFINITY, f64::min)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Estimates `X_s` per channel; see the module documentation.
///
/// `lambda1` of `None` selects [`default_lambda`] per channel.
pub fn estimate_saturated_radiance(
    y: &RadianceMap,
    part: &SaturationPartition,
    dark: &DarkPixelSet,
    kernel: &GsfKernel,
    lambda1: Option<f64>,
    opts: &SolverOptions,
) -> Result<SaturatedEstimate> {
    kernel.check_image(y)?;
    if part.width() != y.width() || part.height() != y.height() {
        return Err(Error::Dimension("partition does not match the image".into()));
    }
    if part.saturated_count() == 0 {
        return Err(Error::Argument("no saturated pixels to estimate".into()));
    }
    if dark.is_empty() {
        return Err(Error::Argument("no dark pixels".into()));
    }
    if dark.indices.iter().any(|&i| part.is_saturated(i)) {
        return Err(Error::Argument("dark pixels must lie outside the saturated region".into()));
    }
    if let Some(l) = lambda1 {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::Argument(format!("lambda1 must be finite and >= 0, got {l}")));
        }
    }
    let n = y.pixel_count();
    let s_idx: Vec<usize> = (0..n).filter(|&i| part.is_saturated(i)).collect();
    let u_idx: Vec<usize> = (0..n).filter(|&i| !part.is_saturated(i)).collect();
    let tol = opts.tol_fraction * y.max();

    let mut planes = Vec::with_capacity(y.channels());
    let mut reports = Vec::with_capacity(y.channels());
    for (c, plane) in y.planes().into_iter().enumerate() {
        let lb: Vec<f64> = s_idx.iter().map(|&i| plane[i]).collect();
        let mut lb_plane = vec![0.0; n];
        for (&i, &v) in s_idx.iter().zip(&lb) {
            lb_plane[i] = v;
        }
        let base = kernel.convolve_plane(&lb_plane)?;
        let problem = Problem {
            kernel,
            n,
            s_idx: &s_idx,
            d_idx: &dark.indices,
            u_idx: &u_idx,
            target: &dark.stray_estimate[c],
            y: plane,
            base,
            lambda: lambda1.unwrap_or_else(|| default_lambda(dark, c)),
            tol,
        };
        let (d, report) = solve(&problem, opts)?;
        let mut out = vec![0.0; n];
        for ((&i, l), dv) in s_idx.iter().zip(&lb).zip(&d) {
            out[i] = l + dv;
        }
        planes.push(out);
        reports.push(report);
    }
    Ok(SaturatedEstimate { planes, channels: reports, tolerance: tol })
}

/// Projected gradient on the excess `d = X_s - lb >= 0`.
fn solve(p: &Problem<'_>, opts: &SolverOptions) -> Result<(Vec<f64>, ChannelSolve)> {
    let m = p.s_idx.len();
    let mut d = vec![0.0; m];
    let mut conv = vec![0.0; p.n];
    let mut f = p.objective(&conv);
    let mut g = p.gradient(&conv)?;

    // exact minimiser of the quadratic part along -g as the first step
    let gg = dot(&g, &g);
    let ag = p.glare(&g)?;
    let agd: f64 = p.d_idx.iter().map(|&i| ag[i] * ag[i]).sum();
    let mut alpha = if agd > 0.0 { gg / agd } else { 1.0 };

    let mut iterations = 0;
    let mut converged = false;
    let mut increases = 0;
    while iterations < opts.max_iterations {
        if f == 0.0 || g.iter().all(|v| *v == 0.0) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = d.iter().zip(&g).map(|(x, gv)| (x - step * gv).max(0.0)).collect();
            let mut tconv = p.glare(&trial)?;
            let theta = p.feasible_scale(&tconv);
            if theta < 1.0 {
                trial.iter_mut().for_each(|v| *v *= theta);
                tconv.iter_mut().for_each(|v| *v *= theta);
            }
            let ft = p.objective(&tconv);
            if !ft.is_finite() {
                return Err(Error::Estimation { iterations, objective: ft });
            }
            let decrease: f64 = g.iter().zip(trial.iter().zip(&d)).map(|(gv, (t, x))| gv * (t - x)).sum();
            if ft <= f + ARMIJO * decrease && ft <= f {
                accepted = Some((trial, tconv, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, tconv, ft)) = accepted else {
            // no descent left along the projected direction
            converged = true;
            break;
        };
        if ft > f {
            increases += 1;
            if increases >= MAX_INCREASES {
                return Err(Error::Estimation { iterations, objective: ft });
            }
        } else {
            increases = 0;
        }
        let g_new = p.gradient(&tconv)?;
        let s: Vec<f64> = trial.iter().zip(&d).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        alpha = if sy > 0.0 { dot(&s, &s) / sy } else { step * 2.0 };
        let rel = (f - ft) / f.max(f64::MIN_POSITIVE);
        d = trial;
        conv = tconv;
        f = ft;
        g = g_new;
        if rel < opts.rel_tol {
            converged = true;
            break;
        }
    }
    let report = ChannelSolve {
        lambda1: p.lambda,
        iterations,
        objective: f,
        converged,
        lower_bound_active: d.iter().filter(|v| **v == 0.0).count(),
        unsaturated_residual_min: p.min_slack(&conv),
    };
    Ok((d, report))
}
