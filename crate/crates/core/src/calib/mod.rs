//! Joint GSF calibration over several camera datasets.
//!
//! Each scene pairs a glare-free rig image `l_in` with the merged HDR
//! capture `l_capt`. The fit minimises
//!
//! ```text
//! sum_i alpha_i * |log(l_s,i + eps_i) - log(l_capt,i + eps_i)|^2 + lambda * |p|^2
//! ```
//!
//! with `l_s,i` the simulated glare and `eps_i = 1e-6 * max(l_capt,i)`.
//!
//! A unit-sum kernel only depends on the ratio `p2 / p1`, so the search runs
//! over `(ln(p2/p1), ln p3, p4)` and reports parameters in canonical form
//! (raw kernel mass 1, see [`GsfParams::canonical`]). The regulariser is
//! evaluated on those canonical parameters.

mod manifest;
mod simplex;
mod tune;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsf::{rasterize_kernel, GsfKernel, GsfParams};
use crate::radiance::RadianceMap;

pub use manifest::{load_manifest, ManifestEntry, ManifestFile};
pub use simplex::{minimize, SimplexOptions, SimplexResult};
pub use tune::{validate_and_tune, AlphaPolicy, TuneResult, DEFAULT_LAMBDA_GRID};

/// Parameter box enforced by projection.
pub const P1_BOUNDS: (f64, f64) = (1e-4, 1.0);
pub const P2_BOUNDS: (f64, f64) = (0.0, 1.0);
pub const P3_BOUNDS: (f64, f64) = (1e-4, 1e3);
pub const P4_BOUNDS: (f64, f64) = (0.1, 4.0);

/// Relative guard added before taking logarithms.
pub const LOG_EPS_FRACTION: f64 = 1e-6;

/// Lower limit of `ln(p2/p1)`; below this the tail is numerically absent.
const MIN_LOG_RATIO: f64 = -40.0;

/// One camera's calibration pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibScene {
    camera_id: String,
    l_in: RadianceMap,
    l_capt: RadianceMap,
    alpha: f64,
}

impl CalibScene {
    /// Validates dimensions, `alpha` in `[0, 1]` and a single connected
    /// bright region in `l_in`.
    pub fn new(camera_id: impl Into<String>, l_in: RadianceMap, l_capt: RadianceMap, alpha: f64) -> Result<Self> {
        let camera_id = camera_id.into();
        if !l_in.same_shape(&l_capt) {
            return Err(Error::Dimension(format!("scene `{camera_id}`: l_in and l_capt differ in shape")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Argument(format!("scene `{camera_id}`: alpha {alpha} outside [0, 1]")));
        }
        if bright_components(&l_in) != 1 {
            return Err(Error::Argument(format!(
                "scene `{camera_id}`: l_in must contain exactly one connected bright region"
            )));
        }
        Ok(Self { camera_id, l_in, l_capt, alpha })
    }

    pub fn camera_id(&self) -> &str {
        &self.camera_id
    }

    pub fn l_in(&self) -> &RadianceMap {
        &self.l_in
    }

    pub fn l_capt(&self) -> &RadianceMap {
        &self.l_capt
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.camera_id.clone(), self.l_in.clone(), self.l_capt.clone(), alpha)
    }

    fn eps(&self) -> f64 {
        LOG_EPS_FRACTION * self.l_capt.max()
    }
}

/// Number of 8-connected components of pixels with any channel above zero.
fn bright_components(img: &RadianceMap) -> usize {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let lit: Vec<bool> = (0..w * h).map(|i| (0..ch).any(|c| img.data()[i * ch + c] > 0.0)).collect();
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for start in 0..w * h {
        if !lit[start] || seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if lit[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
    }
    count
}

/// Scenes plus the regularisation weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibDataset {
    scenes: Vec<CalibScene>,
    lambda: f64,
}

impl CalibDataset {
    pub fn new(scenes: Vec<CalibScene>, lambda: f64) -> Result<Self> {
        if scenes.is_empty() {
            return Err(Error::Argument("calibration dataset has no scenes".into()));
        }
        if !scenes.iter().any(|s| s.alpha > 0.0) {
            return Err(Error::Argument("every scene has alpha = 0".into()));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Self { scenes, lambda })
    }

    pub fn scenes(&self) -> &[CalibScene] {
        &self.scenes
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.scenes.clone(), lambda)
    }

    pub fn with_alphas(&self, alphas: &[f64]) -> Result<Self> {
        if alphas.len() != self.scenes.len() {
            return Err(Error::Argument("one alpha per scene required".into()));
        }
        let scenes = self.scenes.iter().zip(alphas).map(|(s, &a)| s.with_alpha(a)).collect::<Result<_>>()?;
        Self::new(scenes, self.lambda)
    }
}

/// Log-RMSE of one scene under the fitted kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneResidual {
    pub camera_id: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: GsfParams,
    pub final_objective: f64,
    pub per_scene_residual: Vec<SceneResidual>,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the perturbed restart ran.
    pub restarted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub simplex: SimplexOptions,
    /// Relative perturbation of the restart point.
    pub restart_perturbation: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { simplex: SimplexOptions::default(), restart_perturbation: 0.1 }
    }
}

struct PreparedScene {
    width: usize,
    height: usize,
    alpha: f64,
    eps: f64,
    /// Transformed zero-padded planes of `l_in`.
    spectra: Vec<Vec<Complex64>>,
    /// `log(l_capt + eps)` per plane.
    log_capt: Vec<Vec<f64>>,
}

/// Caches the per-scene transforms so each objective evaluation costs one
/// kernel rasterisation per distinct image size and one inverse FFT per plane.
struct Evaluator<'a> {
    ds: &'a CalibDataset,
    prepared: Vec<PreparedScene>,
}

impl<'a> Evaluator<'a> {
    fn new(ds: &'a CalibDataset) -> Result<Self> {
        let mut prepared = Vec::with_capacity(ds.scenes.len());
        let mut probe: Option<GsfKernel> = None;
        for s in &ds.scenes {
            let (w, h) = (s.l_in.width(), s.l_in.height());
            if probe.as_ref().is_none_or(|k| k.base_width() != w || k.base_height() != h) {
                probe = Some(rasterize_kernel(&GsfParams::default(), w, h)?);
            }
            let k = probe.as_ref().expect("kernel built above");
            let eps = s.eps();
            prepared.push(PreparedScene {
                width: w,
                height: h,
                alpha: s.alpha,
                eps,
                spectra: s.l_in.planes().iter().map(|p| k.transform_plane(p)).collect(),
                log_capt: s.l_capt.planes().iter().map(|p| p.iter().map(|v| (v + eps).ln()).collect()).collect(),
            });
        }
        Ok(Self { ds, prepared })
    }

    /// Squared log-residual sums per scene.
    fn scene_sums(&self, params: &GsfParams) -> Result<Vec<f64>> {
        let mut kernel: Option<GsfKernel> = None;
        let mut sums = Vec::with_capacity(self.prepared.len());
        for (p, scene) in self.prepared.iter().zip(&self.ds.scenes) {
            if kernel.as_ref().is_none_or(|k| k.base_width() != p.width || k.base_height() != p.height) {
                kernel = Some(rasterize_kernel(params, p.width, p.height)?);
            }
            let k = kernel.as_ref().expect("kernel built above");
            let mut sum = 0.0;
            for (spec, log_capt) in p.spectra.iter().zip(&p.log_capt) {
                let prod: Vec<Complex64> = spec.iter().zip(k.spectrum()).map(|(a, b)| a * b).collect();
                let sim = k.finish_plane(prod);
                for (s, lc) in sim.iter().zip(log_capt) {
                    let d = (s.max(0.0) + p.eps).ln() - lc;
                    sum += d * d;
                }
            }
            if !sum.is_finite() {
                return Err(Error::Objective { scene: scene.camera_id.clone() });
            }
            sums.push(sum);
        }
        Ok(sums)
    }

    fn objective(&self, params: &GsfParams) -> Result<f64> {
        let sums = self.scene_sums(params)?;
        let data: f64 = sums.iter().zip(&self.prepared).map(|(s, p)| p.alpha * s).sum();
        let reg: f64 = params.as_array().iter().map(|v| v * v).sum();
        Ok(data + self.ds.lambda * reg)
    }

    fn residuals(&self, params: &GsfParams) -> Result<Vec<SceneResidual>> {
        let sums = self.scene_sums(params)?;
        Ok(sums
            .iter()
            .zip(&self.ds.scenes)
            .map(|(s, scene)| SceneResidual {
                camera_id: scene.camera_id.clone(),
                residual: (s / scene.l_capt.data().len() as f64).sqrt(),
            })
            .collect())
    }
}

/// The regularised log-domain objective.
pub fn joint_objective(params: &GsfParams, ds: &CalibDataset) -> Result<f64> {
    params.validate()?;
    Evaluator::new(ds)?.objective(params)
}

/// Per-scene log-RMSE of `simulate_glare(l_in)` against `l_capt`.
pub fn per_scene_residuals(params: &GsfParams, ds: &CalibDataset) -> Result<Vec<SceneResidual>> {
    params.validate()?;
    Evaluator::new(ds)?.residuals(params)
}

/// Search coordinates and their mapping to canonical parameters.
struct Gauge {
    width: usize,
    height: usize,
}

impl Gauge {
    fn to_params(&self, u: &[f64]) -> GsfParams {
        let raw = GsfParams::new(1.0, u[0].exp(), u[1].exp(), u[2]);
        let mut c = raw.canonical(self.width, self.height);
        if c.p1 < P1_BOUNDS.0 {
            // keep the direct fraction at its lower bound
            let tail = (raw.raw_mass(self.width, self.height) - raw.p1) / raw.p2;
            c = GsfParams::new(P1_BOUNDS.0, (1.0 - P1_BOUNDS.0) / tail, raw.p3, raw.p4);
        }
        c.p2 = c.p2.min(P2_BOUNDS.1);
        c
    }

    fn to_search(&self, p: &GsfParams) -> Vec<f64> {
        let ratio = if p.p2 > 0.0 { (p.p2 / p.p1).ln().max(MIN_LOG_RATIO) } else { MIN_LOG_RATIO };
        let mut u = vec![ratio, p.p3.ln(), p.p4];
        project(&mut u);
        u
    }
}

fn project(u: &mut [f64]) {
    u[0] = u[0].clamp(MIN_LOG_RATIO, 20.0);
    u[1] = u[1].clamp(P3_BOUNDS.0.ln(), P3_BOUNDS.1.ln());
    u[2] = u[2].clamp(P4_BOUNDS.0, P4_BOUNDS.1);
}

/// Fits the GSF parameters by projected simplex search from `init`.
///
/// The returned objective is never above that of `init`. A run that hits the
/// iteration cap is restarted once from a perturbed copy of its best point.
pub fn fit_joint_gsf(ds: &CalibDataset, init: &GsfParams, opts: &FitOptions) -> Result<FitReport> {
    init.validate()?;
    let eval = Evaluator::new(ds)?;
    let first = &ds.scenes[0];
    let gauge = Gauge { width: first.l_in.width(), height: first.l_in.height() };
    let cost = |u: &[f64]| eval.objective(&gauge.to_params(u)).unwrap_or(f64::INFINITY);
    let steps = [0.7, 0.5, 0.15];

    let u0 = gauge.to_search(init);
    let mut run = minimize(cost, &u0, &steps, opts.simplex, project);
    let mut iterations = run.iterations;
    let mut restarted = false;
    if !run.converged {
        restarted = true;
        let mut u1 = run.x.clone();
        for (v, s) in u1.iter_mut().zip(&steps) {
            *v += opts.restart_perturbation * s;
        }
        let second = minimize(cost, &u1, &steps, opts.simplex, project);
        iterations += second.iterations;
        if second.f <= run.f {
            run = SimplexResult { iterations: run.iterations, ..second };
        } else {
            run.converged = second.converged;
        }
    }

    let mut best = gauge.to_params(&run.x);
    let mut best_f = eval.objective(&best)?;
    for cand in [gauge.to_params(&u0), *init] {
        let f = eval.objective(&cand)?;
        if f < best_f {
            best = cand;
            best_f = f;
        }
    }
    Ok(FitReport {
        params: best,
        final_objective: best_f,
        per_scene_residual: eval.residuals(&best)?,
        iterations,
        converged: run.converged,
        restarted,
    })
}
