//! Synthetic scenes and degradations with full ground truth.
//!
//! Scenes are built from a background level, true-black rectangles, bright
//! disks and labelled object rectangles. All scene values are rounded to
//! `f32` so a scene survives PFM storage bit-exactly.
//!
//! Randomness comes from ChaCha8 seeded with a `u64`; Gaussian samples use
//! the Box–Muller transform so the noise stream is fixed across platforms and
//! library versions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsf::{rasterize_kernel, simulate_glare, GsfParams};
use crate::hdrmerge::{ExposureFrame, ExposureStack};
use crate::metrics::{BoundingBox, DetectionSet};
use crate::radiance::{RadianceMap, Rect};

/// Bright disk: pixels whose centre lies within `radius` of `(cx, cy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSource {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub intensity: f64,
}

impl DiskSource {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let dx = x as f64 + 0.5 - self.cx;
        let dy = y as f64 + 0.5 - self.cy;
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// Labelled rectangle drawn at a uniform level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub rect: Rect,
    pub label: String,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default = "one")]
    pub channels: usize,
    #[serde(default)]
    pub background: f64,
    /// Relative amplitude of seeded multiplicative background texture.
    #[serde(default)]
    pub texture: f64,
    #[serde(default)]
    pub dark_patches: Vec<Rect>,
    #[serde(default)]
    pub sources: Vec<DiskSource>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl SceneSpec {
    /// Black `width x height` scene with no content.
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            channels: 1,
            background: 0.0,
            texture: 0.0,
            dark_patches: Vec::new(),
            sources: Vec::new(),
            objects: Vec::new(),
            seed: 0,
        }
    }

    /// Calibration rig: a centred disk of diameter `d` pixels on black.
    pub fn rig(width: usize, height: usize, d: f64, intensity: f64) -> Self {
        let mut s = Self::empty(width, height);
        s.sources.push(DiskSource { cx: width as f64 / 2.0, cy: height as f64 / 2.0, radius: d / 2.0, intensity });
        s
    }

    /// Tunnel-like scene: dim textured walls, a dark opening, bright lamps
    /// and a few vehicles, all placed from `seed`.
    pub fn tunnel(width: usize, height: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (width as f64, height as f64);
        let mut s = Self::empty(width, height);
        s.seed = seed;
        s.background = 0.05;
        s.texture = 0.5;
        // dark opening in the lower middle
        let dw = (w * 0.25) as usize;
        let dh = (h * 0.2) as usize;
        s.dark_patches.push(Rect::new((width - dw) / 2, height - dh - height / 10, dw, dh));
        // a black strip near the top as a second anchor region
        s.dark_patches.push(Rect::new(width / 10, height / 12, width / 5, (height / 16).max(2)));
        // lamp size and jitter shrink below 128 px so small frames stay valid
        let scale = (w.min(h) / 128.0).min(1.0);
        let lamps = rng.random_range(2..=3);
        for i in 0..lamps {
            let radius = (rng.random_range(1.5..3.5) * scale).max(0.75);
            let slot = (i as f64 + 0.5) / lamps as f64;
            s.sources.push(DiskSource {
                cx: (w * (0.2 + 0.6 * slot) + scale * rng.random_range(-2.0..2.0)).floor() + 0.5,
                cy: (h * rng.random_range(0.3..0.4)).floor() + 0.5,
                radius,
                intensity: rng.random_range(200.0..800.0),
            });
        }
        let cars = rng.random_range(1..=2);
        for i in 0..cars {
            let cw = (w * rng.random_range(0.1..0.15)) as usize;
            let ch = (h * rng.random_range(0.06..0.1)) as usize;
            let x = ((w * (0.1 + 0.55 * i as f64)) as usize).min(width - cw - 1);
            let y = ((h * 0.5) as usize).min(height - ch - 1);
            s.objects.push(SceneObject {
                rect: Rect::new(x, y, cw.max(2), ch.max(2)),
                label: "car".into(),
                intensity: rng.random_range(0.2..0.6),
            });
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Spec(m));
        if self.width == 0 || self.height == 0 || !(self.channels == 1 || self.channels == 3) {
            return bad(format!("bad dims {}x{}x{}", self.width, self.height, self.channels));
        }
        if !(self.background >= 0.0 && self.background.is_finite()) {
            return bad(format!("background {} must be finite and >= 0", self.background));
        }
        if !(0.0..=1.0).contains(&self.texture) {
            return bad(format!("texture {} outside [0, 1]", self.texture));
        }
        for r in self.dark_patches.iter().chain(self.objects.iter().map(|o| &o.rect)) {
            r.check_inside(self.width, self.height).map_err(|e| Error::Spec(e.to_string()))?;
        }
        for o in &self.objects {
            if !(o.intensity >= 0.0 && o.intensity.is_finite()) {
                return bad(format!("object `{}` intensity must be finite and >= 0", o.label));
            }
        }
        for d in &self.sources {
            let inside = d.cx - d.radius >= 0.0
                && d.cy - d.radius >= 0.0
                && d.cx + d.radius <= self.width as f64
                && d.cy + d.radius <= self.height as f64;
            if !(d.radius > 0.0 && inside) {
                return bad(format!("disk at ({}, {}) r = {} not inside the frame", d.cx, d.cy, d.radius));
            }
            if !(d.intensity >= 0.0 && d.intensity.is_finite()) {
                return bad(format!("disk intensity {} must be finite and >= 0", d.intensity));
            }
        }
        for y in 0..self.height {
            for x in 0..self.width {
                let dark = self.dark_patches.iter().any(|r| r.contains(x, y));
                let lit = self.sources.iter().filter(|d| d.contains(x, y)).count();
                let obj = self.objects.iter().any(|o| o.rect.contains(x, y));
                if lit > 1 {
                    return bad(format!("sources overlap at ({x}, {y})"));
                }
                if dark && (lit > 0 || obj) {
                    return bad(format!("dark patch overlaps a source or object at ({x}, {y})"));
                }
            }
        }
        Ok(())
    }

    /// Ground-truth boxes of the labelled objects.
    pub fn ground_truth(&self, image_id: &str) -> DetectionSet {
        DetectionSet {
            image_id: image_id.into(),
            boxes: self
                .objects
                .iter()
                .map(|o| {
                    let r = o.rect;
                    BoundingBox::new(r.x as f64, r.y as f64, (r.x + r.w) as f64, (r.y + r.h) as f64)
                        .with_class(o.label.clone())
                })
                .collect(),
        }
    }
}

/// Renders `spec`: background (with texture), objects, dark patches at
/// exactly 0, then sources at exactly their intensity.
pub fn make_scene(spec: &SceneSpec) -> Result<RadianceMap> {
    spec.validate()?;
    let (w, h, ch) = (spec.width, spec.height, spec.channels);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = vec![0.0; w * h * ch];
    for y in 0..h {
        for x in 0..w {
            let (v, textured) = if let Some(d) = spec.sources.iter().find(|d| d.contains(x, y)) {
                (d.intensity, false)
            } else if spec.dark_patches.iter().any(|r| r.contains(x, y)) {
                (0.0, false)
            } else if let Some(o) = spec.objects.iter().rev().find(|o| o.rect.contains(x, y)) {
                (o.intensity, false)
            } else {
                (spec.background, true)
            };
            for c in 0..ch {
                // texture is drawn for every sample so geometry does not shift the stream
                let t: f64 = if spec.texture > 0.0 { rng.random_range(-1.0..1.0) } else { 0.0 };
                let val = if textured { v * (1.0 + spec.texture * t) } else { v };
                data[(y * w + x) * ch + c] = val as f32 as f64;
            }
        }
    }
    RadianceMap::new(w, h, ch, data)
}

/// Standard normal stream via Box–Muller.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2: f64 = self.rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Everything needed to recompute a degraded image from its pristine scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegradationRecord {
    pub params: GsfParams,
    /// Clip level; `None` means no clipping.
    pub ceiling: Option<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Per sample, whether the pre-clip value reached the ceiling.
    pub clip_mask: Vec<bool>,
    #[serde(skip)]
    pub pristine: Option<RadianceMap>,
}

impl DegradationRecord {
    pub fn clipped_count(&self) -> usize {
        self.clip_mask.iter().filter(|m| **m).count()
    }
}

/// Glare with `params`, additive Gaussian noise of `noise_sigma * ceiling`,
/// then clipping to `[0, ceiling]`. An infinite ceiling disables clipping and
/// requires `noise_sigma == 0`.
pub fn degrade(
    scene: &RadianceMap,
    params: &GsfParams,
    ceiling: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<(RadianceMap, DegradationRecord)> {
    if !(ceiling > 0.0) {
        return Err(Error::Argument(format!("ceiling must be positive, got {ceiling}")));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) || (ceiling.is_infinite() && noise_sigma > 0.0) {
        return Err(Error::Argument(format!("noise sigma {noise_sigma} invalid for ceiling {ceiling}")));
    }
    let kernel = rasterize_kernel(params, scene.width(), scene.height())?;
    let glared = simulate_glare(scene, &kernel)?;
    let mut noise = GaussianStream::new(seed);
    let sigma = if noise_sigma > 0.0 { noise_sigma * ceiling } else { 0.0 };
    let mut clip_mask = Vec::with_capacity(glared.data().len());
    let data: Vec<f64> = glared
        .data()
        .iter()
        .map(|&v| {
            let v = if sigma > 0.0 { v + sigma * noise.sample() } else { v };
            clip_mask.push(v >= ceiling);
            v.clamp(0.0, ceiling)
        })
        .collect();
    let out = RadianceMap::new(scene.width(), scene.height(), scene.channels(), data)?;
    let record = DegradationRecord {
        params: *params,
        ceiling: ceiling.is_finite().then_some(ceiling),
        noise_sigma,
        seed,
        clip_mask,
        pristine: Some(scene.clone()),
    };
    Ok((out, record))
}

/// Recomputes the degraded image from a record and its pristine map.
pub fn replay(record: &DegradationRecord, pristine: &RadianceMap) -> Result<RadianceMap> {
    let ceiling = record.ceiling.unwrap_or(f64::INFINITY);
    degrade(pristine, &record.params, ceiling, record.noise_sigma, record.seed).map(|(img, _)| img)
}

/// Frames `clip(scene * t_i + noise, ceiling)` with noise `noise_sigma *
/// ceiling`; a single time is allowed here.
pub fn exposure_frames(
    scene: &RadianceMap,
    times: &[f64],
    ceiling: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<ExposureFrame>> {
    if !(ceiling > 0.0 && ceiling.is_finite()) {
        return Err(Error::Argument(format!("ceiling must be finite and positive, got {ceiling}")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Stack("exposure times must be strictly increasing".into()));
    }
    let mut noise = GaussianStream::new(seed);
    let sigma = noise_sigma * ceiling;
    times
        .iter()
        .map(|&t| {
            let data = scene
                .data()
                .iter()
                .map(|&v| {
                    let v = if sigma > 0.0 { v * t + sigma * noise.sample() } else { v * t };
                    v.clamp(0.0, ceiling)
                })
                .collect();
            let img = RadianceMap::new(scene.width(), scene.height(), scene.channels(), data)?;
            ExposureFrame::new(img, t, ceiling)
        })
        .collect()
}

/// Simulated exposure stack of `scene`; fails if the shortest exposure clips.
pub fn make_exposure_stack(
    scene: &RadianceMap,
    times: &[f64],
    ceiling: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<ExposureStack> {
    ExposureStack::new(exposure_frames(scene, times, ceiling, noise_sigma, seed)?)
}
