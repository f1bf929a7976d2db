//! Point-source rig geometry and multi-exposure HDR merging.
//!
//! The calibration rig is a light source of exitance `phi` behind a circular
//! aperture of diameter `d`; each capture integrates `phi_a * t` for its
//! exposure time. Captures are merged into one linear radiance map by a
//! hat-weighted average of the per-frame estimates `v / t`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radiance::{load_image, RadianceMap};

/// Frames at or above this fraction of the saturation level get zero weight.
pub const SATURATION_CUTOFF: f64 = 0.98;

/// Light source behind a circular aperture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub intensity_phi: f64,
    /// Aperture diameter in millimetres.
    pub aperture_d: f64,
}

impl SourceSpec {
    pub fn new(intensity_phi: f64, aperture_d: f64) -> Result<Self> {
        if !(intensity_phi > 0.0 && intensity_phi.is_finite() && aperture_d > 0.0 && aperture_d.is_finite()) {
            return Err(Error::Argument(format!(
                "source needs phi > 0 and d > 0, got phi = {intensity_phi}, d = {aperture_d}"
            )));
        }
        Ok(Self { intensity_phi, aperture_d })
    }
}

/// Flux through the aperture: `phi * pi * d^2 / 4`.
pub fn aperture_flux(spec: &SourceSpec) -> f64 {
    spec.intensity_phi * std::f64::consts::PI * spec.aperture_d * spec.aperture_d / 4.0
}

/// Light collected during an exposure of `t` seconds.
pub fn captured_light(phi_a: f64, t: f64) -> f64 {
    phi_a * t
}

/// One digitised capture.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureFrame {
    image: RadianceMap,
    exposure_t: f64,
    saturation_level: f64,
}

impl ExposureFrame {
    pub fn new(image: RadianceMap, exposure_t: f64, saturation_level: f64) -> Result<Self> {
        if !(exposure_t > 0.0 && exposure_t.is_finite()) {
            return Err(Error::Stack(format!("exposure time must be positive, got {exposure_t}")));
        }
        if !(saturation_level > 0.0 && saturation_level.is_finite()) {
            return Err(Error::Stack(format!("saturation level must be positive, got {saturation_level}")));
        }
        if image.max() > saturation_level {
            return Err(Error::Stack(format!(
                "frame value {} exceeds saturation level {saturation_level}",
                image.max()
            )));
        }
        Ok(Self { image, exposure_t, saturation_level })
    }

    pub fn image(&self) -> &RadianceMap {
        &self.image
    }

    pub fn exposure_t(&self) -> f64 {
        self.exposure_t
    }

    pub fn saturation_level(&self) -> f64 {
        self.saturation_level
    }
}

/// Aligned captures sorted by strictly increasing exposure time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureStack {
    frames: Vec<ExposureFrame>,
}

impl ExposureStack {
    pub fn new(frames: Vec<ExposureFrame>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Argument("exposure stack is empty".into()));
        }
        if frames.len() < 2 {
            return Err(Error::Stack("exposure stack needs at least two frames".into()));
        }
        let first = frames[0].image();
        if frames.iter().any(|f| !f.image().same_shape(first)) {
            return Err(Error::Stack("frames have mismatched dimensions".into()));
        }
        if frames.windows(2).any(|w| w[1].exposure_t <= w[0].exposure_t) {
            return Err(Error::Stack("exposure times must be strictly increasing".into()));
        }
        let short = &frames[0];
        if short.image().data().iter().any(|&v| v >= short.saturation_level) {
            return Err(Error::Stack("shortest exposure contains saturated pixels".into()));
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[ExposureFrame] {
        &self.frames
    }
}

/// Hat weight `max(0, 1 - |2v/s - 1|)`, forced to zero near saturation.
pub fn hat_weight(v: f64, saturation_level: f64) -> f64 {
    if v >= SATURATION_CUTOFF * saturation_level {
        return 0.0;
    }
    (1.0 - (2.0 * v / saturation_level - 1.0).abs()).max(0.0)
}

/// Weighted merge of the per-frame radiance estimates `v_i / t_i`.
///
/// When every frame has zero weight at a sample the estimate falls back to
/// the longest exposure below the saturation cutoff, or to the shortest
/// exposure if there is none.
pub fn merge_hdr(stack: &ExposureStack) -> Result<RadianceMap> {
    let frames = stack.frames();
    let proto = frames[0].image();
    let n = proto.data().len();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for f in frames {
            let v = f.image.data()[i];
            let w = hat_weight(v, f.saturation_level);
            num += w * (v / f.exposure_t);
            den += w;
        }
        *o = if den > 0.0 {
            num / den
        } else {
            let f = frames
                .iter()
                .rev()
                .find(|f| f.image.data()[i] < SATURATION_CUTOFF * f.saturation_level)
                .unwrap_or(&frames[0]);
            f.image.data()[i] / f.exposure_t
        };
    }
    RadianceMap::from_clamped(proto.width(), proto.height(), proto.channels(), out)
}

/// One entry of a stack manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackEntry {
    pub path: PathBuf,
    pub exposure_t: f64,
    pub saturation_level: f64,
}

/// Loads a JSON stack manifest; relative image paths resolve against the
/// manifest's directory. Entries are sorted by exposure time.
pub fn load_stack(manifest: impl AsRef<Path>) -> Result<ExposureStack> {
    let manifest = manifest.as_ref();
    let mut entries: Vec<StackEntry> = serde_json::from_slice(&std::fs::read(manifest)?)?;
    entries.sort_by(|a, b| a.exposure_t.total_cmp(&b.exposure_t));
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let frames = entries
        .into_iter()
        .map(|e| {
            let img = load_image(base.join(&e.path))?;
            ExposureFrame::new(img, e.exposure_t, e.saturation_level)
        })
        .collect::<Result<Vec<_>>>()?;
    ExposureStack::new(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn frame(values: Vec<f64>, t: f64, s: f64) -> ExposureFrame {
        let n = values.len();
        ExposureFrame::new(RadianceMap::new(n, 1, 1, values).unwrap(), t, s).unwrap()
    }

    #[test]
    fn aperture_examples() {
        let a = aperture_flux(&SourceSpec::new(1.0, 2.0).unwrap());
        assert!((a - PI).abs() < 1e-15);
        let b = aperture_flux(&SourceSpec::new(0.5, 2.0).unwrap());
        assert!((b - PI / 2.0).abs() < 1e-15);
        for phi in [0.1, 3.0] {
            let s1 = aperture_flux(&SourceSpec::new(phi, 1.3).unwrap());
            let s2 = aperture_flux(&SourceSpec::new(phi, 2.6).unwrap());
            assert!((s2 / s1 - 4.0).abs() < 1e-12);
        }
        assert!(SourceSpec::new(0.0, 1.0).is_err());
    }

    #[test]
    fn captured_light_series() {
        assert_eq!(captured_light(PI, 1.0), PI);
        assert_eq!(captured_light(PI, 0.0), 0.0);
        let l: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|t| captured_light(2.5, *t)).collect();
        assert_eq!(l[1] / l[0], 2.0);
        assert_eq!(l[2] / l[0], 4.0);
    }

    #[test]
    fn consistent_frames_merge_exactly() {
        let stack = ExposureStack::new(vec![frame(vec![0.2, 0.3], 1.0, 1.0), frame(vec![0.4, 0.6], 2.0, 1.0)]).unwrap();
        let m = merge_hdr(&stack).unwrap();
        assert!((m.data()[0] - 0.2).abs() < 1e-15);
        assert!((m.data()[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn clipped_long_exposure_ignored() {
        let stack = ExposureStack::new(vec![frame(vec![0.3], 1.0, 1.0), frame(vec![1.0], 4.0, 1.0)]).unwrap();
        assert_eq!(merge_hdr(&stack).unwrap().data()[0], 0.3);
    }

    #[test]
    fn all_zero_weight_falls_back() {
        // zero value: every weight vanishes, estimate 0
        let stack =
            ExposureStack::new(vec![frame(vec![0.0, 0.985], 1.0, 1.0), frame(vec![0.0, 1.0], 2.0, 1.0)]).unwrap();
        let m = merge_hdr(&stack).unwrap();
        assert_eq!(m.data()[0], 0.0);
        // above the cutoff in every frame: shortest exposure estimate
        assert_eq!(m.data()[1], 0.985);
    }

    #[test]
    fn stack_validation() {
        assert!(matches!(ExposureStack::new(vec![]), Err(Error::Argument(_))));
        assert!(ExposureStack::new(vec![frame(vec![0.1], 1.0, 1.0)]).is_err());
        assert!(ExposureStack::new(vec![frame(vec![0.1], 2.0, 1.0), frame(vec![0.1], 1.0, 1.0)]).is_err());
        assert!(ExposureStack::new(vec![frame(vec![0.1], 1.0, 1.0), frame(vec![0.1, 0.2], 2.0, 1.0)]).is_err());
        assert!(ExposureStack::new(vec![frame(vec![1.0], 1.0, 1.0), frame(vec![1.0], 2.0, 1.0)]).is_err());
        let img = RadianceMap::new(1, 1, 1, vec![2.0]).unwrap();
        assert!(ExposureFrame::new(img.clone(), 1.0, 1.0).is_err());
        assert!(ExposureFrame::new(img, 0.0, 4.0).is_err());
    }

    #[test]
    fn hat_weight_shape() {
        assert_eq!(hat_weight(0.0, 1.0), 0.0);
        assert_eq!(hat_weight(0.5, 1.0), 1.0);
        assert!((hat_weight(0.25, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(hat_weight(0.98, 1.0), 0.0);
        assert!(hat_weight(0.97, 1.0) > 0.0);
    }
}
