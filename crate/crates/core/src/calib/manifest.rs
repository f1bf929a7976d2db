//! Calibration manifest files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CalibDataset, CalibScene};
use crate::error::Result;
use crate::radiance::load_image;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub camera_id: String,
    pub l_in_path: PathBuf,
    pub l_capt_path: PathBuf,
    #[serde(default = "unit")]
    pub alpha: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub scenes: Vec<ManifestEntry>,
    #[serde(default)]
    pub lambda: f64,
}

/// Loads a manifest; image paths resolve relative to the manifest directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<CalibDataset> {
    let path = path.as_ref();
    let file: ManifestFile = serde_json::from_slice(&std::fs::read(path)?)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let scenes = file
        .scenes
        .iter()
        .map(|e| {
            CalibScene::new(
                e.camera_id.clone(),
                load_image(base.join(&e.l_in_path))?,
                load_image(base.join(&e.l_capt_path))?,
                e.alpha,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    CalibDataset::new(scenes, file.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiance::save_image;
    use crate::synth::{make_scene, SceneSpec};

    #[test]
    fn loads_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let img = make_scene(&SceneSpec::rig(8, 8, 2.0, 4.0)).unwrap();
        save_image(&img, dir.path().join("in.pfm")).unwrap();
        save_image(&img, dir.path().join("capt.pfm")).unwrap();
        let m = r#"{"scenes":[{"camera_id":"c0","l_in_path":"in.pfm","l_capt_path":"capt.pfm","alpha":0.5}],"lambda":0.01}"#;
        std::fs::write(dir.path().join("m.json"), m).unwrap();
        let ds = load_manifest(dir.path().join("m.json")).unwrap();
        assert_eq!(ds.scenes()[0].alpha(), 0.5);
        assert_eq!(ds.lambda(), 0.01);
        std::fs::write(dir.path().join("bad.json"), r#"{"scenes":[],"lambda":0,"extra":1}"#).unwrap();
        assert!(load_manifest(dir.path().join("bad.json")).is_err());
    }
}
