use std::fs;
use std::path::Path;

use glarekit::radiance::{load_pfm, save_pfm};
use glarekit::synth::{degrade, make_scene, SceneSpec};
use glarekit::{GsfParams, RadianceMap};

use super::{read_json, write_json};
use crate::cli::{Preset, SynthArgs};
use crate::error::CliResult;

/// Image id used in the ground-truth file.
pub const IMAGE_ID: &str = "scene";

/// Files written by [`generate`], relative to the output directory.
pub const PRISTINE: &str = "scene.pfm";
pub const DEGRADED: &str = "degraded.pfm";

pub struct SynthOutput {
    pub pristine: RadianceMap,
    /// Degraded image as stored on disk.
    pub degraded: RadianceMap,
    pub params: GsfParams,
}

pub fn preset_spec(preset: Preset, width: usize, height: usize, seed: u64) -> SceneSpec {
    match preset {
        Preset::Tunnel => SceneSpec::tunnel(width, height, seed),
        Preset::Rig => SceneSpec::rig(width, height, 2.0, 100.0),
    }
}

/// Renders the scene, degrades it and writes pristine, degraded, parameters,
/// degradation record, spec and ground truth to `out`.
pub fn generate(
    spec: &SceneSpec,
    params: Option<GsfParams>,
    ceiling: f64,
    noise: f64,
    seed: u64,
    out: &Path,
) -> CliResult<SynthOutput> {
    spec.validate()?;
    let params = params.unwrap_or_else(|| GsfParams::default().canonical(spec.width, spec.height));
    params.validate()?;
    fs::create_dir_all(out)?;
    let pristine = make_scene(spec)?;
    let (degraded, record) = degrade(&pristine, &params, ceiling, noise, seed)?;
    log::info!("{} samples clipped", record.clipped_count());
    save_pfm(&pristine, out.join(PRISTINE))?;
    save_pfm(&degraded, out.join(DEGRADED))?;
    write_json(&out.join("params.json"), &params)?;
    write_json(&out.join("record.json"), &record)?;
    write_json(&out.join("spec.json"), spec)?;
    let mut gt = serde_json::to_string(&spec.ground_truth(IMAGE_ID))?;
    gt.push('\n');
    fs::write(out.join("gt.jsonl"), gt)?;
    Ok(SynthOutput { pristine: load_pfm(out.join(PRISTINE))?, degraded: load_pfm(out.join(DEGRADED))?, params })
}

pub fn run(args: &SynthArgs, seed: u64) -> CliResult<()> {
    let spec = match (&args.spec, args.preset) {
        (Some(p), _) => read_json(p)?,
        (None, Some(preset)) => preset_spec(preset, args.width, args.height, seed),
        (None, None) => unreachable!("clap requires --spec or --preset"),
    };
    let params = args.gsf.as_deref().map(read_json).transpose()?;
    generate(&spec, params, args.ceiling, args.noise, seed, &args.out)?;
    Ok(())
}
