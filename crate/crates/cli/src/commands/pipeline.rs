//! Config-driven stage chain.
//!
//! Every stage that has a subcommand equivalent writes its output and the
//! next stage reads it back, so the files match a chain of subcommand calls.

use std::fs;
use std::path::{Path, PathBuf};

use glarekit::deglare::{wiener_deconvolve, DeglareOptions, WienerConfig, DEFAULT_NSR};
use glarekit::metrics::{write_csv, write_reports, ScoreRecord};
use glarekit::radiance::{demosaic_bilinear, load_image, load_pfm, save_pfm, white_balance, CfaPattern, RawFrame};
use glarekit::{rasterize_kernel, GsfParams, RadianceMap, Rect};
use serde::{Deserialize, Serialize};

use super::encode::{encode_stage, glare_b_stage, save_encoded, EncodeConfig, GlareB};
use super::synth::{generate, preset_spec};
use super::{read_json, score, write_json};
use crate::cli::{Metric, PipelineArgs, Preset};
use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub input: InputConfig,
    #[serde(default)]
    pub demosaic: bool,
    #[serde(default)]
    pub white_balance: Option<Rect>,
    #[serde(default)]
    pub glare_a: Option<GlareA>,
    #[serde(default)]
    pub encode: EncodeConfig,
    #[serde(default)]
    pub glare_b: Option<GlareB>,
    #[serde(default)]
    pub score: Vec<ScoreConfig>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputConfig {
    /// Synthetic scene; the scene seed of a preset and the noise seed are
    /// the global `--seed`.
    Synth {
        #[serde(default)]
        spec: Option<PathBuf>,
        #[serde(default)]
        preset: Option<Preset>,
        #[serde(default = "default_side")]
        width: usize,
        #[serde(default = "default_side")]
        height: usize,
        #[serde(default)]
        gsf: Option<PathBuf>,
        #[serde(default = "default_ceiling")]
        ceiling: f64,
        #[serde(default)]
        noise: f64,
    },
    /// Linear `.pfm` or `.png` image.
    Image { path: PathBuf },
    /// Single-channel 16-bit PNG of CFA samples.
    Raw { path: PathBuf, cfa: CfaPattern, bit_depth: u32 },
}

fn default_side() -> usize {
    128
}

fn default_ceiling() -> f64 {
    10.0
}

/// Linear-domain glare removal. `gsf` defaults to the synthetic input's
/// parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GlareA {
    Deglare {
        #[serde(default)]
        gsf: Option<PathBuf>,
        #[serde(default)]
        options: DeglareOptions,
    },
    Wiener {
        #[serde(default)]
        gsf: Option<PathBuf>,
        #[serde(default = "default_nsr")]
        nsr: f64,
    },
}

fn default_nsr() -> f64 {
    DEFAULT_NSR
}

/// `log-rmse` without paths compares the linear output against the
/// synthetic pristine scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreConfig {
    pub metric: Metric,
    #[serde(default)]
    pub pred: Option<PathBuf>,
    #[serde(default, rename = "ref")]
    pub reference: Option<PathBuf>,
    #[serde(default = "default_iou")]
    pub iou_thresh: f64,
    #[serde(default)]
    pub mask: Option<PathBuf>,
}

fn default_iou() -> f64 {
    glarekit::metrics::DEFAULT_IOU_THRESH
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

struct Resolver<'a> {
    base: &'a Path,
}

impl Resolver<'_> {
    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

fn load_raw(path: &Path, cfa: CfaPattern, bit_depth: u32) -> CliResult<RadianceMap> {
    let img = image::open(path)
        .map_err(|e| CliError::Lib(glarekit::Error::Format(format!("{}: {e}", path.display()))))?
        .into_luma16();
    let (w, h) = img.dimensions();
    let raw = RawFrame::new(w as usize, h as usize, bit_depth, cfa, img.into_raw())?;
    Ok(demosaic_bilinear(&raw)?)
}

/// Writes `img` as `name` in `out` and returns the stored version.
fn checkpoint(img: &RadianceMap, out: &Path, name: &str, written: &mut Vec<String>) -> CliResult<RadianceMap> {
    let path = out.join(name);
    save_pfm(img, &path)?;
    written.push(name.into());
    Ok(load_pfm(&path)?)
}

pub fn run_config(cfg: &PipelineConfig, base: &Path, seed: u64) -> CliResult<()> {
    if cfg.version != CONFIG_VERSION {
        return Err(config_err(format!("unsupported config version {}", cfg.version)));
    }
    let res = Resolver { base };
    let out = res.path(&cfg.output_dir);
    fs::create_dir_all(&out)?;
    let mut written = Vec::new();

    let mut pristine = None;
    let mut synth_params = None;
    let raw_input = matches!(cfg.input, InputConfig::Raw { .. });
    if raw_input && !cfg.demosaic {
        return Err(config_err("raw input requires `demosaic: true`"));
    }
    if cfg.demosaic && !raw_input {
        return Err(config_err("`demosaic` applies to raw input only"));
    }
    let mut linear = match &cfg.input {
        InputConfig::Synth { spec, preset, width, height, gsf, ceiling, noise } => {
            let spec = match (spec, preset) {
                (Some(p), None) => read_json(&res.path(p))?,
                (None, Some(preset)) => preset_spec(*preset, *width, *height, seed),
                _ => return Err(config_err("synth input needs exactly one of `spec` and `preset`")),
            };
            let params = gsf.as_ref().map(|p| read_json(&res.path(p))).transpose()?;
            let s = generate(&spec, params, *ceiling, *noise, seed, &out.join("synth"))?;
            written.push("synth".into());
            pristine = Some(s.pristine);
            synth_params = Some(s.params);
            s.degraded
        }
        InputConfig::Image { path } => load_image(res.path(path))?,
        InputConfig::Raw { path, cfa, bit_depth } => load_raw(&res.path(path), *cfa, *bit_depth)?,
    };
    log::info!("input {}x{}x{}", linear.width(), linear.height(), linear.channels());

    if let Some(rect) = &cfg.white_balance {
        linear = white_balance(&linear, rect)?;
    }
    if cfg.demosaic || cfg.white_balance.is_some() {
        linear = checkpoint(&linear, &out, "linear.pfm", &mut written)?;
    }

    let params = |gsf: &Option<PathBuf>| -> CliResult<GsfParams> {
        let p = match gsf {
            Some(p) => read_json(&res.path(p))?,
            None => synth_params.ok_or_else(|| config_err("glare_a needs `gsf` unless the input is synthetic"))?,
        };
        p.validate()?;
        Ok(p)
    };
    match &cfg.glare_a {
        Some(GlareA::Deglare { gsf, options }) => {
            let (img, report) = super::deglare::process(&linear, &params(gsf)?, options)?;
            linear = checkpoint(&img, &out, "stage_a.pfm", &mut written)?;
            write_json(&out.join("deglare_report.json"), &report)?;
            written.push("deglare_report.json".into());
        }
        Some(GlareA::Wiener { gsf, nsr }) => {
            let kernel = rasterize_kernel(&params(gsf)?, linear.width(), linear.height())?;
            let img = wiener_deconvolve(&linear, &kernel, &WienerConfig { nsr: *nsr })?;
            linear = checkpoint(&img, &out, "stage_a.pfm", &mut written)?;
        }
        None => {}
    }

    let encoded = encode_stage(&linear, &cfg.encode)?;
    save_encoded(&encoded, &out.join("encoded.pfm"))?;
    written.push("encoded.pfm".into());
    if let Some(b) = &cfg.glare_b {
        save_encoded(&glare_b_stage(&encoded, b)?, &out.join("final.pfm"))?;
        written.push("final.pfm".into());
    }

    if !cfg.score.is_empty() {
        let records = cfg
            .score
            .iter()
            .map(|s| score_entry(s, &res, &linear, pristine.as_ref()))
            .collect::<CliResult<Vec<ScoreRecord>>>()?;
        write_reports(&records, out.join("scores.json"))?;
        write_csv(&records, out.join("scores.csv"))?;
        written.extend(["scores.json".into(), "scores.csv".into()]);
    }
    write_json(&out.join("outputs.json"), &written)?;
    Ok(())
}

fn score_entry(
    s: &ScoreConfig,
    res: &Resolver,
    linear: &RadianceMap,
    pristine: Option<&RadianceMap>,
) -> CliResult<ScoreRecord> {
    match (&s.pred, &s.reference) {
        (Some(p), Some(r)) => score::compute(
            s.metric,
            &res.path(p),
            &res.path(r),
            s.iou_thresh,
            s.mask.as_ref().map(|m| res.path(m)).as_deref(),
        ),
        (None, None) if s.metric == Metric::LogRmse => {
            let reference = pristine.ok_or_else(|| config_err("log-rmse without paths needs synthetic input"))?;
            Ok(score::image_log_rmse(linear, reference))
        }
        _ => Err(config_err(format!("score `{}` needs `pred` and `ref`", s.metric.name()))),
    }
}

pub fn run(args: &PipelineArgs, seed: u64) -> CliResult<()> {
    let cfg: PipelineConfig = serde_json::from_slice(&fs::read(&args.config)?)
        .map_err(|e| config_err(format!("{}: {e}", args.config.display())))?;
    let base = args.config.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    run_config(&cfg, base, seed)
}
