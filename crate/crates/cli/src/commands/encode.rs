use std::path::Path;

use glarekit::encode::{encode, quantize, unsharp_mask, EncodedImage, TransferFunction};
use glarekit::radiance::{load_image, save_pfm, save_png16};
use glarekit::RadianceMap;
use serde::{Deserialize, Serialize};

use crate::batch;
use crate::cli::EncodeArgs;
use crate::error::{CliError, CliResult};

/// Encoding stage settings shared with the pipeline config.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeConfig {
    #[serde(default)]
    pub tf: TransferFunction,
    #[serde(default)]
    pub ceiling: Option<f64>,
    #[serde(default)]
    pub quant_bits: Option<u32>,
}

/// Encoded-domain baseline settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GlareB {
    Unsharp { sigma: f64, amount: f64 },
}

pub fn encode_stage(img: &RadianceMap, cfg: &EncodeConfig) -> CliResult<EncodedImage> {
    let enc = encode(img, cfg.tf, cfg.ceiling)?;
    Ok(match cfg.quant_bits {
        Some(bits) => quantize(&enc, bits)?,
        None => enc,
    })
}

pub fn glare_b_stage(enc: &EncodedImage, b: &GlareB) -> CliResult<EncodedImage> {
    match *b {
        GlareB::Unsharp { sigma, amount } => Ok(unsharp_mask(enc, sigma, amount)?),
    }
}

/// `.pfm` stores encoded values as floats, `.png` as 16-bit with max 1.
pub fn save_encoded(enc: &EncodedImage, path: &Path) -> CliResult<()> {
    let map = enc.to_map()?;
    match path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase()).as_deref() {
        Some("pfm") => save_pfm(&map, path)?,
        Some("png") => save_png16(&map, path, 1.0)?,
        _ => return Err(CliError::Lib(glarekit::Error::Format(format!("unsupported output {}", path.display())))),
    }
    Ok(())
}

pub fn run(args: &EncodeArgs) -> CliResult<()> {
    let cfg = EncodeConfig { tf: args.tf, ceiling: args.ceiling, quant_bits: args.quant_bits };
    let b = match (args.unsharp_sigma, args.unsharp_amount) {
        (Some(sigma), Some(amount)) => Some(GlareB::Unsharp { sigma, amount }),
        _ => None,
    };
    let jobs = batch::plan(&args.input, &args.out, None)?;
    batch::run(
        &jobs,
        |job| {
            let enc = encode_stage(&load_image(&job.input)?, &cfg)?;
            match &b {
                Some(b) => glare_b_stage(&enc, b),
                None => Ok(enc),
            }
        },
        |job, enc| save_encoded(&enc, &job.output),
    )
}
