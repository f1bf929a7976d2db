use glarekit::deglare::{deglare, DeglareOptions, DeglareReport, SolverOptions};
use glarekit::radiance::{load_image, save_image};
use glarekit::{rasterize_kernel, GsfParams, RadianceMap};

use super::{read_json, write_json};
use crate::batch;
use crate::cli::DeglareArgs;
use crate::error::CliResult;

pub fn options(args: &DeglareArgs) -> DeglareOptions {
    DeglareOptions {
        sat_threshold: args.sat_threshold,
        ceiling: args.ceiling,
        dark_sigma: args.dark_sigma,
        dark_patch: args.dark_patch,
        dark_quantile: args.dark_quantile,
        lambda1: args.lambda1,
        nsr: args.nsr,
        composite: args.composite.into(),
        solver: SolverOptions { tol_fraction: args.tol_fraction, ..Default::default() },
    }
}

/// Glare removal with the kernel rasterised for the image size.
pub fn process(
    img: &RadianceMap,
    params: &GsfParams,
    opts: &DeglareOptions,
) -> CliResult<(RadianceMap, DeglareReport)> {
    let kernel = rasterize_kernel(params, img.width(), img.height())?;
    let (out, report) = deglare(img, &kernel, opts)?;
    if !report.constraints_satisfied() {
        log::warn!("constraint residuals outside tolerance: {:?}", report.unsaturated_residual_min);
    }
    Ok((out, report))
}

pub fn run(args: &DeglareArgs) -> CliResult<()> {
    let params: GsfParams = read_json(&args.gsf)?;
    params.validate()?;
    let opts = options(args);
    let jobs = batch::plan(&args.input, &args.out, args.report.as_deref())?;
    batch::run(
        &jobs,
        |job| process(&load_image(&job.input)?, &params, &opts),
        |job, (out, report)| {
            save_image(&out, &job.output)?;
            if let Some(r) = &job.report {
                write_json(r, &report)?;
            }
            Ok(())
        },
    )
}
