use glarekit::calib::{fit_joint_gsf, load_manifest, validate_and_tune, FitOptions, SimplexOptions};
use glarekit::GsfParams;

use super::{read_json, write_json};
use crate::cli::CalibrateArgs;
use crate::error::CliResult;

pub fn run(args: &CalibrateArgs) -> CliResult<()> {
    let train = load_manifest(&args.manifest)?;
    let init: GsfParams = match &args.init {
        Some(p) => read_json(p)?,
        None => GsfParams::default(),
    };
    let opts = FitOptions {
        simplex: SimplexOptions { max_iterations: args.max_iterations, ..Default::default() },
        ..Default::default()
    };
    log::info!("fitting {} scenes", train.scenes().len());
    match &args.holdout {
        Some(h) => {
            let holdout = load_manifest(h)?;
            let tuned =
                validate_and_tune(&train, holdout.scenes(), &args.lambda_grid, args.alpha_policy, &init, &opts)?;
            log::info!("selected lambda {} with hold-out error {}", tuned.lambda, tuned.holdout_error);
            write_json(&args.out, &tuned.params)?;
            if let Some(r) = &args.report {
                write_json(r, &tuned)?;
            }
        }
        None => {
            let fit = fit_joint_gsf(&train, &init, &opts)?;
            log::info!("objective {} after {} iterations", fit.final_objective, fit.iterations);
            write_json(&args.out, &fit.params)?;
            if let Some(r) = &args.report {
                write_json(r, &fit)?;
            }
        }
    }
    Ok(())
}
