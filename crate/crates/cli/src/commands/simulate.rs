use glarekit::radiance::{load_image, save_image};
use glarekit::{rasterize_kernel, simulate_glare, GsfParams};

use super::read_json;
use crate::batch;
use crate::cli::SimulateArgs;
use crate::error::CliResult;

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let params: GsfParams = read_json(&args.gsf)?;
    params.validate()?;
    let jobs = batch::plan(&args.input, &args.out, None)?;
    batch::run(
        &jobs,
        |job| {
            let img = load_image(&job.input)?;
            let kernel = rasterize_kernel(&params, img.width(), img.height())?;
            Ok(simulate_glare(&img, &kernel)?)
        },
        |job, out| Ok(save_image(&out, &job.output)?),
    )
}
