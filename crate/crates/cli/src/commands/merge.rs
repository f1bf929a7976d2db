use glarekit::hdrmerge::{load_stack, merge_hdr};
use glarekit::radiance::save_image;

use crate::cli::MergeArgs;
use crate::error::CliResult;

pub fn run(args: &MergeArgs) -> CliResult<()> {
    let stack = load_stack(&args.manifest)?;
    log::info!("merging {} frames", stack.frames().len());
    save_image(&merge_hdr(&stack)?, &args.out)?;
    Ok(())
}
