//! Single-file and directory batch handling.
//!
//! In batch mode every `.pfm`/`.png` file of the input directory is
//! processed on the worker pool; results are written afterwards in sorted
//! input order so output files and logs do not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// One unit of work: input image, output image, optional report path.
#[derive(Debug, Clone)]
pub struct Job {
    pub input: PathBuf,
    pub output: PathBuf,
    pub report: Option<PathBuf>,
}

fn is_image(path: &Path) -> bool {
    matches!(path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase()).as_deref(), Some("pfm" | "png"))
}

/// Expands `input`/`output` into jobs. A directory input requires a
/// directory output (created if missing); `report` is then a directory too.
pub fn plan(input: &Path, output: &Path, report: Option<&Path>) -> CliResult<Vec<Job>> {
    if !input.is_dir() {
        return Ok(vec![Job { input: input.into(), output: output.into(), report: report.map(Into::into) }]);
    }
    if output.exists() && !output.is_dir() {
        return Err(CliError::Batch(format!("{} is a directory but {} is not", input.display(), output.display())));
    }
    fs::create_dir_all(output)?;
    if let Some(r) = report {
        fs::create_dir_all(r)?;
    }
    let mut inputs: Vec<PathBuf> = fs::read_dir(input)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    inputs.retain(|p| p.is_file() && is_image(p));
    inputs.sort();
    if inputs.is_empty() {
        return Err(CliError::Batch(format!("no .pfm or .png files in {}", input.display())));
    }
    Ok(inputs
        .into_iter()
        .map(|p| {
            let name = p.file_name().expect("listed file has a name").to_owned();
            let stem = p.file_stem().expect("listed file has a stem").to_string_lossy().into_owned();
            Job { output: output.join(&name), report: report.map(|r| r.join(format!("{stem}.json"))), input: p }
        })
        .collect())
}

/// Runs `work` over all jobs in parallel, then `finish` sequentially in job
/// order. The first error in job order is returned.
pub fn run<T, W, F>(jobs: &[Job], work: W, mut finish: F) -> CliResult<()>
where
    T: Send,
    W: Fn(&Job) -> CliResult<T> + Sync,
    F: FnMut(&Job, T) -> CliResult<()>,
{
    let results: Vec<CliResult<T>> = jobs.par_iter().map(&work).collect();
    for (job, r) in jobs.iter().zip(results) {
        finish(job, r?)?;
        log::info!("wrote {}", job.output.display());
    }
    Ok(())
}
