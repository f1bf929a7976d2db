use thiserror::Error;

/// Errors raised by the glarekit library.
///
/// Every variant maps to a stable, module-qualified code (see [`Error::code`])
/// that front ends can surface in machine-readable form.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid radiance data: {0}")]
    InvalidData(String),

    #[error("degenerate white patch: channel {channel} has mean {mean}")]
    DegeneratePatch { channel: usize, mean: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("exposure stack error: {0}")]
    Stack(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid GSF parameters: {0}")]
    Parameter(String),

    #[error("kernel mismatch: {0}")]
    Kernel(String),

    #[error("objective is not finite for scene `{scene}`")]
    Objective { scene: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("saturated-radiance estimation diverged after {iterations} iterations")]
    Estimation { iterations: usize, objective: f64 },

    #[error("scene spec error: {0}")]
    Spec(String),

    #[error("undefined metric: {0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Module-qualified error code, e.g. `"gsf.parameter"`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "radiance.dimension",
            Error::InvalidData(_) => "radiance.invalid_data",
            Error::DegeneratePatch { .. } => "radiance.degenerate_patch",
            Error::Format(_) => "radiance.format",
            Error::Stack(_) => "hdrmerge.stack",
            Error::Argument(_) => "argument",
            Error::Parameter(_) => "gsf.parameter",
            Error::Kernel(_) => "gsf.kernel",
            Error::Objective { .. } => "calib.objective",
            Error::Validation(_) => "calib.validation",
            Error::Degenerate(_) => "deglare.degenerate",
            Error::Estimation { .. } => "deglare.estimation",
            Error::Spec(_) => "synth.spec",
            Error::Undefined(_) => "metrics.undefined",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
