//! Glare calibration, simulation and removal for camera imaging pipelines.
//!
//! The crate is organised along the processing chain:
//!
//! - [`radiance`]: linear images, demosaicing, white balance, PFM/PNG I/O
//! - [`hdrmerge`]: point-source rig geometry and exposure-stack merging
//! - [`gsf`]: the parametric glare-spread function and glare simulation
//! - [`calib`]: joint GSF fitting across cameras, validation and tuning
//! - [`deglare`]: saturation-aware glare removal and Wiener deconvolution
//! - [`encode`]: transfer functions and quantisation
//! - [`metrics`]: perception-output scoring (MIoU, AP/mAP, MOTA/MOTP, RMSE)
//! - [`synth`]: synthetic scenes and degradations with recorded ground truth

pub mod calib;
pub mod deglare;
pub mod encode;
pub mod error;
pub mod filter;
pub mod fourier;
pub mod gsf;
pub mod hdrmerge;
pub mod metrics;
pub mod radiance;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use gsf::{eval_gsf, rasterize_kernel, simulate_glare, GsfKernel, GsfParams};
pub use radiance::{RadianceMap, Rect};
