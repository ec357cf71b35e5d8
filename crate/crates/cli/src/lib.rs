//! File formats, the end-to-end pipeline and the `foveate` command line
//! on top of `foveate-core`.

pub mod bench;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod png;
pub mod synth;
pub mod train;
pub mod viz;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
