use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{0}")]
    Validation(String),
    /// Bad flag or config value.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] foveate_core::Error),
    #[error("{stage} failed for class {class}{}: {source}", cluster.map(|c| format!(", cluster {c}")).unwrap_or_default())]
    Stage {
        stage: &'static str,
        class: String,
        cluster: Option<usize>,
        #[source]
        source: Box<CliError>,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit status: 2 for usage and configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(foveate_core::Error::InvalidArgument(_)) => 2,
            _ => 1,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str, class: &str, cluster: Option<usize>) -> Self {
        CliError::Stage {
            stage,
            class: class.to_string(),
            cluster,
            source: Box::new(self),
        }
    }
}
