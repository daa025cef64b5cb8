use latstat_core::directions::DirectionsError;
use latstat_core::homogeneous::HomogeneousError;
use latstat_core::lorentz::LorentzError;
use latstat_core::pointset::PointsetError;
use latstat_core::window::WindowError;
use thiserror::Error;

/// CLI failure classes, mapped onto the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration: exit 2.
    #[error("{0}")]
    Config(String),
    /// Work refused because it would exceed a resource bound: exit 3.
    #[error("{0}")]
    Resource(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Io { .. } => 2,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> CliError {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<WindowError> for CliError {
    fn from(e: WindowError) -> CliError {
        match e {
            WindowError::LevelTooLarge { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<PointsetError> for CliError {
    fn from(e: PointsetError) -> CliError {
        match e {
            PointsetError::CountBound { .. } => CliError::Resource(e.to_string()),
            PointsetError::Window(w) => w.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<HomogeneousError> for CliError {
    fn from(e: HomogeneousError) -> CliError {
        match e {
            HomogeneousError::LevelTooLarge(_) => CliError::Resource(e.to_string()),
            HomogeneousError::Window(w) => w.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<LorentzError> for CliError {
    fn from(e: LorentzError) -> CliError {
        CliError::Config(e.to_string())
    }
}

impl From<DirectionsError> for CliError {
    fn from(e: DirectionsError) -> CliError {
        CliError::Config(e.to_string())
    }
}
