//! One error type across the binary, with the exit-code and machine-code
//! mapping of the command-line contract: 2 for configuration problems, 3 for
//! numerical ones, 1 reserved for failed verification checks (which are not
//! errors and never reach this type).

use krein_bie::boundary_conditions::BoundaryError;
use krein_bie::extension_core::ExtensionError;
use krein_bie::geometry::GeometryError;
use krein_bie::kernels::KernelError;
use krein_bie::krein_solver::SolverError;
use krein_bie::layer_ops::LayerError;
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("boundary data: {0}")]
    Boundary(#[from] BoundaryError),
    #[error("kernel: {0}")]
    Kernel(#[from] KernelError),
    #[error("layer operator: {0}")]
    Layer(#[from] LayerError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("extension model: {0}")]
    Extension(#[from] ExtensionError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Config(ConfigError::Geometry(e))
    }
}

impl CliError {
    /// 2 = config error, 3 = numerical/runtime failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Boundary(_) => 2,
            _ => 3,
        }
    }

    /// Stable snake_case tag for the JSON error report.
    pub fn machine_code(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Unreadable { .. }) => "config_unreadable",
            CliError::Config(ConfigError::Parse(_)) => "config_parse",
            CliError::Config(ConfigError::Coefficient { .. }) => "config_coefficient",
            CliError::Config(ConfigError::TaskMismatch { .. }) => "config_task_mismatch",
            CliError::Config(ConfigError::MissingArcNodes) => "config_missing_arc_nodes",
            CliError::Config(ConfigError::BadHalfwidth(_)) => "config_bad_halfwidth",
            CliError::Config(ConfigError::ScatterBackground(_)) => "config_scatter_background",
            CliError::Config(ConfigError::Geometry(_)) => "config_geometry",
            CliError::Boundary(_) => "boundary_data",
            CliError::Kernel(_) => "kernel",
            CliError::Layer(_) => "layer_evaluation",
            CliError::Solver(SolverError::SingularBlock { .. }) => "singular_block",
            CliError::Solver(_) => "solver",
            CliError::Extension(_) => "extension_model",
            CliError::Io(_) => "io",
        }
    }
}
