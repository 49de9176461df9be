//! Error taxonomy mapped onto process exit codes: 2 for configuration
//! problems, 3 for resource caps, 4 for numerical failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource cap: {0}")]
    ResourceCap(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::ResourceCap(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 2,
        }
    }
}

impl From<qaoa_core::graphs::GraphError> for CliError {
    fn from(e: qaoa_core::graphs::GraphError) -> Self {
        use qaoa_core::graphs::GraphError::*;
        match e {
            OracleCapExceeded { .. } => CliError::ResourceCap(e.to_string()),
            GenerationFailed { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<qaoa_core::qsim::SimError> for CliError {
    fn from(e: qaoa_core::qsim::SimError) -> Self {
        use qaoa_core::qsim::SimError::*;
        match e {
            TooManyQubits { .. } => CliError::ResourceCap(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<qaoa_core::init::InitError> for CliError {
    fn from(e: qaoa_core::init::InitError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<qaoa_core::gnn::GnnError> for CliError {
    fn from(e: qaoa_core::gnn::GnnError) -> Self {
        use qaoa_core::gnn::GnnError::*;
        match e {
            Diverged { .. } => CliError::Numerical(e.to_string()),
            Graph(g) => g.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<qaoa_core::optim::OptimError> for CliError {
    fn from(e: qaoa_core::optim::OptimError) -> Self {
        use qaoa_core::optim::OptimError::*;
        match e {
            NonFiniteCost { .. } => CliError::Numerical(e.to_string()),
            Graph(g) => g.into(),
            Sim(s) => s.into(),
            BadConfig(msg) => CliError::Config(msg),
        }
    }
}

impl From<qaoa_core::neuralopt::NeuralOptError> for CliError {
    fn from(e: qaoa_core::neuralopt::NeuralOptError) -> Self {
        use qaoa_core::neuralopt::NeuralOptError::*;
        match e {
            Diverged { .. } => CliError::Numerical(e.to_string()),
            Graph(g) => g.into(),
            Sim(s) => s.into(),
            Optim(o) => o.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}
