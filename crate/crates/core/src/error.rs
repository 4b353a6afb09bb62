use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pose pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("invalid arm model: {0}")]
    ModelInvariant(String),

    #[error("joint `{joint}` angle {angle_deg}° outside limit [{min_deg}°, {max_deg}°]")]
    JointLimit {
        joint: &'static str,
        angle_deg: f64,
        min_deg: f64,
        max_deg: f64,
    },

    #[error("behind camera: {0}")]
    BehindCamera(String),

    #[error("only {found} keypoints pass the confidence gate, need at least {required}")]
    InsufficientKeypoints { found: usize, required: usize },

    #[error("no restart converged within {max_iterations} iterations")]
    NoConvergence { max_iterations: usize },

    #[error("scene sampling gave up after {attempts} rejections")]
    SamplingExhausted { attempts: usize },

    #[error("target unreachable: {0}")]
    Unreachable(String),

    #[error("no matching pair for image id `{0}`")]
    MissingPair(String),

    #[error("nothing to evaluate: {0}")]
    EmptyEval(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable code, used by the CLI's structured error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse_error",
            Error::ModelInvariant(_) => "model_invariant_error",
            Error::JointLimit { .. } => "joint_limit_error",
            Error::BehindCamera(_) => "behind_camera_error",
            Error::InsufficientKeypoints { .. } => "insufficient_keypoints_error",
            Error::NoConvergence { .. } => "no_convergence_error",
            Error::SamplingExhausted { .. } => "sampling_exhausted_error",
            Error::Unreachable(_) => "unreachable_error",
            Error::MissingPair(_) => "missing_pair_error",
            Error::EmptyEval(_) => "empty_eval_error",
            Error::InvalidInput(_) => "invalid_input_error",
            Error::Io { .. } => "io_error",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
