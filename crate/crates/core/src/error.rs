use thiserror::Error;

/// Errors raised by the inference engine.
#[derive(Debug, Error)]
pub enum AbcError {
    /// Caller passed arguments that violate an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// Every importance weight (or every kernel value) was zero.
    #[error("degenerate sample: {reason} (minimum discrepancy seen: {min_discrepancy})")]
    DegenerateSample {
        reason: String,
        min_discrepancy: f64,
    },

    /// A summary component had zero spread in the pilot runs.
    #[error("calibration failed: summary component {component} has zero {measure}")]
    Calibration {
        component: usize,
        measure: &'static str,
    },

    /// No starting state with positive kernel weight was found.
    #[error("initialisation failed after {attempts} attempts (minimum discrepancy seen: {min_discrepancy})")]
    Init {
        attempts: usize,
        min_discrepancy: f64,
    },

    /// The model cannot simulate what the requested method needs.
    #[error("model '{model}' lacks the '{capability}' simulation capability")]
    MissingCapability {
        model: String,
        capability: &'static str,
    },

    /// Closed-form coefficient has a vanishing geometric-sum denominator.
    #[error("singular case: {0}")]
    Singular(String),

    /// Numerical linear algebra failed (matrix not positive definite).
    #[error("linear algebra failure: {0}")]
    Numerical(String),

    /// An internal invariant was broken; indicates a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Experiment configuration failed validation. All problems are listed.
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("oracle not comparable: {0}")]
    NotComparable(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl AbcError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        AbcError::Usage(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        AbcError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short machine-readable tag for JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            AbcError::Usage(_) => "usage",
            AbcError::DegenerateSample { .. } => "degenerate_sample",
            AbcError::Calibration { .. } => "calibration",
            AbcError::Init { .. } => "init",
            AbcError::MissingCapability { .. } => "missing_capability",
            AbcError::Singular(_) => "singular",
            AbcError::Numerical(_) => "numerical",
            AbcError::Invariant(_) => "invariant",
            AbcError::Config(_) => "config",
            AbcError::NotComparable(_) => "not_comparable",
            AbcError::Io { .. } => "io",
            AbcError::Parse(_) => "parse",
        }
    }
}

pub type Result<T, E = AbcError> = std::result::Result<T, E>;
