use thiserror::Error;

/// Errors produced by the model, solver and sweep layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Rejected configuration value.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Malformed config document (unknown key, wrong type, bad JSON).
    #[error("config parse error: {0}")]
    ConfigParse(String),

    /// A denominator of the closed-form response vanished: the parameter
    /// point sits on a resonance pole.
    #[error("degenerate denominator `{which}` (scaled magnitude {magnitude:e})")]
    DegenerateDenominator { which: String, magnitude: f64 },

    /// Partial pivoting found no usable pivot.
    #[error("singular steady-state system at column {column} (best scaled pivot {pivot:e})")]
    SingularSystem { column: usize, pivot: f64 },

    /// Finite-difference extraction is not in the linear regime.
    #[error("nonlinear regime for {coefficient}: {detail}")]
    NonlinearRegime { coefficient: String, detail: String },

    #[error("sweep spec invalid: {0}")]
    Spec(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
