use thiserror::Error;

/// Errors produced by the simulation and analysis pipeline.
///
/// The variants map one-to-one onto the CLI exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter, configuration file or override.
    #[error("configuration error: {0}")]
    Config(String),

    /// The integrator produced a genuinely negative or non-finite state.
    #[error("integration blow-up at t = {t}{}: state = [{}, {}, {}] ({reason})", seed_note(seed), state[0], state[1], state[2])]
    Blowup { t: f64, state: [f64; 3], reason: String, seed: Option<u64> },

    /// A closed-form quantity could not be evaluated.
    #[error("analysis error: {0}")]
    Analysis(String),

    /// An operation was called on parameters it does not apply to.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn seed_note(seed: &Option<u64>) -> String {
    seed.map_or_else(String::new, |s| format!(" (seed {s})"))
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Tag a blow-up with the noise seed that produced it.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Error::Blowup { t, state, reason, .. } => Error::Blowup { t, state, reason, seed: Some(seed) },
            other => other,
        }
    }

    /// Process exit code: 1 configuration, 2 integration blow-up, 3 analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Json(_) | Error::Io(_) => 1,
            Error::Blowup { .. } => 2,
            Error::Analysis(_) => 3,
        }
    }
}
