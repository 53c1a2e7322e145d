use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("sampling error: accepted {accepted} of {requested} points after {attempts} attempts")]
    Sampling {
        requested: usize,
        accepted: usize,
        attempts: usize,
    },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("classification error: {0}")]
    Classification(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("pericenter {pericenter:.6e} is below the domain margin {margin:.3e}")]
    Pericenter { pericenter: f64, margin: f64 },

    #[error("integration became unstable at step {step}")]
    Instability { step: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that come from the numerics (domain exits, blow-ups,
    /// singular loci) rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Evaluation(_)
                | Error::Divergence(_)
                | Error::Pericenter { .. }
                | Error::Instability { .. }
                | Error::Sampling { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
