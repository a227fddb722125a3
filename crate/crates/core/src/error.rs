use thiserror::Error;

/// Errors produced by the lab.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} overflows the double range; use the log-space form")]
    Overflow(&'static str),

    /// An internal cross-check failed. Always an implementation or transcription bug.
    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("polynomial is not C-monic of even degree; {0} requires C-monic input")]
    NotPaperMode(&'static str),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepFailure { t: f64, h: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("orbit escaped radius {radius} at t = {t}")]
    Escape { t: f64, radius: f64 },

    #[error("no return to the section before t = {0}")]
    NoReturn(f64),

    #[error("non-isolated fixed points near y = {y}: displacement vanishes on {run} consecutive grid points")]
    Annulus { y: f64, run: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidPolynomial(_) => "invalid_polynomial",
            Error::InvalidParams(_) => "invalid_params",
            Error::Domain(_) => "domain",
            Error::Overflow(_) => "overflow",
            Error::Consistency(_) => "consistency",
            Error::Degenerate(_) => "degenerate",
            Error::NotPaperMode(_) => "not_paper_mode",
            Error::StepFailure { .. } => "step_failure",
            Error::MaxSteps(_) => "max_steps",
            Error::Escape { .. } => "escape",
            Error::NoReturn(_) => "no_return",
            Error::Annulus { .. } => "annulus",
        }
    }

    /// Whether the error is about the input rather than the computation.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidPolynomial(_) | Error::InvalidParams(_) | Error::Domain(_) | Error::NotPaperMode(_)
        )
    }
}
