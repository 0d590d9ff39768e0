use thiserror::Error;

/// Errors raised by model construction, transformation and integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdmError {
    #[error("invalid parameter `{param}`: {reason}")]
    InvalidParameter { param: &'static str, reason: String },

    #[error("x = {x} lies outside the domain ({lo}, {hi})")]
    DomainViolation { x: f64, lo: f64, hi: f64 },

    #[error("empty domain")]
    EmptyDomain,

    #[error("quadrature did not converge on [{a}, {b}]: achieved error {achieved:e}")]
    QuadratureNonConvergence { a: f64, b: f64, achieved: f64 },

    #[error("q({lo}) = {q_lo} and q({hi}) = {q_hi} do not bracket {target}")]
    NoBracket {
        lo: f64,
        hi: f64,
        q_lo: f64,
        q_hi: f64,
        target: f64,
    },

    #[error("the nonlocal map is not monotone on its domain")]
    NonMonotone,

    #[error("division by zero: f({x}) = 0")]
    DivisionByZero { x: f64 },

    #[error("unknown model family `{0}`")]
    UnknownFamily(String),

    #[error("invalid amplitude: {0}")]
    InvalidAmplitude(String),

    #[error("trajectory left the domain at t = {t} (x = {x})")]
    DomainEscape { t: f64, x: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),

    #[error("period estimation needs at least 3 crossings, found {found}")]
    InsufficientCycles { found: usize },

    #[error("rescaled time is not strictly monotone along the trajectory")]
    NonMonotoneTau,

    #[error("model document: {0}")]
    Document(String),
}

impl PdmError {
    pub(crate) fn invalid(param: &'static str, reason: impl Into<String>) -> Self {
        PdmError::InvalidParameter {
            param,
            reason: reason.into(),
        }
    }

    /// Stable snake-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            PdmError::InvalidParameter { .. } => "invalid_parameter",
            PdmError::DomainViolation { .. } => "domain_violation",
            PdmError::EmptyDomain => "empty_domain",
            PdmError::QuadratureNonConvergence { .. } => "quadrature_non_convergence",
            PdmError::NoBracket { .. } => "no_bracket",
            PdmError::NonMonotone => "non_monotone",
            PdmError::DivisionByZero { .. } => "division_by_zero",
            PdmError::UnknownFamily(_) => "unknown_family",
            PdmError::InvalidAmplitude(_) => "invalid_amplitude",
            PdmError::DomainEscape { .. } => "domain_escape",
            PdmError::StepUnderflow { .. } => "step_underflow",
            PdmError::TooManySteps(_) => "too_many_steps",
            PdmError::InsufficientCycles { .. } => "insufficient_cycles",
            PdmError::NonMonotoneTau => "non_monotone_tau",
            PdmError::Document(_) => "document",
        }
    }

    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            PdmError::InvalidParameter { .. }
                | PdmError::UnknownFamily(_)
                | PdmError::InvalidAmplitude(_)
                | PdmError::Document(_)
                | PdmError::EmptyDomain
        )
    }
}

pub type Result<T> = std::result::Result<T, PdmError>;
