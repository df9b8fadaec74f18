use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0}")]
    Domain(String),

    #[error("x = {x} outside sampled range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("non-finite integrand or right-hand side at x = {x}")]
    NonFinite { x: f64 },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),

    #[error("ODE step budget of {steps} exhausted at t = {t}")]
    StepLimit { steps: usize, t: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("grid coverage: {0}")]
    Coverage(String),

    #[error("stability bound violated: {0}")]
    Stability(String),

    #[error("validity window: {0}")]
    Validity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn require_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite, got {x}")))
    }
}
