use thiserror::Error;

/// Errors raised by model construction, simulation, and the theoretical targets.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or model parameter is out of range. `field` is the
    /// dotted path of the offending value, e.g. `ground.lambda`.
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("orientation distribution has atoms; the asymptotic results need a continuous G")]
    DiscontinuousOrientation,

    #[error("operation `{0}` is only defined for a Poisson ground process")]
    NotPoisson(&'static str),

    #[error(
        "asymptotic variance is not positive (term1 = {term1:.6e}, term2 = {term2:.6e}); \
         configuration is outside the regime covered by the variance formula"
    )]
    NonPositiveVariance { term1: f64, term2: f64 },

    #[error("two evaluations of `{constant}` disagree: {primary:.10e} vs {alternative:.10e}")]
    ConstantMismatch {
        constant: &'static str,
        primary: f64,
        alternative: f64,
    },

    #[error("quadrature did not converge: achieved error {achieved:.3e} after {evaluations} evaluations")]
    Quadrature { achieved: f64, evaluations: usize },
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
