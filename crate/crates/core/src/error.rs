use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coefficients outside the model's validity: {0}")]
    OutOfModel(&'static str),

    #[error("trajectory {trajectory} diverged at step {step} (|A| = {amplitude:e})")]
    Divergence {
        trajectory: usize,
        step: usize,
        amplitude: f64,
    },

    #[error(
        "normalization cross-check failed: closed form {closed_form:e} vs quadrature {quadrature:e}"
    )]
    NormalizationMismatch { closed_form: f64, quadrature: f64 },

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("parameters are not identifiable: {0}")]
    Unidentifiable(&'static str),

    #[error("demodulation failed: {0}")]
    Demodulation(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. } | Error::NormalizationMismatch { .. }
        )
    }
}
