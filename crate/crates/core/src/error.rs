use thiserror::Error;

/// Errors raised by the model and its solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("field-ensemble coupling must be strictly positive, got {0}")]
    NonPositiveCoupling(f64),

    #[error("condensate size must be at least 1, got {0}")]
    TooFewQubits(f64),

    #[error("point z = {z} lies outside the admissible domain (k = {k})")]
    OutOfDomain { z: f64, k: f64 },

    #[error("point z = {z} sits on the singular boundary (k = {k})")]
    Singular { z: f64, k: f64 },

    #[error("excitation ratio is undefined at z = 0")]
    ZeroPopulation,

    #[error("negative discriminant {discriminant} at z = {z}")]
    NegativeDiscriminant { z: f64, discriminant: f64 },

    #[error("no real bounds: delta * lambda_ratio = {0} exceeds 1")]
    NoRealBounds(f64),

    #[error("no exclusion band: lambda_ratio is zero")]
    NoExclusionBand,

    #[error("lambda_ratio must be strictly positive, got {0}")]
    NonPositiveRatio(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
