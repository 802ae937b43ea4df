use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid product space: {0}")]
    InvalidSpace(String),

    #[error("point {point} does not belong to the declared space")]
    PointOutsideSpace { point: String },

    #[error("mass at {point} is negative ({mass})")]
    NegativeMass { point: String, mass: String },

    #[error("total mass {total} exceeds 1")]
    MassExceedsOne { total: String },

    #[error("{what} must be a probability mass function (total mass {total})")]
    NotProbability { what: String, total: String },

    #[error("window {window} out of range: space has {coordinates} coordinates")]
    WindowOutOfRange { window: usize, coordinates: usize },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),

    #[error("density convergence fails in window {window}")]
    NotConvergent { window: usize },

    #[error("internal consistency violation: {0}")]
    Internal(String),

    #[error("joint support of {size} atoms exceeds the enumeration cap {cap}")]
    TooLarge { size: u128, cap: u128 },

    #[error("invalid metric model: {0}")]
    InvalidMetric(String),

    #[error("limit law puts mass {outside} outside the separable support")]
    SeparabilityViolation { outside: String },

    #[error("invalid rational {0:?}")]
    ParseRational(String),

    #[error("malformed document: {0}")]
    Document(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
