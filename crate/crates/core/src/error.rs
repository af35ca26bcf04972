use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("a11 must be positive, got {0}")]
    NonPositiveA11(f64),

    #[error(
        "state is not square-integrable: need a11^2 - a12^2 > 0, i.e. |a12| < a11 (got a11 = {a11}, a12 = {a12})"
    )]
    NotSquareIntegrable { a11: f64, a12: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("temperature must be non-negative, got {0}")]
    NegativeTemperature(f64),

    #[error(
        "drift velocities with v1^2 != v2^2 (v1 = {v1}, v2 = {v2}) cannot be held in a symmetric moment set"
    )]
    AsymmetricDrift { v1: f64, v2: f64 },

    #[error("invalid moment set: {0}")]
    InvalidMoments(String),

    #[error("determinant invariants do not describe a physical state: {0}")]
    InfeasibleInvariants(String),

    #[error("monte carlo needs at least one sample and a positive batch size")]
    EmptySampling,

    #[error(
        "quadrature spec below accuracy contract: need half_width >= {min_half_width} and points_per_axis >= {min_points} (got {half_width}, {points})"
    )]
    QuadratureTooCoarse {
        half_width: f64,
        points: usize,
        min_half_width: f64,
        min_points: usize,
    },

    #[error("unknown check '{0}'")]
    UnknownCheck(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
