use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A constructor or operation received an out-of-range input.
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: String },

    #[error("matrix row {index} is not strictly diagonally dominant")]
    NotDiagonallyDominant { index: usize },

    #[error("zero pivot at row {index}")]
    ZeroPivot { index: usize },

    #[error("non-finite value in `{field}` at node {index}")]
    NonFinite { field: &'static str, index: usize },

    /// Density vanishes at a finite point; the entropy is not defined there.
    #[error("interior vacuum: rho0 = {value} at y = {y}")]
    InteriorVacuum { y: f64, value: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("every node in the evaluated region is masked (theta below floor)")]
    EmptyRegion,

    #[error("ladder is not monotone: level {level} has value {value} against neighbour {neighbour}")]
    NonMonotoneLadder { level: f64, value: f64, neighbour: f64 },

    /// The step controller hit its floor; the last accepted state is kept
    /// for post-mortem inspection.
    #[error("solver aborted at t = {t} with dt = {dt}: {reason}")]
    Aborted {
        t: f64,
        dt: f64,
        reason: String,
        state: Box<crate::SimState>,
    },

    #[error("table error: {0}")]
    Table(String),
}

pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        field,
        reason: reason.into(),
    }
}
