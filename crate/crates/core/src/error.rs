use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad parameters or inconsistent inputs.
    Config,
    /// A mathematical obstruction: degenerate or non-invertible geometry,
    /// singular directions, solver breakdown.
    Math,
    /// Reading or writing files.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("direction ({0}, {1}) is not a unit vector")]
    NotUnit(f64, f64),

    #[error("ray directions are linearly dependent (det = {det:e})")]
    DegenerateGeometry { det: f64 },

    #[error("bump support (|center| + scale = {reach}) leaves the disc of radius {r1}")]
    SupportLeak { reach: f64, r1: f64 },

    #[error("grid support radius {have} is too small for this geometry (needs {need})")]
    SupportRadius { have: f64, need: f64 },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("direction is orthogonal to ray {index} (psi . gamma = {dot:e})")]
    SingularType1 { index: usize, dot: f64 },

    #[error("gamma(psi) vanishes (|gamma| = {norm:e})")]
    SingularType2 { norm: f64 },

    #[error("star geometry is symmetric and therefore not invertible")]
    NotInvertible,

    #[error("invalid star geometry: {0}")]
    InvalidStar(String),

    #[error("rhombus with corner ({0}, {1}) leaves the data disc")]
    RhombusOutsideData(f64, f64),

    #[error("{0}")]
    Config(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidGrid(_)
            | Error::GridMismatch
            | Error::NotUnit(..)
            | Error::SupportLeak { .. }
            | Error::SupportRadius { .. }
            | Error::InvalidStar(_)
            | Error::RhombusOutsideData(..)
            | Error::Config(_) => ErrorClass::Config,
            Error::DegenerateGeometry { .. }
            | Error::SolverDiverged { .. }
            | Error::SingularType1 { .. }
            | Error::SingularType2 { .. }
            | Error::NotInvertible => ErrorClass::Math,
            Error::Format(_) | Error::Io(_) => ErrorClass::Io,
        }
    }
}
