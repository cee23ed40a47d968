use thiserror::Error;

/// Errors raised by the billiard and geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curvature radius has a first harmonic of magnitude {0:e}; the curve does not close")]
    NonClosedCurve(f64),
    #[error("non-convex: minimum curvature radius {0:e} is not positive")]
    NonConvex(f64),
    #[error("harmonic index {0} is invalid (need n >= 4)")]
    InvalidHarmonic(usize),
    #[error("index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("degree {0} exceeds the supported maximum of {max}", max = crate::trig::MAX_DEGREE)]
    DegreeTooHigh(usize),
    #[error("degenerate chord: phi2 - phi1 = {0} is outside (0, 2pi)")]
    DegenerateChord(f64),
    #[error("line does not intersect the table")]
    NoIntersection,
    #[error("line is tangent to the table")]
    TangentLine,
    #[error("root finder did not converge: {0}")]
    ConvergenceFailure(&'static str),
    #[error("vector is not unit length (norm {0})")]
    NonUnit(f64),
    #[error("directions coincide")]
    CoincidentDirections,
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("initial condition is off the surface or not tangent (residual {0:e})")]
    OffSurface(f64),
    #[error("step too large: constraint defect {0:e} per step")]
    StepTooLarge(f64),
    #[error("curvature {0:e} is too small for a Frenet frame")]
    DegenerateCurvature(f64),
    #[error("chord ray does not leave the surface")]
    NoExit,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
