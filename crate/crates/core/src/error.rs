use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NehariError {
    #[error("grid size {0} must be a power of two and at least 4")]
    BadGridSize(usize),
    #[error("support width {width} does not fit on a grid of size {grid}")]
    SupportTooWide { width: usize, grid: usize },
    #[error("truncation order must be at least 1 (got {0})")]
    BadOrder(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("operator has rank zero; {0} is undefined")]
    RankZero(&'static str),
    #[error("top singular value is not simple (sigma1 = {sigma1}, sigma2 = {sigma2})")]
    DegenerateSigma { sigma1: f64, sigma2: f64 },
    #[error("|Ry| fell below the floor on {excluded} of {grid} grid points")]
    IllConditionedDivision { excluded: usize, grid: usize },
    #[error("candidate approximant has coefficients outside n >= 1")]
    NotAnticausal,
    #[error("function must be supported on n <= 0")]
    NotCausal,
    #[error("function comes within {min_modulus:e} of zero on the grid")]
    NearZero { min_modulus: f64 },
    #[error("zero at distance {distance:e} from the unit circle")]
    RootNearCircle { distance: f64 },
    #[error("Blaschke zero must lie strictly inside the disk (|w0| = {modulus})")]
    ZeroOutsideDisk { modulus: f64 },
    #[error("rational symbol has a pole too close to or outside the unit circle (|pole| = {pole_modulus})")]
    PoleOutsideDisk { pole_modulus: f64 },
    #[error("denominator constant term must be nonzero")]
    ZeroDenominator,
    #[error("root finding failed: {0}")]
    RootFinding(String),
}
