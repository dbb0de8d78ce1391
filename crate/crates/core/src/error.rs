use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, GopError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GopError {
    #[error("matrix is rank deficient (sigma ratio {ratio:.3e} below tolerance {tol:.1e})")]
    RankDeficient { ratio: f64, tol: f64 },

    #[error("null vector has vanishing last component (|p_M| = {0:.3e})")]
    DegenerateNormalization(f64),

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    DomainViolation { x: f64, lo: f64, hi: f64 },

    #[error("parameter {0} lies outside the admissible eigenvalue region")]
    RegionViolation(Complex64),

    #[error("root {0} has no preimage under the spectral map")]
    BranchViolation(Complex64),

    #[error("sample point escapes the domain: {0}")]
    DomainEscape(String),

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {error:.3e}, {panels} panels)")]
    QuadratureFailure { a: f64, b: f64, error: f64, panels: usize },

    #[error("kernel derivative of order {order} does not vanish at x = {x} (value {value:.3e})")]
    BoundaryViolation { order: usize, x: f64, value: f64 },

    #[error("sampling functionals are not admissible (sigma ratio {0:.3e})")]
    AdmissibilityFailure(f64),

    #[error("missing measurement `{0}`")]
    MissingMeasurement(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
