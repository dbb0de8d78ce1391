//! Dense complex linear algebra, polynomials and quadrature.

mod jet;
mod linalg;
mod matrix;
mod poly;
mod quad;
mod roots;

pub use jet::Jet;
pub use linalg::{
    lstsq, lstsq_with_tol, null_vector, null_vector_with_tol, singular_values, DEFAULT_RANK_TOL,
    NORMALIZATION_FLOOR,
};
pub use matrix::ComplexMatrix;
pub use poly::{ComplexPoly, RealPoly};
pub use quad::{integrate, QuadratureSpec};
pub use roots::poly_roots;
