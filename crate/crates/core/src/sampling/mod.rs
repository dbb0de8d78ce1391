//! Sampling functionals, moment kernels and sampling schemes.

mod catalog;
mod functional;
mod kernel;
mod scheme;

pub use catalog::*;
pub use functional::{
    apply_functional, FnSignal, LinearForm, Measurements, MomentEncoding, RawMeasurement, SamplingFunctional, Signal,
};
pub use kernel::{KernelExpr, KernelTerm, BOUNDARY_TOL};
pub use scheme::{
    assemble_matrix, build_rectangular, build_scheme, Admissibility, SamplingMatrix, Scheme, SchemeOptions,
    WITNESS_TOL,
};
