//! Polynomial arithmetic over complex floating point coefficients.
//!
//! Polynomials have an exact *shape* (degrees, which monomials are present) but
//! approximate coefficient values. Degrees are determined after trimming
//! coefficients that are negligible relative to the largest one, see
//! [`TRIM_TOL`].

mod bipoly;
mod resultant;
mod roots;
mod unipoly;

pub use bipoly::BiPoly;
pub use resultant::{approx_coprime, resultant_y, sylvester_matrix, COPRIME_TOL};
pub use roots::{unipoly_roots, Root, ROOT_CLUSTER_TOL};
pub use unipoly::UniPoly;

use thiserror::Error;

/// Relative threshold below which a coefficient counts as zero when degrees are trimmed.
pub const TRIM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("both polynomials are constant in y")]
    BothConstantInY,
}

/// Convenience: `Complex::new` for `f64` literals.
#[inline]
pub fn c64(re: f64, im: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, im)
}
