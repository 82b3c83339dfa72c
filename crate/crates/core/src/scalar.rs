//! Scalar abstraction shared by the polynomial, foliation and integration layers.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type underlying the complex coefficients: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    /// Maps a tolerance calibrated for `f64` onto this type by preserving the
    /// fraction of significant digits it represents.
    ///
    /// For `f64` this is the identity. For `f32`, `1e-12` (about 75% of the
    /// available digits) becomes roughly `5e-6`.
    fn tol(tol_f64: f64) -> Self {
        let e64 = f64::EPSILON.ln();
        let mine = Self::epsilon().to_f64().expect("epsilon fits f64").ln();
        if (mine - e64).abs() < 1e-12 {
            return Self::lit(tol_f64);
        }
        Self::lit(tol_f64.ln() * mine / e64).exp()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the real type `T`.
pub type C<T> = Complex<T>;

/// Modulus that is robust against overflow, used for scale estimates.
#[inline]
pub fn cabs<T: Real>(z: C<T>) -> T {
    z.re.hypot(z.im)
}

/// `true` when both components are finite.
#[inline]
pub fn is_finite<T: Real>(z: C<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Chordal distance on the Riemann sphere between two finite points.
pub fn chordal<T: Real>(a: C<T>, b: C<T>) -> T {
    let one = T::one();
    cabs(a - b) / ((one + a.norm_sqr()).sqrt() * (one + b.norm_sqr()).sqrt())
}
