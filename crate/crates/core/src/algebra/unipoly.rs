use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::TRIM_TOL;
use crate::scalar::{cabs, Real, C};

/// Univariate polynomial, `coeffs[i]` multiplies `z^i`.
///
/// The coefficient vector is kept trimmed: the leading coefficient is larger
/// than `TRIM_TOL` times the largest coefficient. The zero polynomial has an
/// empty coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly<T: Real> {
    coeffs: Vec<C<T>>,
}

impl<T: Real> UniPoly<T> {
    pub fn new(mut coeffs: Vec<C<T>>) -> Self {
        let max = coeffs.iter().map(|c| cabs(*c)).fold(T::zero(), T::max);
        if max == T::zero() {
            coeffs.clear();
        } else {
            let cut = T::tol(TRIM_TOL) * max;
            while coeffs.last().is_some_and(|c| cabs(*c) <= cut) {
                coeffs.pop();
            }
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C<T>) -> Self {
        Self::new(vec![c])
    }

    /// Polynomial with real coefficients, lowest power first.
    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C::new(T::lit(c), T::zero())).collect())
    }

    /// `lead * prod (z - r)`.
    pub fn from_roots(roots: &[C<T>], lead: C<T>) -> Self {
        let mut out = vec![lead];
        for &r in roots {
            let mut next = vec![C::zero(); out.len() + 1];
            for (i, &c) in out.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            out = next;
        }
        Self { coeffs: out }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn leading(&self) -> C<T> {
        self.coeffs.last().copied().unwrap_or_else(C::zero)
    }

    pub fn max_coeff(&self) -> T {
        self.coeffs.iter().map(|c| cabs(*c)).fold(T::zero(), T::max)
    }

    pub fn eval(&self, z: C<T>) -> C<T> {
        self.coeffs.iter().rev().fold(C::zero(), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: C<T>) -> (C<T>, C<T>) {
        let mut p = C::zero();
        let mut dp = C::zero();
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * T::from_usize(i).unwrap()).collect();
        Self::new(coeffs)
    }

    /// Coefficients of `h -> p(center + h)`, i.e. `p^(j)(center) / j!`.
    pub fn taylor_at(&self, center: C<T>) -> Vec<C<T>> {
        let mut t = self.coeffs.clone();
        let n = t.len();
        // repeated synthetic division by (z - center)
        for k in 0..n {
            for i in (k..n - 1).rev() {
                let hi = t[i + 1];
                t[i] += hi * center;
            }
        }
        t
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Coefficients of `z -> p(s z)`.
    pub fn compose_scale(&self, s: C<T>) -> Self {
        let mut pow = C::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * pow);
            pow *= s;
        }
        Self::new(out)
    }
}

impl<T: Real> Add for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn add(self, rhs: Self) -> UniPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &[C<T>], i: usize| v.get(i).copied().unwrap_or_else(C::zero);
        UniPoly::new((0..n).map(|i| get(&self.coeffs, i) + get(&rhs.coeffs, i)).collect())
    }
}

impl<T: Real> Neg for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn neg(self) -> UniPoly<T> {
        UniPoly { coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }
}

impl<T: Real> Sub for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn sub(self, rhs: Self) -> UniPoly<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Mul for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn mul(self, rhs: Self) -> UniPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}
