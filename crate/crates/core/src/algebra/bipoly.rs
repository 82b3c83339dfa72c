use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{UniPoly, TRIM_TOL};
use crate::scalar::{cabs, Real, C};

/// Dense bivariate polynomial `sum a[i][j] x^i y^j`.
///
/// The matrix is rectangular with `deg_x + 1` rows and `deg_y + 1` columns
/// after trimming. The zero polynomial has no rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly<T: Real> {
    a: Vec<Vec<C<T>>>,
}

impl<T: Real> BiPoly<T> {
    /// Builds from a (possibly ragged) coefficient matrix, row = power of x.
    pub fn new(rows: Vec<Vec<C<T>>>) -> Self {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut a: Vec<Vec<C<T>>> = rows
            .into_iter()
            .map(|mut r| {
                r.resize(width, C::zero());
                r
            })
            .collect();
        let max = a.iter().flatten().map(|c| cabs(*c)).fold(T::zero(), T::max);
        if max == T::zero() {
            return Self { a: Vec::new() };
        }
        let cut = T::tol(TRIM_TOL) * max;
        while a.last().is_some_and(|r| r.iter().all(|c| cabs(*c) <= cut)) {
            a.pop();
        }
        let mut w = width;
        while w > 0 && a.iter().all(|r| cabs(r[w - 1]) <= cut) {
            w -= 1;
        }
        for r in &mut a {
            r.truncate(w);
        }
        Self { a }
    }

    pub fn zero() -> Self {
        Self { a: Vec::new() }
    }

    pub fn constant(c: C<T>) -> Self {
        Self::new(vec![vec![c]])
    }

    /// Sum of `c x^i y^j` terms.
    pub fn from_terms(terms: &[(usize, usize, C<T>)]) -> Self {
        let rows = terms.iter().map(|t| t.0).max().map_or(0, |m| m + 1);
        let cols = terms.iter().map(|t| t.1).max().map_or(0, |m| m + 1);
        let mut a = vec![vec![C::zero(); cols]; rows];
        for &(i, j, c) in terms {
            a[i][j] += c;
        }
        Self::new(a)
    }

    /// Polynomial in `y` only, lowest power first.
    pub fn from_y_coeffs(coeffs: &[C<T>]) -> Self {
        Self::new(vec![coeffs.to_vec()])
    }

    /// Polynomial in `x` only, lowest power first.
    pub fn from_x_coeffs(coeffs: &[C<T>]) -> Self {
        Self::new(coeffs.iter().map(|&c| vec![c]).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_empty()
    }

    pub fn rows(&self) -> &[Vec<C<T>>] {
        &self.a
    }

    /// Degree in x; 0 for the zero polynomial (check [`is_zero`](Self::is_zero)).
    pub fn deg_x(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    pub fn deg_y(&self) -> usize {
        self.a.first().map_or(0, |r| r.len().saturating_sub(1))
    }

    pub fn coeff(&self, i: usize, j: usize) -> C<T> {
        self.a.get(i).and_then(|r| r.get(j)).copied().unwrap_or_else(C::zero)
    }

    pub fn max_coeff(&self) -> T {
        self.a.iter().flatten().map(|c| cabs(*c)).fold(T::zero(), T::max)
    }

    /// Largest `i + j` over coefficients that survive trimming.
    pub fn total_degree(&self) -> usize {
        let cut = T::tol(TRIM_TOL) * self.max_coeff();
        let mut d = 0;
        for (i, r) in self.a.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                if cabs(*c) > cut {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    /// Multiplicity of `y = 0` as a common root of all x-coefficients.
    pub fn y_valuation(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        (0..=self.deg_y()).find(|&j| self.a.iter().any(|r| r[j] != C::zero())).unwrap_or(0)
    }

    /// Horner evaluation in y of Horner evaluations in x.
    pub fn eval(&self, x: C<T>, y: C<T>) -> C<T> {
        if self.is_zero() {
            return C::zero();
        }
        let mut acc = C::zero();
        for j in (0..=self.deg_y()).rev() {
            let cj = self.a.iter().rev().fold(C::zero(), |s, r| s * x + r[j]);
            acc = acc * y + cj;
        }
        acc
    }

    /// Scale used by tolerance tests: `max|a| * max(1,|x|,|y|)^total_degree`.
    pub fn local_scale(&self, x: C<T>, y: C<T>) -> T {
        let r = T::one().max(cabs(x)).max(cabs(y));
        self.max_coeff() * r.powi(self.total_degree() as i32)
    }

    /// Coefficient of `y^j` as a polynomial in x.
    pub fn y_coeff(&self, j: usize) -> UniPoly<T> {
        UniPoly::new(self.a.iter().map(|r| r.get(j).copied().unwrap_or_else(C::zero)).collect())
    }

    /// Coefficient of `x^i` as a polynomial in y.
    pub fn x_coeff(&self, i: usize) -> UniPoly<T> {
        UniPoly::new(self.a.get(i).cloned().unwrap_or_default())
    }

    /// Specialization `y -> p(x0, y)`.
    pub fn at_x(&self, x0: C<T>) -> UniPoly<T> {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let coeffs = (0..=self.deg_y()).map(|j| self.a.iter().rev().fold(C::zero(), |s, r| s * x0 + r[j])).collect();
        UniPoly::new(coeffs)
    }

    /// Specialization `x -> p(x, y0)`.
    pub fn at_y(&self, y0: C<T>) -> UniPoly<T> {
        let coeffs = self.a.iter().map(|r| r.iter().rev().fold(C::zero(), |s, &c| s * y0 + c)).collect();
        UniPoly::new(coeffs)
    }

    /// Same polynomial with the roles of x and y exchanged.
    pub fn transpose(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let (rows, cols) = (self.a.len(), self.a[0].len());
        Self::new((0..cols).map(|j| (0..rows).map(|i| self.a[i][j]).collect()).collect())
    }

    /// Formal derivative in y, coefficient by coefficient.
    pub fn partial_y(&self) -> Self {
        Self::new(self.a.iter().map(|r| r.iter().enumerate().skip(1).map(|(j, &c)| c * T::from_usize(j).unwrap()).collect()).collect())
    }

    /// Formal derivative in x.
    pub fn partial_x(&self) -> Self {
        Self::new(self.a.iter().enumerate().skip(1).map(|(i, r)| r.iter().map(|&c| c * T::from_usize(i).unwrap()).collect()).collect())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::new(self.a.iter().map(|r| r.iter().map(|&c| c * s).collect()).collect())
    }

    /// `Y^shift * p(x, 1/Y)` where `shift >= deg_y`.
    pub fn reverse_y(&self, shift: usize) -> Self {
        assert!(self.is_zero() || shift >= self.deg_y(), "shift below deg_y");
        let out = self
            .a
            .iter()
            .map(|r| {
                let mut row = vec![C::zero(); shift + 1];
                for (j, &c) in r.iter().enumerate() {
                    row[shift - j] = c;
                }
                row
            })
            .collect();
        Self::new(out)
    }

    /// Divides by `y^s`; the low-order columns must be zero.
    pub fn shift_down_y(&self, s: usize) -> Self {
        Self::new(self.a.iter().map(|r| r.iter().skip(s).copied().collect()).collect())
    }

    /// Coefficients of `(x, y) -> p(a x + b, y)`.
    pub fn affine_x(&self, a: C<T>, b: C<T>) -> Self {
        // (a x + b)^i expanded with a running binomial product
        let mut out: Vec<Vec<C<T>>> = vec![vec![C::zero(); self.deg_y() + 1]; self.a.len()];
        let mut pow: Vec<C<T>> = vec![C::one()];
        for (i, row) in self.a.iter().enumerate() {
            if i > 0 {
                let mut next = vec![C::zero(); pow.len() + 1];
                for (k, &c) in pow.iter().enumerate() {
                    next[k] += c * b;
                    next[k + 1] += c * a;
                }
                pow = next;
            }
            for (k, &pk) in pow.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    out[k][j] += pk * c;
                }
            }
        }
        Self::new(out)
    }
}

impl<T: Real> Add for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn add(self, rhs: Self) -> BiPoly<T> {
        let rows = self.a.len().max(rhs.a.len());
        let cols = (self.deg_y().max(rhs.deg_y())) + 1;
        let out = (0..rows).map(|i| (0..cols).map(|j| self.coeff(i, j) + rhs.coeff(i, j)).collect()).collect();
        BiPoly::new(out)
    }
}

impl<T: Real> Neg for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn neg(self) -> BiPoly<T> {
        BiPoly { a: self.a.iter().map(|r| r.iter().map(|&c| -c).collect()).collect() }
    }
}

impl<T: Real> Sub for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn sub(self, rhs: Self) -> BiPoly<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Mul for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn mul(self, rhs: Self) -> BiPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return BiPoly::zero();
        }
        let mut out = vec![vec![C::zero(); self.deg_y() + rhs.deg_y() + 1]; self.a.len() + rhs.a.len() - 1];
        for (i1, r1) in self.a.iter().enumerate() {
            for (j1, &c1) in r1.iter().enumerate() {
                if c1 == C::zero() {
                    continue;
                }
                for (i2, r2) in rhs.a.iter().enumerate() {
                    for (j2, &c2) in r2.iter().enumerate() {
                        out[i1 + i2][j1 + j2] += c1 * c2;
                    }
                }
            }
        }
        BiPoly::new(out)
    }
}
