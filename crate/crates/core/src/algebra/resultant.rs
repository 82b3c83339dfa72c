//! Sylvester resultants and the approximate coprimality gate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use super::{AlgebraError, BiPoly, UniPoly, TRIM_TOL};
use crate::scalar::{cabs, Real, C};

/// Default relative singular value threshold used when admitting models.
pub const COPRIME_TOL: f64 = 1e-10;

/// Generic specialization points for the coprimality test.
const SAMPLE_POINTS: [(f64, f64); 3] = [(0.618_034, 0.314_159), (-0.702_113, 0.447_214), (0.271_828, -0.866_025)];

/// Sylvester matrix of two univariate coefficient lists (lowest power first)
/// with the given formal degrees.
pub fn sylvester_matrix<T: Real>(p: &[C<T>], m: usize, q: &[C<T>], n: usize) -> Vec<Vec<C<T>>> {
    let size = m + n;
    let mut s = vec![vec![C::zero(); size]; size];
    let get = |v: &[C<T>], k: usize| v.get(k).copied().unwrap_or_else(C::zero);
    for r in 0..n {
        for k in 0..=m {
            s[r][r + k] = get(p, m - k);
        }
    }
    for r in 0..m {
        for k in 0..=n {
            s[n + r][r + k] = get(q, n - k);
        }
    }
    s
}

/// Determinant by LU with partial pivoting, together with the Hadamard bound
/// (product of row norms) used to judge whether the value is noise.
fn det_with_bound<T: Real>(mut a: Vec<Vec<C<T>>>) -> (C<T>, T) {
    let n = a.len();
    let bound = a.iter().map(|r| r.iter().map(|c| c.norm_sqr()).fold(T::zero(), |s, v| s + v).sqrt()).fold(T::one(), |s, v| s * v);
    let mut det = C::one();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| cabs(a[i][col]).partial_cmp(&cabs(a[j][col])).unwrap()).unwrap();
        if a[piv][col] == C::zero() {
            return (C::zero(), bound);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let d = a[col][col];
        det *= d;
        for r in col + 1..n {
            let f = a[r][col] / d;
            if f == C::zero() {
                continue;
            }
            let (top, bottom) = a.split_at_mut(r);
            for (dst, &v) in bottom[0][col..n].iter_mut().zip(&top[col][col..n]) {
                *dst -= f * v;
            }
        }
    }
    (det, bound)
}

/// Resultant of `p` and `q` with respect to `y`, as a polynomial in `x`.
///
/// The Sylvester determinant is evaluated at roots of unity and interpolated
/// by an inverse DFT. Coefficients below `TRIM_TOL` times the largest Hadamard
/// bound are treated as cancellation noise and set to zero, so a shared factor
/// yields the zero polynomial.
pub fn resultant_y<T: Real>(p: &BiPoly<T>, q: &BiPoly<T>) -> Result<UniPoly<T>, AlgebraError> {
    let (m, n) = (p.deg_y(), q.deg_y());
    if (p.is_zero() || m == 0) && (q.is_zero() || n == 0) {
        return Err(AlgebraError::BothConstantInY);
    }
    if p.is_zero() || q.is_zero() {
        return Ok(UniPoly::zero());
    }
    let deg_bound = n * p.deg_x() + m * q.deg_x();
    let count = deg_bound + 1;
    let nf = T::from_usize(count).unwrap();
    let mut values = Vec::with_capacity(count);
    let mut hadamard = T::zero();
    for k in 0..count {
        let x = C::from_polar(T::one(), T::TAU() * T::from_usize(k).unwrap() / nf);
        let pc: Vec<C<T>> = (0..=m).map(|j| p.y_coeff(j).eval(x)).collect();
        let qc: Vec<C<T>> = (0..=n).map(|j| q.y_coeff(j).eval(x)).collect();
        let (d, b) = det_with_bound(sylvester_matrix(&pc, m, &qc, n));
        values.push(d);
        hadamard = hadamard.max(b);
    }
    let cut = T::tol(TRIM_TOL) * hadamard;
    let coeffs = (0..count)
        .map(|i| {
            let s = values.iter().enumerate().fold(C::zero(), |s, (k, &v)| {
                let idx = (i * k) % count;
                s + v * C::from_polar(T::one(), -T::TAU() * T::from_usize(idx).unwrap() / nf)
            });
            let c = s / nf;
            if cabs(c) <= cut {
                C::zero()
            } else {
                c
            }
        })
        .collect();
    Ok(UniPoly::new(coeffs))
}

fn to_c64<T: Real>(z: C<T>) -> Complex64 {
    Complex64::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())
}

/// Ratio of smallest to largest singular value of the Sylvester matrix of two
/// univariate specializations; `None` when the matrix is empty.
fn sylvester_conditioning<T: Real>(p: &UniPoly<T>, q: &UniPoly<T>) -> Option<f64> {
    let (m, n) = (p.degree().unwrap_or(0), q.degree().unwrap_or(0));
    if m + n == 0 {
        return None;
    }
    let norm = |u: &UniPoly<T>| {
        let s = u.max_coeff();
        u.coeffs().iter().map(|&c| to_c64(c) / s.to_f64().unwrap()).collect::<Vec<_>>()
    };
    let s = sylvester_matrix(&norm(p), m, &norm(q), n);
    let size = m + n;
    let mat = DMatrix::from_fn(size, size, |r, c| s[r][c]);
    let sv = mat.singular_values();
    let max = sv.max();
    let min = sv.min();
    Some(if max > 0.0 { min / max } else { 0.0 })
}

/// Numerical coprimality of `p` and `q`.
///
/// Common factors involving `y` are detected by the Sylvester matrix in `y` at
/// generic specializations of `x`; factors depending on `x` alone need the
/// symmetric test with the variables exchanged. The median over the sample
/// points is compared with `tol`.
pub fn approx_coprime<T: Real>(p: &BiPoly<T>, q: &BiPoly<T>, tol: f64) -> bool {
    let is_unit = |u: &BiPoly<T>| !u.is_zero() && u.deg_x() == 0 && u.deg_y() == 0;
    if p.is_zero() || q.is_zero() {
        return is_unit(p) || is_unit(q);
    }
    let samples: Vec<C<T>> = SAMPLE_POINTS.iter().map(|&(re, im)| C::new(T::lit(re), T::lit(im))).collect();
    let passes = |ratios: Vec<f64>| {
        if ratios.is_empty() {
            return true;
        }
        let mut r = ratios;
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        r[r.len() / 2] > tol
    };
    let in_y: Vec<f64> = samples.iter().filter_map(|&x| sylvester_conditioning(&p.at_x(x), &q.at_x(x))).collect();
    let in_x: Vec<f64> = samples.iter().filter_map(|&y| sylvester_conditioning(&p.at_y(y), &q.at_y(y))).collect();
    passes(in_y) && passes(in_x)
}
