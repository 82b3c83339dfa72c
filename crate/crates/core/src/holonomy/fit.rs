//! Least-squares algebroid fits of sampled branches.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Held-out residual below which a fit is accepted.
pub const FIT_TOL: f64 = 1e-5;
/// Largest polynomial degree tried.
pub const D_MAX: usize = 8;
/// Largest Puiseux denominator tried.
pub const Q_MAX: usize = 6;
/// Minimum number of samples for a meaningful fit.
pub const MIN_SAMPLES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Analytic { degree: usize },
    Puiseux { q: usize, degree: usize },
    NotFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebroidFit {
    pub kind: FitKind,
    /// Largest error on held-out samples divided by the largest sample value.
    pub residual: f64,
    pub center: Complex64,
    /// Coefficients of `(s - center)^(j/q)`, lowest first (`q = 1` for analytic fits).
    pub coefficients: Vec<Complex64>,
}

impl AlgebroidFit {
    pub fn is_fit(&self) -> bool {
        self.kind != FitKind::NotFit
    }

    fn q(&self) -> usize {
        match self.kind {
            FitKind::Puiseux { q, .. } => q,
            _ => 1,
        }
    }

    /// Evaluates the fitted germ at `s` (principal branch of the Puiseux root).
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let t = puiseux_var(s - self.center, self.q());
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * t + a)
    }
}

fn puiseux_var(z: Complex64, q: usize) -> Complex64 {
    if q == 1 || z.norm() == 0.0 {
        z
    } else {
        z.powf(1.0 / q as f64)
    }
}

/// Fits `samples` of `(seed, value)` about the centroid of the seeds.
pub fn fit_analytic(samples: &[(Complex64, Complex64)], q_max: usize) -> AlgebroidFit {
    let n = samples.len().max(1) as f64;
    let center = samples.iter().map(|s| s.0).sum::<Complex64>() / n;
    fit_about(samples, center, q_max)
}

/// Polynomial fit in `s - center` of the lowest degree up to [`D_MAX`] whose
/// held-out residual is below [`FIT_TOL`]; failing that, the same in the
/// Puiseux variable `(s - center)^(1/q)` for `q = 2..=q_max`. Every fourth
/// sample is held out. When nothing fits, the best residual found is reported
/// with kind `NotFit`.
pub fn fit_about(samples: &[(Complex64, Complex64)], center: Complex64, q_max: usize) -> AlgebroidFit {
    let not_fit = |residual: f64| AlgebroidFit { kind: FitKind::NotFit, residual, center, coefficients: Vec::new() };
    if samples.len() < MIN_SAMPLES {
        return not_fit(f64::INFINITY);
    }
    let (train, held): (Vec<_>, Vec<_>) = samples.iter().enumerate().partition(|(i, _)| i % 4 != 3);
    let train: Vec<_> = train.into_iter().map(|(_, s)| *s).collect();
    let held: Vec<_> = held.into_iter().map(|(_, s)| *s).collect();
    let scale = samples.iter().map(|s| s.1.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let d_cap = D_MAX.min(train.len() - 2);
    let mut best = not_fit(f64::INFINITY);
    for q in 1..=q_max.max(1) {
        for d in 0..=d_cap {
            let Some(coeffs) = solve(&train, center, q, d) else { continue };
            let kind = if q == 1 { FitKind::Analytic { degree: d } } else { FitKind::Puiseux { q, degree: d } };
            let fit = AlgebroidFit { kind, residual: 0.0, center, coefficients: coeffs };
            let err = held.iter().map(|&(s, v)| (fit.eval(s) - v).norm()).fold(0.0, f64::max);
            let residual = err / scale;
            if !residual.is_finite() {
                continue;
            }
            if residual <= FIT_TOL {
                return AlgebroidFit { residual, ..fit };
            }
            if residual < best.residual {
                best.residual = residual;
            }
        }
    }
    best
}

/// Least-squares coefficients in the variable `(s - center)^(1/q)`, computed
/// on a rescaled variable to keep the Vandermonde matrix well conditioned.
fn solve(train: &[(Complex64, Complex64)], center: Complex64, q: usize, d: usize) -> Option<Vec<Complex64>> {
    let ts: Vec<Complex64> = train.iter().map(|&(s, _)| puiseux_var(s - center, q)).collect();
    let rho = ts.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let rho = if rho > 0.0 { rho } else { 1.0 };
    let a = DMatrix::from_fn(ts.len(), d + 1, |r, c| (ts[r] / rho).powu(c as u32));
    let b = DVector::from_iterator(train.len(), train.iter().map(|s| s.1));
    let x = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(x.iter().enumerate().map(|(j, &c)| c / rho.powi(j as i32)).collect())
}
