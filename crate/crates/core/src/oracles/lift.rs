//! Path lifting for implicit solutions `h(u) = w(τ)`, `τ ∈ [0, 1]`.

use num_complex::Complex64;

use super::OracleError;

const MIN_STEP: f64 = 1e-12;
const MAX_STEP: f64 = 1.0 / 16.0;
const NEWTON_ITERS: usize = 8;

/// Continues the root `u0` of `h(u) = w(0)` to `τ = 1` by predictor–corrector
/// steps with step halving.
///
/// A step is accepted only when Newton converges and the corrected value stays
/// close to the Euler prediction, so a step can never jump to another
/// determination. Near a critical point of `h` the steps shrink until the
/// minimum is reached and `BranchUnreachable` is returned.
pub(crate) fn lift<H, D, W>(h: H, dh: D, w: W, u0: Complex64) -> Result<Complex64, OracleError>
where
    H: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
    W: Fn(f64) -> Complex64,
{
    let mut u = u0;
    let mut tau = 0.0;
    let mut step = MAX_STEP;
    while tau < 1.0 {
        let next = (tau + step).min(1.0);
        let target = w(next);
        let slope = dh(u);
        let predicted = u + (target - w(tau)) / slope;
        match correct(&h, &dh, predicted, target) {
            Some(v) if slope.norm() > 0.0 && (v - predicted).norm() <= 0.1 * (predicted - u).norm() + 1e-13 * (1.0 + u.norm()) => {
                u = v;
                tau = next;
                step = (step * 2.0).min(MAX_STEP);
            }
            _ => {
                step *= 0.5;
                if step < MIN_STEP {
                    return Err(OracleError::BranchUnreachable);
                }
            }
        }
    }
    Ok(u)
}

fn correct<H, D>(h: &H, dh: &D, mut u: Complex64, target: Complex64) -> Option<Complex64>
where
    H: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    for _ in 0..NEWTON_ITERS {
        let d = dh(u);
        if d.norm() == 0.0 {
            return None;
        }
        let du = (h(u) - target) / d;
        u -= du;
        if !(u.re.is_finite() && u.im.is_finite()) {
            return None;
        }
        if du.norm() <= 1e-14 * (1.0 + u.norm()) {
            return Some(u);
        }
    }
    None
}

/// Piecewise linear path through `points`, parametrized uniformly per piece.
pub(crate) fn polyline_at(points: &[Complex64], tau: f64) -> Complex64 {
    let n = points.len() - 1;
    if n == 0 {
        return points[0];
    }
    let s = (tau * n as f64).min(n as f64);
    let i = (s.floor() as usize).min(n - 1);
    let f = s - i as f64;
    points[i] + (points[i + 1] - points[i]) * f
}

/// Continuous logarithm of `x(τ) / x(0)` along a polyline avoiding 0.
pub(crate) fn polyline_log(points: &[Complex64], tau: f64) -> Complex64 {
    let n = points.len() - 1;
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = (tau * n as f64).min(n as f64);
    let i = (s.floor() as usize).min(n - 1);
    // a straight piece sees the origin under an angle below π, so the
    // principal logarithm of the ratio is continuous on it
    let mut acc: Complex64 = (0..i).map(|j| (points[j + 1] / points[j]).ln()).sum();
    acc += (polyline_at(points, tau) / points[i]).ln();
    acc
}

/// `true` when some piece of the polyline passes within `tol` of `z`.
pub(crate) fn polyline_meets(points: &[Complex64], z: Complex64, tol: f64) -> bool {
    points.windows(2).any(|p| {
        let d = p[1] - p[0];
        let len2 = d.norm_sqr();
        let t = if len2 > 0.0 { (((z - p[0]) * d.conj()).re / len2).clamp(0.0, 1.0) } else { 0.0 };
        (p[0] + d * t - z).norm() <= tol
    }) || points.iter().any(|p| (p - z).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_root_along_a_half_circle_changes_sheet() {
        // u^2 = w with w going from 1 to -1 through the upper half plane
        let w = |t: f64| Complex64::from_polar(1.0, std::f64::consts::PI * t);
        let u = lift(|u| u * u, |u| 2.0 * u, w, c(1.0, 0.0)).unwrap();
        assert!((u - c(0.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn critical_point_is_unreachable() {
        let w = |t: f64| c(1.0 - t, 0.0);
        assert_eq!(lift(|u| u * u, |u| 2.0 * u, w, c(1.0, 0.0)), Err(OracleError::BranchUnreachable));
    }

    #[test]
    fn log_around_the_origin() {
        let pts: Vec<_> = (0..=4).map(|k| Complex64::from_polar(2.0, std::f64::consts::FRAC_PI_2 * k as f64)).collect();
        assert!((polyline_log(&pts, 1.0) - c(0.0, std::f64::consts::TAU)).norm() < 1e-14);
        assert!((polyline_log(&pts, 0.5) - c(0.0, std::f64::consts::PI)).norm() < 1e-14);
        assert!(polyline_meets(&[c(-1.0, 0.0), c(1.0, 0.0)], c(0.0, 0.0), 1e-12));
    }
}
