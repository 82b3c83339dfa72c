//! Dormand–Prince 5(4) for a single complex unknown over a real parameter.

use crate::scalar::{cabs, is_finite, Real, C};

/// Relative per-step tolerance used by the continuation engine.
pub const STEP_TOL: f64 = 1e-10;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T: Real> {
    pub rtol: T,
    pub atol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        let rtol = T::tol(STEP_TOL);
        Self { rtol, atol: rtol * T::lit(1e-2) }
    }
}

/// Result of one attempted step.
#[derive(Debug, Clone, Copy)]
pub struct Trial<T: Real> {
    pub y: C<T>,
    /// Error estimate in units of the tolerance; the step is acceptable when `<= 1`.
    pub err: T,
    /// Slope at the start of the step.
    pub slope: C<T>,
}

/// One Dormand–Prince step of size `h` from `(t, y)`. A non-finite stage
/// value yields an infinite error so the caller shrinks the step.
pub fn dopri_step<T: Real, F>(f: &mut F, t: T, y: C<T>, h: T, tol: &Tolerances<T>) -> Trial<T>
where
    F: FnMut(T, C<T>) -> C<T>,
{
    let l = T::lit;
    let k1 = f(t, y);
    let k2 = f(t + h * l(0.2), y + (k1 * l(A21)) * h);
    let k3 = f(t + h * l(0.3), y + (k1 * l(A31) + k2 * l(A32)) * h);
    let k4 = f(t + h * l(0.8), y + (k1 * l(A41) + k2 * l(A42) + k3 * l(A43)) * h);
    let k5 = f(t + h * l(8.0 / 9.0), y + (k1 * l(A51) + k2 * l(A52) + k3 * l(A53) + k4 * l(A54)) * h);
    let k6 = f(t + h, y + (k1 * l(A61) + k2 * l(A62) + k3 * l(A63) + k4 * l(A64) + k5 * l(A65)) * h);
    let y5 = y + (k1 * l(B1) + k3 * l(B3) + k4 * l(B4) + k5 * l(B5) + k6 * l(B6)) * h;
    let k7 = f(t + h, y5);
    let e = (k1 * l(E1) + k3 * l(E3) + k4 * l(E4) + k5 * l(E5) + k6 * l(E6) + k7 * l(E7)) * h;
    let finite = [k1, k2, k3, k4, k5, k6, k7, y5].iter().all(|z| is_finite(*z));
    let err = if finite { cabs(e) / (tol.atol + tol.rtol * cabs(y).max(cabs(y5))) } else { T::infinity() };
    Trial { y: y5, err, slope: k1 }
}

/// Step size factor after a trial with normalized error `err`.
pub fn step_factor<T: Real>(err: T) -> T {
    let (lo, hi) = (T::lit(0.2), T::lit(5.0));
    if err == T::zero() {
        return hi;
    }
    if !err.is_finite() {
        return lo;
    }
    (T::lit(0.9) * err.powf(T::lit(-0.2))).max(lo).min(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats<T: Real> {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: T,
    pub max_err: T,
}

impl<T: Real> Stats<T> {
    pub fn new() -> Self {
        Self { accepted: 0, rejected: 0, min_step: T::infinity(), max_err: T::zero() }
    }

    pub fn merge(&mut self, other: &Self) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.min_step = self.min_step.min(other.min_step);
        self.max_err = self.max_err.max(other.max_err);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("step size fell below the minimum at t = {t}")]
pub struct StepUnderflow<T: Real> {
    pub t: T,
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction) with
/// adaptive steps; `h_min` is the smallest step magnitude allowed.
pub fn integrate<T: Real, F>(mut f: F, t0: T, t1: T, y0: C<T>, tol: &Tolerances<T>, h_min: T) -> Result<(C<T>, Stats<T>), StepUnderflow<T>>
where
    F: FnMut(T, C<T>) -> C<T>,
{
    let span = t1 - t0;
    let dir = span.signum();
    let mut stats = Stats::<T>::new();
    let (mut t, mut y) = (t0, y0);
    let mut h = span.abs() * T::lit(0.01);
    while (t1 - t) * dir > T::zero() {
        h = h.min((t1 - t).abs());
        let trial = dopri_step(&mut f, t, y, h * dir, tol);
        if trial.err <= T::one() {
            t = if h == (t1 - t).abs() { t1 } else { t + h * dir };
            y = trial.y;
            stats.accepted += 1;
            stats.min_step = stats.min_step.min(h);
            stats.max_err = stats.max_err.max(trial.err);
        } else {
            stats.rejected += 1;
            if h <= h_min {
                return Err(StepUnderflow { t });
            }
        }
        h = (h * step_factor(trial.err)).max(h_min);
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_to_tolerance() {
        let (y, stats) = integrate(|_, y| y, 0.0, 1.0, C::new(1.0, 0.0), &Tolerances::default(), 1e-13).unwrap();
        assert!((y - C::new(std::f64::consts::E, 0.0)).norm() < 1e-9, "{y}");
        assert!(stats.accepted > 3 && stats.max_err <= 1.0);
    }

    #[test]
    fn complex_rotation_backwards() {
        // y' = i y from 1 back to 0 starting at e^i
        let y1 = C::from_polar(1.0, 1.0);
        let (y, _) = integrate(|_, y: C<f64>| C::new(0.0, 1.0) * y, 1.0, 0.0, y1, &Tolerances::default(), 1e-13).unwrap();
        assert!((y - C::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn blow_up_underflows() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let r = integrate(|_, y: C<f64>| y * y, 0.0, 2.0, C::new(1.0, 0.0), &Tolerances::default(), 1e-9);
        let t = r.unwrap_err().t;
        assert!((t - 1.0).abs() < 1e-3, "{t}");
    }

    #[test]
    fn single_precision() {
        let (y, _) = integrate(|_, y| y, 0.0f32, 1.0, C::new(1.0f32, 0.0), &Tolerances::default(), 1e-6).unwrap();
        assert!((y.re - std::f32::consts::E).abs() < 1e-4);
    }
}
