use num_complex::Complex64;

use super::{Chart, ChartedPoint, R_SWITCH};
use crate::algebra::BiPoly;
use crate::foliation::OdeModel;
use crate::integrate::{integrate, Tolerances};

/// `P`, `Q` and their first partials in one chart.
#[derive(Debug, Clone)]
pub(crate) struct ChartField {
    pub p: BiPoly<f64>,
    pub q: BiPoly<f64>,
    px: BiPoly<f64>,
    py: BiPoly<f64>,
    qx: BiPoly<f64>,
    qy: BiPoly<f64>,
}

impl ChartField {
    fn new(p: &BiPoly<f64>, q: &BiPoly<f64>) -> Self {
        Self { p: p.clone(), q: q.clone(), px: p.partial_x(), py: p.partial_y(), qx: q.partial_x(), qy: q.partial_y() }
    }

    /// `dv/dx`.
    pub fn slope(&self, x: Complex64, v: Complex64) -> Complex64 {
        self.p.eval(x, v) / self.q.eval(x, v)
    }

    /// Derivatives `X'`, `X''` of the leaf written as `x = X(v)`.
    pub fn leaf_derivatives(&self, x: Complex64, v: Complex64) -> (Complex64, Complex64) {
        let (p, q) = (self.p.eval(x, v), self.q.eval(x, v));
        let d1 = q / p;
        let dq = self.qx.eval(x, v) * d1 + self.qy.eval(x, v);
        let dp = self.px.eval(x, v) * d1 + self.py.eval(x, v);
        (d1, (dq * p - q * dp) / (p * p))
    }

    /// Distance estimate to the nearest tangency on the leaf, and the estimated
    /// abscissa; exact for a simple tangency to leading order.
    pub fn tangency_estimate(&self, x: Complex64, v: Complex64) -> (f64, Complex64) {
        let (d1, d2) = self.leaf_derivatives(x, v);
        let shift = d1 * d1 / (d2 * 2.0);
        if !shift.is_finite() {
            return (f64::INFINITY, x);
        }
        (shift.norm(), x - shift)
    }

    /// Normalized `|Q|` at the point.
    pub fn q_residual(&self, x: Complex64, v: Complex64) -> f64 {
        let s = self.q.local_scale(x, v);
        if s == 0.0 {
            return 0.0;
        }
        self.q.eval(x, v).norm() / s
    }

    pub fn p_residual(&self, x: Complex64, v: Complex64) -> f64 {
        let s = self.p.local_scale(x, v);
        if s == 0.0 {
            return 0.0;
        }
        self.p.eval(x, v).norm() / s
    }

    /// Order `1 + mult` from the vanishing Taylor coefficients of `Q(x1, ·)` at `v1`.
    pub fn tangency_order(&self, x1: Complex64, v1: Complex64, tol: f64) -> usize {
        let slice = self.q.at_x(x1);
        let scale = slice.max_coeff() * 1f64.max(v1.norm()).powi(slice.degree().unwrap_or(0) as i32);
        1 + slice.taylor_at(v1).iter().take_while(|t| t.norm() <= tol * scale).count()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Fields {
    pub affine: ChartField,
    pub infinity: ChartField,
}

impl Fields {
    pub fn new(model: &OdeModel<f64>) -> Self {
        Self { affine: ChartField::new(model.p(), model.q()), infinity: ChartField::new(&model.infinity().p, &model.infinity().q) }
    }

    pub fn chart(&self, chart: Chart) -> &ChartField {
        match chart {
            Chart::Affine => &self.affine,
            Chart::Infinity => &self.infinity,
        }
    }
}

/// A tangency of the leaf with the vertical direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Located {
    /// The tangency point; its `x` is the singular abscissa.
    pub point: ChartedPoint,
    /// Normalized `|Q|` at the point.
    pub residual: f64,
    /// Multiplicity of the zero of `dX/dv` used by the converged Newton run.
    pub multiplicity: usize,
}

/// Integrates the leaf as `x = X(v)` along the straight segment from `v0` to `v1`.
fn leaf_x(f: &ChartField, x0: Complex64, v0: Complex64, v1: Complex64) -> Option<Complex64> {
    let dv = v1 - v0;
    let tol = Tolerances { rtol: 1e-13, atol: 1e-15 };
    let rhs = |tau: f64, x: Complex64| {
        let v = v0 + dv * tau;
        f.q.eval(x, v) / f.p.eval(x, v) * dv
    };
    integrate(rhs, 0.0, 1.0, x0, &tol, 1e-10).ok().map(|(x, _)| x)
}

fn newton(f: &ChartField, x0: Complex64, v0: Complex64, mu: f64) -> Option<(Complex64, Complex64)> {
    let (mut x, mut v) = (x0, v0);
    let reach = 4.0 * f.tangency_estimate(x0, v0).0.max(1e-3);
    for _ in 0..60 {
        let (d1, d2) = f.leaf_derivatives(x, v);
        if d1 == Complex64::new(0.0, 0.0) {
            break;
        }
        let step = -d1 / d2 * mu;
        if !step.is_finite() {
            return None;
        }
        let xn = leaf_x(f, x, v, v + step)?;
        if (xn - x0).norm() > reach {
            return None;
        }
        x = xn;
        v += step;
        if step.norm() <= 1e-14 * v.norm().max(1.0) {
            break;
        }
    }
    Some((x, v))
}

/// Finds the tangency of the leaf through `from` nearest to it: Newton on
/// `dX/dv = 0` along the leaf, with the deflation factor chosen among the
/// possible multiplicities by the smallest final `|Q|`.
pub fn locate_singularity(model: &OdeModel<f64>, from: ChartedPoint) -> Option<Located> {
    let fields = Fields::new(model);
    locate_with(&fields, from)
}

pub(crate) fn locate_with(fields: &Fields, from: ChartedPoint) -> Option<Located> {
    // work in the chart where the value is moderate
    let y = from.y_value();
    let (chart, v0) = if y.norm() <= R_SWITCH { (Chart::Affine, y) } else { (Chart::Infinity, y.inv()) };
    let f = fields.chart(chart);
    let max_mu = f.q.deg_y().max(1);
    let mut best: Option<Located> = None;
    for mu in 1..=max_mu {
        let Some((x, v)) = newton(f, from.x, v0, mu as f64) else { continue };
        let residual = f.q_residual(x, v);
        if !residual.is_finite() {
            continue;
        }
        if best.is_none_or(|b| residual < b.residual) {
            best = Some(Located { point: ChartedPoint { x, value: v, chart }, residual, multiplicity: mu });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BiPoly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hk(k: usize) -> OdeModel<f64> {
        OdeModel::new(BiPoly::from_terms(&[(0, 0, c(-1.0, 0.0))]), BiPoly::from_terms(&[(0, k - 1, c(k as f64, 0.0))])).unwrap()
    }

    #[test]
    fn locates_hk_tangencies() {
        // the leaf through (x0, y0) is x = x0 + y0^k - y^k, tangent at y = 0
        for k in 2..=4 {
            let (x0, y0) = (c(0.2, 0.1), c(0.3, -0.4));
            let l = locate_singularity(&hk(k), ChartedPoint::affine(x0, y0)).unwrap();
            let want = x0 + y0.powu(k as u32);
            assert!((l.point.x - want).norm() < 1e-10, "k = {k}: {} vs {want}", l.point.x);
            assert!(l.residual < 1e-7);
        }
    }

    #[test]
    fn estimate_is_exact_for_simple_tangency() {
        let f = Fields::new(&hk(2));
        let (d, x1) = f.affine.tangency_estimate(c(0.0, 0.0), c(1.0, 0.0));
        assert!((x1 - c(1.0, 0.0)).norm() < 1e-14 && (d - 1.0).abs() < 1e-14);
    }

    #[test]
    fn painleve_tangency() {
        // y' = y / (x (y + 1)); H = y e^y / x
        let m = OdeModel::new(BiPoly::from_terms(&[(0, 1, c(1.0, 0.0))]), BiPoly::from_terms(&[(1, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]))
            .unwrap();
        // start close to the tangency on the leaf through (1, 1)
        let y = c(-0.9, 0.05);
        let cst = std::f64::consts::E;
        let x = y * y.exp() / cst;
        let l = locate_singularity(&m, ChartedPoint::affine(x, y)).unwrap();
        assert!((l.point.x - c(-1.0 / cst / cst, 0.0)).norm() < 1e-12, "{}", l.point.x);
        assert!((l.point.value - c(-1.0, 0.0)).norm() < 1e-8);
    }
}
