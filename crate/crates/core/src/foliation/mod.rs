//! The singular foliation of `dy/dx = P/Q`: infinity chart, singular set,
//! vertical leaves, fixed singular locus and pointwise classification.

mod classify;
mod locus;

pub use classify::{classify_point, total_tangency_multiplicity, Category, Fiber, PointClass};
pub use locus::{sigma_e, singular_points, vertical_leaves, FixedSingularLocus, Provenance, SigmaPoint, SingularSet};

use thiserror::Error;

use crate::algebra::{approx_coprime, BiPoly, COPRIME_TOL};
use crate::scalar::{cabs, Real, C};

/// Relative tolerance deciding that a polynomial vanishes at a point, measured
/// against [`BiPoly::local_scale`].
pub const SING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoliationError {
    #[error("P and Q are both identically zero")]
    ZeroPolynomial,
    #[error("P and Q are not coprime")]
    NotCoprime,
    #[error("the singular set is not isolated")]
    NonIsolatedSingularities,
    #[error("point lies within tolerance of two categories ({0:?} and {1:?})")]
    AmbiguousClassification(Category, Category),
    #[error("abscissa lies on the fixed singular locus")]
    OnSigmaE,
}

impl FoliationError {
    /// Machine-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::ZeroPolynomial => "ZeroPolynomial",
            Self::NotCoprime => "NotCoprime",
            Self::NonIsolatedSingularities => "NonIsolatedSingularities",
            Self::AmbiguousClassification(..) => "AmbiguousClassification",
            Self::OnSigmaE => "OnSigmaE",
        }
    }
}

/// Which normalization produced the infinity chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartCase {
    /// `n + 2 >= m`: `P~ = -Y^(n+2) P(x, 1/Y)`, `Q~ = Y^n Q(x, 1/Y)`.
    NPlus2GeM,
    /// `n + 2 < m`: `P~ = -Y^m P(x, 1/Y)`, `Q~ = Y^(m-2) Q(x, 1/Y)`.
    NPlus2LtM,
}

/// The foliation in the chart `Y = 1/y`: `dY/dx = P~/Q~`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinityChartModel<T: Real> {
    pub p: BiPoly<T>,
    pub q: BiPoly<T>,
    pub case: ChartCase,
    /// Power of `Y` removed from both polynomials after the substitution.
    pub trimmed: usize,
}

pub fn to_infinity_chart<T: Real>(p: &BiPoly<T>, q: &BiPoly<T>) -> InfinityChartModel<T> {
    let (m, n) = (p.deg_y(), q.deg_y());
    let minus_one = C::new(-T::one(), T::zero());
    let (case, pt, qt) = if n + 2 >= m {
        (ChartCase::NPlus2GeM, p.reverse_y(n + 2).scale(minus_one), q.reverse_y(n))
    } else {
        (ChartCase::NPlus2LtM, p.reverse_y(m).scale(minus_one), q.reverse_y(m - 2))
    };
    let s = match (pt.is_zero(), qt.is_zero()) {
        (true, true) => 0,
        (true, false) => qt.y_valuation(),
        (false, true) => pt.y_valuation(),
        (false, false) => pt.y_valuation().min(qt.y_valuation()),
    };
    InfinityChartModel { p: pt.shift_down_y(s), q: qt.shift_down_y(s), case, trimmed: s }
}

/// An admissible equation `dy/dx = P(x,y)/Q(x,y)` together with its chart at `y = ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeModel<T: Real> {
    p: BiPoly<T>,
    q: BiPoly<T>,
    infinity: InfinityChartModel<T>,
}

impl<T: Real> OdeModel<T> {
    /// Admits `(P, Q)` if they are numerically coprime and `Q` is not identically zero.
    ///
    /// `Q ≡ 0` makes every vertical line a leaf, so the singular locus is not
    /// finite and the model is rejected as `NonIsolatedSingularities`.
    pub fn new(p: BiPoly<T>, q: BiPoly<T>) -> Result<Self, FoliationError> {
        if p.is_zero() && q.is_zero() {
            return Err(FoliationError::ZeroPolynomial);
        }
        if q.is_zero() {
            return Err(FoliationError::NonIsolatedSingularities);
        }
        if !approx_coprime(&p, &q, COPRIME_TOL) {
            return Err(FoliationError::NotCoprime);
        }
        let infinity = to_infinity_chart(&p, &q);
        Ok(Self { p, q, infinity })
    }

    pub fn p(&self) -> &BiPoly<T> {
        &self.p
    }

    pub fn q(&self) -> &BiPoly<T> {
        &self.q
    }

    /// `deg_y P`.
    pub fn m(&self) -> usize {
        self.p.deg_y()
    }

    /// `deg_y Q`.
    pub fn n(&self) -> usize {
        self.q.deg_y()
    }

    pub fn infinity(&self) -> &InfinityChartModel<T> {
        &self.infinity
    }

    /// The model pulled back by `x -> a x + b`.
    pub fn affine_x(&self, a: C<T>, b: C<T>) -> Result<Self, FoliationError> {
        Self::new(self.p.affine_x(a, b).scale(a), self.q.affine_x(a, b))
    }

    /// Slope `P/Q` in the affine chart.
    pub fn slope(&self, x: C<T>, y: C<T>) -> C<T> {
        self.p.eval(x, y) / self.q.eval(x, y)
    }

    /// Slope `P~/Q~` in the infinity chart.
    pub fn slope_infinity(&self, x: C<T>, yy: C<T>) -> C<T> {
        self.infinity.p.eval(x, yy) / self.infinity.q.eval(x, yy)
    }
}

/// `|v| <= tol * scale`, the common vanishing test.
#[inline]
pub(crate) fn negligible<T: Real>(v: C<T>, scale: T, tol: f64) -> bool {
    cabs(v) <= T::tol(tol) * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::c64;

    pub(crate) fn bp(terms: &[(usize, usize, f64)]) -> BiPoly<f64> {
        BiPoly::from_terms(&terms.iter().map(|&(i, j, c)| (i, j, c64(c, 0.0))).collect::<Vec<_>>())
    }

    /// `Y = 1/y` substituted by hand: `dY/dx = -Y^2 P(x,1/Y)/Q(x,1/Y)`.
    fn substituted_slope(model: &OdeModel<f64>, x: num_complex::Complex64, yy: num_complex::Complex64) -> num_complex::Complex64 {
        -yy * yy * model.slope(x, yy.inv())
    }

    #[test]
    fn chart_of_exponential() {
        let model = OdeModel::new(bp(&[(0, 1, 1.0)]), bp(&[(0, 0, 1.0)])).unwrap();
        let inf = model.infinity();
        assert_eq!(inf.case, ChartCase::NPlus2GeM);
        assert_eq!(inf.p, bp(&[(0, 1, -1.0)]));
        assert_eq!(inf.q, bp(&[(0, 0, 1.0)]));
        let (x, yy) = (c64(0.3, 0.1), c64(0.05, -0.02));
        assert!((model.slope_infinity(x, yy) - substituted_slope(&model, x, yy)).norm() < 1e-15);
    }

    #[test]
    fn chart_of_painleve_example() {
        let model = OdeModel::new(bp(&[(0, 1, 1.0)]), bp(&[(1, 1, 1.0), (1, 0, 1.0)])).unwrap();
        assert_eq!(model.infinity().p, bp(&[(0, 2, -1.0)]));
        assert_eq!(model.infinity().q, bp(&[(1, 0, 1.0), (1, 1, 1.0)]));
    }

    #[test]
    fn chart_of_hk_model() {
        for k in 2..6 {
            let model = OdeModel::new(bp(&[(0, 0, -1.0)]), bp(&[(0, k - 1, k as f64)])).unwrap();
            assert_eq!(model.infinity().case, ChartCase::NPlus2GeM);
            assert_eq!(model.infinity().p, bp(&[(0, k + 1, 1.0)]));
            assert_eq!(model.infinity().q, bp(&[(0, 0, k as f64)]));
        }
    }

    #[test]
    fn chart_with_high_degree_numerator() {
        // y' = y^4: m = 4 > n + 2 = 2
        let model = OdeModel::new(bp(&[(0, 4, 1.0)]), bp(&[(0, 0, 1.0)])).unwrap();
        let inf = model.infinity();
        assert_eq!(inf.case, ChartCase::NPlus2LtM);
        assert_eq!(inf.p, bp(&[(0, 0, -1.0)]));
        assert_eq!(inf.q, bp(&[(0, 2, 1.0)]));
        let (x, yy) = (c64(1.0, 0.0), c64(0.1, 0.2));
        assert!((model.slope_infinity(x, yy) - substituted_slope(&model, x, yy)).norm() < 1e-12);
    }

    #[test]
    fn leading_coefficient_keeps_charts_free_of_common_powers() {
        // the Y^0 coefficient of Q~ (case one) or P~ (case two) is the leading
        // y-coefficient, so the joint trim never removes anything
        for (p, q) in [
            (bp(&[(0, 0, 1.0)]), bp(&[(0, 3, 1.0), (1, 0, 1.0)])),
            (bp(&[(0, 3, 1.0)]), bp(&[(0, 0, 1.0)])),
            (bp(&[(0, 5, 1.0), (2, 1, 1.0)]), bp(&[(1, 1, 1.0), (0, 0, 2.0)])),
        ] {
            assert_eq!(OdeModel::new(p, q).unwrap().infinity().trimmed, 0);
        }
        // y' = 1/x
        let model = OdeModel::new(bp(&[(0, 0, 1.0)]), bp(&[(1, 0, 1.0)])).unwrap();
        assert_eq!(model.infinity().p, bp(&[(0, 2, -1.0)]));
        assert_eq!(model.infinity().q, bp(&[(1, 0, 1.0)]));
    }

    #[test]
    fn admission() {
        assert_eq!(OdeModel::new(BiPoly::<f64>::zero(), BiPoly::zero()), Err(FoliationError::ZeroPolynomial));
        assert_eq!(OdeModel::new(bp(&[(0, 2, 1.0)]), bp(&[(0, 1, 1.0)])), Err(FoliationError::NotCoprime));
        assert_eq!(OdeModel::new(bp(&[(0, 0, 1.0)]), BiPoly::zero()), Err(FoliationError::NonIsolatedSingularities));
        assert!(OdeModel::new(BiPoly::<f64>::zero(), bp(&[(0, 0, 1.0)])).is_ok());
    }
}
