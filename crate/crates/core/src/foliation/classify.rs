use num_traits::Zero;

use super::{negligible, sigma_e, FoliationError, OdeModel, SING_TOL};
use crate::algebra::{BiPoly, UniPoly};
use crate::scalar::{cabs, Real, C};

/// Position on the vertical fiber: an affine value or the point `y = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fiber<T: Real> {
    Finite(C<T>),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Transversality,
    SimpleTangency,
    MultipleTangency,
    Singularity,
    VerticalLeaf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointClass {
    pub category: Category,
    /// `k >= 2` for the two tangency categories, `None` otherwise.
    pub tangency_order: Option<usize>,
}

impl PointClass {
    fn plain(category: Category) -> Self {
        Self { category, tangency_order: None }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    In,
    Out,
    Band,
}

/// Compares a normalized residual against the tolerance, with a factor-two
/// band on either side in which the answer is not trusted.
fn side(r: f64) -> Side {
    if r <= SING_TOL / 2.0 {
        Side::In
    } else if r > 2.0 * SING_TOL {
        Side::Out
    } else {
        Side::Band
    }
}

fn ratio<T: Real>(v: C<T>, scale: T) -> f64 {
    if scale == T::zero() {
        return if v == C::zero() { 0.0 } else { f64::INFINITY };
    }
    (cabs(v) / scale).to_f64().unwrap_or(f64::INFINITY)
}

/// Tolerance test is done in f64 on normalized residuals; the tolerance itself
/// is mapped to `T` first so single precision gets a looser threshold.
fn normalized<T: Real>(v: C<T>, scale: T) -> f64 {
    ratio(v, scale) * SING_TOL / T::tol(SING_TOL).to_f64().unwrap()
}

fn poly_scale<T: Real>(u: &UniPoly<T>, z: C<T>) -> T {
    u.max_coeff() * T::one().max(cabs(z)).powi(u.degree().unwrap_or(0) as i32)
}

/// Largest residual of the y-coefficients of `Q(x0, ·)`, each relative to its own scale.
fn leaf_residual<T: Real>(q: &BiPoly<T>, x0: C<T>) -> f64 {
    (0..=q.deg_y()).map(|j| q.y_coeff(j)).filter(|c| !c.is_zero()).map(|c| normalized(c.eval(x0), poly_scale(&c, x0))).fold(0.0, f64::max)
}

/// Number of leading Taylor coefficients of `u` at `z` that vanish.
fn root_multiplicity<T: Real>(u: &UniPoly<T>, z: C<T>) -> usize {
    let scale = poly_scale(u, z);
    u.taylor_at(z).iter().take_while(|&&t| negligible(t, scale, SING_TOL)).count()
}

/// Sorts the point into one of the five categories.
///
/// Precedence is vertical leaf, singular point, transversality, tangency. A
/// residual within a factor two of the tolerance on a deciding test yields
/// `AmbiguousClassification` naming both candidates.
pub fn classify_point<T: Real>(model: &OdeModel<T>, x0: C<T>, y0: Fiber<T>) -> Result<PointClass, FoliationError> {
    let (p, q, v) = match y0 {
        Fiber::Finite(y) => (model.p(), model.q(), y),
        Fiber::Infinity => (&model.infinity().p, &model.infinity().q, C::zero()),
    };
    let pv = normalized(p.eval(x0, v), p.local_scale(x0, v));
    let qv = normalized(q.eval(x0, v), q.local_scale(x0, v));

    let tangency = || {
        let k = 1 + root_multiplicity(&q.at_x(x0), v).max(1);
        let (qx, qy) = (q.partial_x(), q.partial_y());
        let lie = q.eval(x0, v) * qx.eval(x0, v) + p.eval(x0, v) * qy.eval(x0, v);
        let scale = q.local_scale(x0, v) * qx.local_scale(x0, v) + p.local_scale(x0, v) * qy.local_scale(x0, v);
        let category = if normalized(lie, scale) > SING_TOL { Category::SimpleTangency } else { Category::MultipleTangency };
        PointClass { category, tangency_order: Some(k) }
    };
    let below_leaf = || match (side(qv), side(pv)) {
        (Side::Out, _) => Ok(PointClass::plain(Category::Transversality)),
        (Side::Band, _) => Err(FoliationError::AmbiguousClassification(Category::Transversality, tangency().category)),
        (Side::In, Side::In) => Ok(PointClass::plain(Category::Singularity)),
        (Side::In, Side::Out) => Ok(tangency()),
        (Side::In, Side::Band) => Err(FoliationError::AmbiguousClassification(Category::Singularity, tangency().category)),
    };
    match side(leaf_residual(model.q(), x0)) {
        Side::In => Ok(PointClass::plain(Category::VerticalLeaf)),
        Side::Out => below_leaf(),
        Side::Band => {
            let other = below_leaf().map(|c| c.category).unwrap_or(Category::Singularity);
            Err(FoliationError::AmbiguousClassification(Category::VerticalLeaf, other))
        }
    }
}

/// Total intersection multiplicity of the vertical line `{x = x0}` with the
/// discriminant, points at `y = ∞` included.
pub fn total_tangency_multiplicity<T: Real>(model: &OdeModel<T>, x0: C<T>) -> Result<usize, FoliationError> {
    if sigma_e(model)?.contains(x0) {
        return Err(FoliationError::OnSigmaE);
    }
    let q = model.q();
    let affine = (0..=q.deg_y())
        .rev()
        .find(|&j| {
            let c = q.y_coeff(j);
            !c.is_zero() && !negligible(c.eval(x0), poly_scale(&c, x0), SING_TOL)
        })
        .unwrap_or(0);
    let at_infinity = root_multiplicity(&model.infinity().q.at_x(x0), C::zero());
    Ok(affine + at_infinity)
}
