use num_traits::Zero;

use super::{negligible, FoliationError, OdeModel, SING_TOL};
use crate::algebra::{resultant_y, unipoly_roots, AlgebraError, BiPoly, UniPoly, ROOT_CLUSTER_TOL};
use crate::scalar::{cabs, Real, C};

/// Common zeros of `P` and `Q`: affine points and abscissas of points on `y = ∞`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SingularSet<T: Real> {
    pub affine: Vec<(C<T>, C<T>)>,
    pub at_infinity: Vec<C<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    SingularPoint,
    VerticalLeaf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPoint<T: Real> {
    pub x: C<T>,
    /// Sorted, without repetitions.
    pub provenance: Vec<Provenance>,
}

/// The finite set of abscissas above which solutions may have non-algebroid
/// singularities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FixedSingularLocus<T: Real> {
    pub points: Vec<SigmaPoint<T>>,
}

impl<T: Real> FixedSingularLocus<T> {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Distance from `x` to the nearest point, `+∞` when empty.
    pub fn distance(&self, x: C<T>) -> T {
        self.points.iter().map(|p| cabs(p.x - x)).fold(T::infinity(), T::min)
    }

    /// True when `x` coincides with a point at the dedup radius.
    pub fn contains(&self, x: C<T>) -> bool {
        self.points.iter().any(|p| same_abscissa(p.x, x))
    }
}

fn same_abscissa<T: Real>(a: C<T>, b: C<T>) -> bool {
    cabs(a - b) <= T::tol(ROOT_CLUSTER_TOL) * T::one().max(cabs(a)).max(cabs(b))
}

/// Sets components that are negligible against the modulus to exactly zero,
/// so that e.g. `1e-17 + 2i` is reported as `2i`.
fn snap<T: Real>(z: C<T>) -> C<T> {
    let cut = T::epsilon() * T::lit(64.0) * T::one().max(cabs(z));
    let f = |v: T| if v.abs() <= cut { T::zero() } else { v };
    C::new(f(z.re), f(z.im))
}

fn slice_is_zero<T: Real>(p: &BiPoly<T>, x: C<T>) -> bool {
    let scale = p.max_coeff() * T::one().max(cabs(x)).powi(p.deg_x() as i32);
    let slice = p.at_x(x);
    slice.is_zero() || slice.max_coeff() <= T::tol(SING_TOL) * scale
}

fn root_values<T: Real>(u: &UniPoly<T>) -> Vec<C<T>> {
    if u.degree().is_none_or(|d| d == 0) {
        return Vec::new();
    }
    unipoly_roots(u).map(|r| r.into_iter().map(|r| r.value).collect()).unwrap_or_default()
}

/// Newton on the system `P = Q = 0`; returns the best point found.
fn refine_common_zero<T: Real>(p: &BiPoly<T>, q: &BiPoly<T>, mut x: C<T>, mut y: C<T>) -> (C<T>, C<T>) {
    let (px, py, qx, qy) = (p.partial_x(), p.partial_y(), q.partial_x(), q.partial_y());
    let residual = |x: C<T>, y: C<T>| cabs(p.eval(x, y)) / p.local_scale(x, y) + cabs(q.eval(x, y)) / q.local_scale(x, y);
    let mut best = residual(x, y);
    for _ in 0..60 {
        let (a, b, c, d) = (px.eval(x, y), py.eval(x, y), qx.eval(x, y), qy.eval(x, y));
        let det = a * d - b * c;
        if det == C::zero() {
            break;
        }
        let (f, g) = (p.eval(x, y), q.eval(x, y));
        let nx = x - (d * f - b * g) / det;
        let ny = y - (a * g - c * f) / det;
        let r = residual(nx, ny);
        if r.partial_cmp(&best) != Some(std::cmp::Ordering::Less) {
            break;
        }
        best = r;
        x = nx;
        y = ny;
    }
    (x, y)
}

/// Affine common zeros via the resultant in `y`, and points at `y = ∞` via the
/// common zeros of `P~(x,0)` and `Q~(x,0)`.
pub fn singular_points<T: Real>(model: &OdeModel<T>) -> Result<SingularSet<T>, FoliationError> {
    let (p, q) = (model.p(), model.q());
    let mut out = SingularSet::default();
    match resultant_y(p, q) {
        // coprime polynomials without y have no common zero
        Err(AlgebraError::BothConstantInY) => {}
        Err(AlgebraError::ZeroPolynomial) => unreachable!("resultant_y does not fail on zero input"),
        Ok(res) if res.is_zero() => return Err(FoliationError::NonIsolatedSingularities),
        Ok(res) => {
            for x0 in root_values(&res) {
                let (pz, qz) = (slice_is_zero(p, x0), slice_is_zero(q, x0));
                if pz && qz {
                    return Err(FoliationError::NonIsolatedSingularities);
                }
                let mut candidates = Vec::new();
                if !pz {
                    candidates.extend(root_values(&p.at_x(x0)));
                }
                if !qz {
                    candidates.extend(root_values(&q.at_x(x0)));
                }
                for y0 in candidates {
                    let (x, y) = refine_common_zero(p, q, x0, y0);
                    let ok =
                        negligible(p.eval(x, y), p.local_scale(x, y), SING_TOL) && negligible(q.eval(x, y), q.local_scale(x, y), SING_TOL);
                    let fresh = !out.affine.iter().any(|&(a, b)| same_abscissa(a, x) && same_abscissa(b, y));
                    if ok && fresh {
                        out.affine.push((snap(x), snap(y)));
                    }
                }
            }
        }
    }

    let inf = model.infinity();
    let (a, b) = (inf.p.at_y(C::zero()), inf.q.at_y(C::zero()));
    let candidates = match (a.is_zero(), b.is_zero()) {
        (true, true) => return Err(FoliationError::NonIsolatedSingularities),
        (true, false) => root_values(&b),
        (false, true) => root_values(&a),
        (false, false) => root_values(&a).into_iter().chain(root_values(&b)).collect(),
    };
    let vanishes = |u: &UniPoly<T>, x: C<T>| {
        let scale = u.max_coeff() * T::one().max(cabs(x)).powi(u.degree().unwrap_or(0) as i32);
        negligible(u.eval(x), scale, SING_TOL)
    };
    for x in candidates {
        if vanishes(&a, x) && vanishes(&b, x) && !out.at_infinity.iter().any(|&z| same_abscissa(z, x)) {
            out.at_infinity.push(snap(x));
        }
    }
    Ok(out)
}

/// Abscissas `x0` with `Q(x0, ·) ≡ 0`.
pub fn vertical_leaves<T: Real>(model: &OdeModel<T>) -> Vec<C<T>> {
    let q = model.q();
    let coeffs: Vec<UniPoly<T>> = (0..=q.deg_y()).map(|j| q.y_coeff(j)).filter(|c| !c.is_zero()).collect();
    let Some(lowest) = coeffs.iter().min_by_key(|c| c.degree()) else {
        return Vec::new();
    };
    let mut out: Vec<C<T>> = Vec::new();
    for x in root_values(lowest) {
        if slice_is_zero(q, x) && !out.iter().any(|&z| same_abscissa(z, x)) {
            out.push(snap(x));
        }
    }
    out
}

/// Projection of the singular set (affine and at infinity) together with the
/// vertical leaves, deduplicated and tagged with where each point came from.
pub fn sigma_e<T: Real>(model: &OdeModel<T>) -> Result<FixedSingularLocus<T>, FoliationError> {
    let sing = singular_points(model)?;
    let tagged = sing
        .affine
        .iter()
        .map(|&(x, _)| (x, Provenance::SingularPoint))
        .chain(sing.at_infinity.iter().map(|&x| (x, Provenance::SingularPoint)))
        .chain(vertical_leaves(model).into_iter().map(|x| (x, Provenance::VerticalLeaf)));
    let mut points: Vec<SigmaPoint<T>> = Vec::new();
    for (x, tag) in tagged {
        match points.iter_mut().find(|p| same_abscissa(p.x, x)) {
            Some(p) => {
                if !p.provenance.contains(&tag) {
                    p.provenance.push(tag);
                    p.provenance.sort();
                }
            }
            None => points.push(SigmaPoint { x, provenance: vec![tag] }),
        }
    }
    points.sort_by(|a, b| (a.x.re, a.x.im).partial_cmp(&(b.x.re, b.x.im)).unwrap_or(std::cmp::Ordering::Equal));
    Ok(FixedSingularLocus { points })
}
