//! Simultaneous-iteration root finding (Aberth–Ehrlich) with multiplicity
//! recovery by clustering.

use num_traits::{One, Zero};

use super::{AlgebraError, UniPoly};
use crate::scalar::{cabs, Real, C};

/// Roots closer than this (after scaling the roots to unit max modulus) are
/// always merged into one multiple root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-8;

/// Coarsest linkage radius tried when looking for numerically multiple roots.
const CLUSTER_START: f64 = 1e-2;

/// Backward-error threshold for accepting a cluster of `m` roots as one
/// `m`-fold root: the first `m` Taylor coefficients at the centroid must be
/// below this fraction of the largest one.
const MULTIPLICITY_TOL: f64 = 1e-11;

const MAX_ITER: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T: Real> {
    pub value: C<T>,
    pub multiplicity: usize,
}

/// All roots of `p` with multiplicities; the multiplicities add up to `deg p`.
pub fn unipoly_roots<T: Real>(p: &UniPoly<T>) -> Result<Vec<Root<T>>, AlgebraError> {
    let deg = p.degree().ok_or(AlgebraError::ZeroPolynomial)?;
    let coeffs = p.coeffs();
    let zeros_at_origin = coeffs.iter().take_while(|c| **c == C::zero()).count();
    let mut out = Vec::new();
    if zeros_at_origin > 0 {
        out.push(Root { value: C::zero(), multiplicity: zeros_at_origin });
    }
    let rest = UniPoly::new(coeffs[zeros_at_origin..].to_vec());
    let n = deg - zeros_at_origin;
    match n {
        0 => {}
        1 => {
            let c = rest.coeffs();
            out.push(Root { value: -c[0] / c[1], multiplicity: 1 });
        }
        _ => out.extend(nontrivial_roots(&rest)),
    }
    debug_assert_eq!(out.iter().map(|r| r.multiplicity).sum::<usize>(), deg);
    Ok(out)
}

fn nontrivial_roots<T: Real>(p: &UniPoly<T>) -> Vec<Root<T>> {
    let n = p.degree().unwrap();
    // scale so that the roots have modulus of order one
    let c = p.coeffs();
    let radius = (cabs(c[0]) / cabs(c[n])).powf(T::one() / T::from_usize(n).unwrap());
    let bound = root_bound(p);
    let scale = if radius > T::zero() && radius.is_finite() { radius.min(bound) } else { bound };
    let scaled = p.compose_scale(C::new(scale, T::zero()));
    let scaled = scaled.scale(C::new(T::one() / scaled.max_coeff(), T::zero()));

    let z = aberth(&scaled);
    // normalize to unit max modulus for the clustering thresholds
    let zmax = z.iter().map(|r| cabs(*r)).fold(T::zero(), T::max).max(T::min_positive_value());
    let unit = scaled.compose_scale(C::new(zmax, T::zero()));
    let unit = unit.scale(C::new(T::one() / unit.max_coeff(), T::zero()));
    let zu: Vec<C<T>> = z.iter().map(|r| *r / zmax).collect();

    let mut groups = Vec::new();
    let all: Vec<usize> = (0..zu.len()).collect();
    split_clusters(&unit, &zu, &all, T::lit(CLUSTER_START), &mut groups);

    let factor = scale * zmax;
    groups
        .into_iter()
        .map(|g| {
            let m = g.len();
            let mut centroid = cluster_center(&unit, &zu, &g);
            if m == 1 {
                centroid = polish(&unit, centroid);
            }
            Root { value: centroid * factor, multiplicity: m }
        })
        .collect()
}

/// Upper bound on root moduli (Fujiwara).
fn root_bound<T: Real>(p: &UniPoly<T>) -> T {
    let c = p.coeffs();
    let n = c.len() - 1;
    let lead = cabs(c[n]);
    let two = T::lit(2.0);
    let mut b = T::zero();
    for (k, coeff) in c.iter().enumerate().take(n) {
        let e = T::one() / T::from_usize(n - k).unwrap();
        let mut term = (cabs(*coeff) / lead).powf(e);
        if k == 0 {
            term = (cabs(*coeff) / (two * lead)).powf(e);
        }
        b = b.max(term);
    }
    (two * b).max(T::min_positive_value())
}

fn aberth<T: Real>(p: &UniPoly<T>) -> Vec<C<T>> {
    let n = p.degree().unwrap();
    let nf = T::from_usize(n).unwrap();
    let c = p.coeffs();
    let r0 = (cabs(c[0]) / cabs(c[n])).powf(T::one() / nf);
    let r0 = if r0 > T::zero() && r0.is_finite() { r0 } else { T::one() };
    let mut z: Vec<C<T>> = (0..n)
        .map(|k| {
            let theta = T::TAU() * T::from_usize(k).unwrap() / nf + T::lit(0.4);
            C::from_polar(r0, theta)
        })
        .collect();
    let tiny = T::epsilon() * T::lit(4.0);
    for _ in 0..MAX_ITER {
        let mut converged = true;
        for i in 0..n {
            let (v, dv) = p.eval_with_derivative(z[i]);
            if v == C::zero() {
                continue;
            }
            let ratio = v / dv;
            let sum = (0..n).filter(|&j| j != i).fold(C::<T>::zero(), |s, j| {
                let d = z[i] - z[j];
                if d == C::zero() {
                    s
                } else {
                    s + C::<T>::one() / d
                }
            });
            let w: C<T> = ratio / (C::<T>::one() - ratio * sum);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[i] -= w;
            if cabs(w) > tiny * (T::one() + cabs(z[i])) {
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
    z
}

/// Centroid of a cluster refined by Newton on `p^(m-1)`, which has a simple
/// root where `p` has an `m`-fold one. Aberth iterates around a multiple root
/// are not symmetric, so the plain centroid is only accurate to about
/// `eps^(2/m)`.
fn cluster_center<T: Real>(p: &UniPoly<T>, z: &[C<T>], comp: &[usize]) -> C<T> {
    let m = comp.len();
    let centroid = comp.iter().fold(C::zero(), |s, &i| s + z[i]) / T::from_usize(m).unwrap();
    if m == 1 {
        return centroid;
    }
    let mut d = p.clone();
    for _ in 1..m {
        d = d.derivative();
    }
    let spread = comp.iter().map(|&i| cabs(z[i] - centroid)).fold(T::zero(), T::max);
    let mut c = centroid;
    let mut best = cabs(d.eval(c));
    for _ in 0..20 {
        let (v, dv) = d.eval_with_derivative(c);
        if dv == C::zero() {
            break;
        }
        let cand = c - v / dv;
        let val = cabs(d.eval(cand));
        if val.partial_cmp(&best) != Some(std::cmp::Ordering::Less) || cabs(cand - centroid) > T::lit(2.0) * spread {
            break;
        }
        best = val;
        c = cand;
    }
    c
}

/// Recursively splits single-linkage components until each one is either a
/// singleton, a backward-stable multiple root, or tighter than the hard
/// cluster tolerance.
fn split_clusters<T: Real>(p: &UniPoly<T>, z: &[C<T>], members: &[usize], delta: T, out: &mut Vec<Vec<usize>>) {
    for comp in components(z, members, delta) {
        if comp.len() == 1 || delta <= T::tol(ROOT_CLUSTER_TOL) || is_multiple_root(p, z, &comp) {
            out.push(comp);
        } else {
            split_clusters(p, z, &comp, delta / T::lit(10.0), out);
        }
    }
}

fn components<T: Real>(z: &[C<T>], members: &[usize], delta: T) -> Vec<Vec<usize>> {
    let mut label: Vec<Option<usize>> = vec![None; members.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for start in 0..members.len() {
        if label[start].is_some() {
            continue;
        }
        let id = comps.len();
        label[start] = Some(id);
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(a) = stack.pop() {
            comp.push(members[a]);
            for b in 0..members.len() {
                if label[b].is_none() && cabs(z[members[a]] - z[members[b]]) <= delta {
                    label[b] = Some(id);
                    stack.push(b);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

fn is_multiple_root<T: Real>(p: &UniPoly<T>, z: &[C<T>], comp: &[usize]) -> bool {
    let m = comp.len();
    let t = p.taylor_at(cluster_center(p, z, comp));
    let top = t.iter().map(|c| cabs(*c)).fold(T::zero(), T::max);
    let low = t.iter().take(m).map(|c| cabs(*c)).fold(T::zero(), T::max);
    low <= T::tol(MULTIPLICITY_TOL) * top
}

fn polish<T: Real>(p: &UniPoly<T>, mut z: C<T>) -> C<T> {
    let mut best = cabs(p.eval(z));
    for _ in 0..3 {
        let (v, dv) = p.eval_with_derivative(z);
        if dv == C::zero() {
            break;
        }
        let cand = z - v / dv;
        let val = cabs(p.eval(cand));
        if val < best {
            best = val;
            z = cand;
        } else {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::c64;
    use num_complex::Complex64;

    fn sorted(mut r: Vec<Root<f64>>) -> Vec<Root<f64>> {
        r.sort_by(|a, b| a.value.re.partial_cmp(&b.value.re).unwrap().then(a.value.im.partial_cmp(&b.value.im).unwrap()));
        r
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        assert_eq!(unipoly_roots(&UniPoly::<f64>::zero()), Err(AlgebraError::ZeroPolynomial));
    }

    #[test]
    fn y2_plus_1() {
        let r = sorted(unipoly_roots(&UniPoly::<f64>::from_real(&[1.0, 0.0, 1.0])).unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0].value - c64(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1].value - c64(0.0, 1.0)).norm() < 1e-14);
        assert!(r.iter().all(|x| x.multiplicity == 1));
    }

    #[test]
    fn triple_root_is_merged() {
        // (y - 1)^3
        let r = unipoly_roots(&UniPoly::<f64>::from_real(&[-1.0, 3.0, -3.0, 1.0])).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 3);
        assert!((r[0].value - c64(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn vieta_for_cubic_slice() {
        // y^3 - 3y^2 + x at x = 4
        let p = UniPoly::<f64>::from_real(&[4.0, 0.0, -3.0, 1.0]);
        let r = unipoly_roots(&p).unwrap();
        assert_eq!(r.iter().map(|x| x.multiplicity).sum::<usize>(), 3);
        let prod = r.iter().fold(Complex64::new(1.0, 0.0), |s, x| s * x.value.powi(x.multiplicity as i32));
        let sum = r.iter().fold(Complex64::new(0.0, 0.0), |s, x| s + x.value * x.multiplicity as f64);
        assert!((prod - c64(-4.0, 0.0)).norm() < 1e-9, "{prod}");
        assert!((sum - c64(3.0, 0.0)).norm() < 1e-9, "{sum}");
    }

    #[test]
    fn close_but_distinct_roots_stay_apart() {
        let roots = [c64(0.5, 0.0), c64(0.5 + 1e-3, 0.0), c64(-0.3, 0.7)];
        let p = UniPoly::from_roots(&roots, c64(1.0, 0.0));
        let r = unipoly_roots(&p).unwrap();
        assert_eq!(r.len(), 3);
        for want in roots {
            assert!(r.iter().any(|x| (x.value - want).norm() < 1e-9));
        }
    }

    #[test]
    fn zero_roots_are_exact() {
        // y^2 (y - 2)
        let r = unipoly_roots(&UniPoly::<f64>::from_real(&[0.0, 0.0, -2.0, 1.0])).unwrap();
        assert!(r.contains(&Root { value: c64(0.0, 0.0), multiplicity: 2 }));
    }

    #[test]
    fn works_in_single_precision() {
        let p = UniPoly::<f32>::from_real(&[-6.0, 11.0, -6.0, 1.0]);
        let mut r: Vec<f32> = unipoly_roots(&p).unwrap().iter().map(|x| x.value.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in r.iter().zip([1.0f32, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-4);
        }
    }
}
