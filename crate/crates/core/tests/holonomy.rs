use std::f64::consts::PI;

use algebroid::algebra::BiPoly;
use algebroid::continuation::{continue_along, Chart, DetourPolicy, PathSpec};
use algebroid::foliation::{Fiber, OdeModel};
use algebroid::holonomy::{branch_count_bound, holonomy_map, FitKind};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn model(p: &[(usize, usize, f64)], q: &[(usize, usize, f64)]) -> OdeModel<f64> {
    let bp = |t: &[(usize, usize, f64)]| BiPoly::from_terms(&t.iter().map(|&(i, j, v)| (i, j, c(v, 0.0))).collect::<Vec<_>>());
    OdeModel::new(bp(p), bp(q)).unwrap()
}

fn painleve8() -> OdeModel<f64> {
    model(&[(0, 1, 1.0)], &[(1, 1, 1.0), (1, 0, 1.0)])
}

fn hk(k: usize) -> OdeModel<f64> {
    model(&[(0, 0, -1.0)], &[(0, k - 1, k as f64)])
}

/// Solves `z + log z = w` near `guess` (the holonomy germ of the Painlevé leaf).
fn psi_inverse(w: Complex64, guess: Complex64) -> Complex64 {
    let mut z = guess;
    for _ in 0..60 {
        let dz = (z + z.ln() - w) / (1.0 + 1.0 / z);
        z -= dz;
        if dz.norm() < 1e-15 * z.norm() {
            break;
        }
    }
    z
}

#[test]
fn painleve_loop_near_infinity_is_one_translation_like_branch() {
    let path = PathSpec::circle(c(1.0, 0.0), c(0.0, 0.0), 1.0);
    let h = holonomy_map(&painleve8(), Fiber::Finite(c(8.0, 0.0)), 0.5, &path, &DetourPolicy::enumerate(), 8).unwrap();
    assert_eq!(h.branches.len(), 1);
    assert_eq!(h.disk_chart, Chart::Affine);
    let b = &h.branches[0];
    assert!(b.fit.is_fit(), "{:?}", b.fit);
    for (s, p) in &b.values {
        // y + log y gains 2πi along the loop, with log continued from the seed
        let expect = psi_inverse(s + s.ln() + c(0.0, 2.0 * PI), s + c(0.0, 2.0 * PI));
        assert!((p.y_value() - expect).norm() < 1e-7, "{s}: {} vs {expect}", p.y_value());
    }
}

#[test]
fn painleve_loop_near_zero_is_the_identity() {
    let path = PathSpec::circle(c(1.0, 0.0), c(0.0, 0.0), 1.0);
    let h = holonomy_map(&painleve8(), Fiber::Finite(c(0.01, 0.0)), 0.005, &path, &DetourPolicy::enumerate(), 8).unwrap();
    assert_eq!(h.branches.len(), 1);
    let b = &h.branches[0];
    for (s, p) in &b.values {
        assert!((p.y_value() - s).norm() < 1e-6);
    }
    assert_eq!(b.fit.kind, FitKind::Analytic { degree: 1 });
}

#[test]
fn square_root_model_gives_two_branches() {
    let path = PathSpec::line(c(0.0, 0.0), c(3.0, 0.0));
    let policy = DetourPolicy::enumerate();
    let h = holonomy_map(&hk(2), Fiber::Finite(c(1.0, 0.0)), 0.1, &path, &policy, 8).unwrap();
    assert_eq!(h.branches.len(), 2);
    assert!(h.endpoint_clusters.iter().all(|&n| n == 2), "{:?}", h.endpoint_clusters);
    for b in &h.branches {
        assert!(b.fit.is_fit());
        for (s, p) in &b.values {
            let root = (s * s - 3.0).sqrt();
            let y = p.y_value();
            assert!((y - root).norm().min((y + root).norm()) < 1e-7);
        }
    }
    // the two branches are opposite at every seed
    let (a, b) = (&h.branches[0], &h.branches[1]);
    for ((sa, pa), (sb, pb)) in a.values.iter().zip(&b.values) {
        assert_eq!(sa, sb);
        assert!((pa.y_value() + pb.y_value()).norm() < 1e-7);
    }
    let bound = branch_count_bound(&hk(2), &path, policy.epsilon).unwrap();
    assert!(h.branches.len() as u64 <= bound.bound);
}

#[test]
fn disk_at_infinity_uses_the_reciprocal_chart() {
    // y' = y: the loop is trivial, seeds live in Y = 1/y around 0
    let m = model(&[(0, 1, 1.0)], &[(0, 0, 1.0)]);
    let path = PathSpec::line(c(0.0, 0.0), c(0.5, 0.0));
    let h = holonomy_map(&m, Fiber::Infinity, 0.01, &path, &DetourPolicy::enumerate(), 8).unwrap();
    assert_eq!(h.disk_chart, Chart::Infinity);
    assert_eq!(h.branches.len(), 1);
    let b = &h.branches[0];
    assert_eq!(b.value_chart, Chart::Infinity);
    for (s, p) in &b.values {
        // Y(x) = Y0 e^{-x}
        assert!((b.value_in_chart(p) - s * (-0.5f64).exp()).norm() < 1e-9);
    }
}

#[test]
fn bounds_for_riccati_and_square_root() {
    // y = -log x + 2 log(x - 1): P = x + 1, Q = x(x - 1)
    let m = model(&[(0, 0, 1.0), (1, 0, 1.0)], &[(1, 0, -1.0), (2, 0, 1.0)]);
    let path = PathSpec::line(c(0.5, 0.5), c(1.5, 0.5));
    assert_eq!(branch_count_bound(&m, &path, 0.05).unwrap().bound, 1);
    let b = branch_count_bound(&hk(2), &PathSpec::line(c(0.0, 0.0), c(1.0, 0.0)), 0.25).unwrap();
    assert_eq!((b.k, b.bound), (1, 16));
}

#[test]
fn single_seed_continuation_agrees_with_the_map() {
    let path = PathSpec::circle(c(1.0, 0.0), c(0.0, 0.0), 1.0);
    let h = holonomy_map(&painleve8(), Fiber::Finite(c(8.0, 0.0)), 0.5, &path, &DetourPolicy::enumerate(), 8).unwrap();
    let (s, p) = h.branches[0].values[0];
    let r = continue_along(&painleve8(), Fiber::Finite(s), &path, &DetourPolicy::halt()).unwrap();
    assert!(r.endpoint.unwrap().sphere_distance(&p) < 1e-12);
}
