use std::f64::consts::{E, PI};

use algebroid::algebra::BiPoly;
use algebroid::continuation::{
    apply_detour, continue_along, enumerate_branches, monodromy_order, ChartedPoint, ContinuationError, DetourPolicy, EventKind,
    MonodromyOrder, PathSpec, Status,
};
use algebroid::foliation::{Fiber, OdeModel};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn model(p: &[(usize, usize, f64)], q: &[(usize, usize, f64)]) -> OdeModel<f64> {
    let bp = |t: &[(usize, usize, f64)]| BiPoly::from_terms(&t.iter().map(|&(i, j, v)| (i, j, c(v, 0.0))).collect::<Vec<_>>());
    OdeModel::new(bp(p), bp(q)).unwrap()
}

fn exp_model() -> OdeModel<f64> {
    model(&[(0, 1, 1.0)], &[(0, 0, 1.0)])
}

fn hk(k: usize) -> OdeModel<f64> {
    model(&[(0, 0, -1.0)], &[(0, k - 1, k as f64)])
}

fn painleve8() -> OdeModel<f64> {
    model(&[(0, 1, 1.0)], &[(1, 1, 1.0), (1, 0, 1.0)])
}

fn endpoint(r: &algebroid::continuation::ContinuationResult) -> Complex64 {
    r.endpoint.expect("completed run").y_value()
}

#[test]
fn exponential_along_a_segment() {
    let r =
        continue_along(&exp_model(), Fiber::Finite(c(1.0, 0.0)), &PathSpec::line(c(0.0, 0.0), c(1.0, 0.0)), &DetourPolicy::halt()).unwrap();
    assert_eq!(r.status, Status::Completed);
    assert!((endpoint(&r) - c(E, 0.0)).norm() < 1e-8);
    assert!(r.events.is_empty());
    assert!((r.trace.last().unwrap().t - 1.0).abs() < 1e-15);
}

#[test]
fn square_root_changes_sign_around_zero() {
    let m = model(&[(0, 1, 0.5)], &[(1, 0, 1.0)]);
    let path = PathSpec::circle(c(1.0, 0.0), c(0.0, 0.0), 1.0);
    let r = continue_along(&m, Fiber::Finite(c(1.0, 0.0)), &path, &DetourPolicy::halt().with_epsilon(0.1)).unwrap();
    assert!((endpoint(&r) - c(-1.0, 0.0)).norm() < 1e-8, "{}", endpoint(&r));
}

#[test]
fn halts_at_the_hk_singularity() {
    for k in [2usize, 3] {
        let r =
            continue_along(&hk(k), Fiber::Finite(c(1.0, 0.0)), &PathSpec::line(c(0.0, 0.0), c(2.0, 0.0)), &DetourPolicy::halt()).unwrap();
        assert_eq!(r.status, Status::Halted);
        assert!(r.endpoint.is_none());
        let e = &r.events[0];
        assert!((e.x1 - c(1.0, 0.0)).norm() < 1e-7, "{}", e.x1);
        assert!((e.t_hit - 0.5).abs() < 1e-7);
        assert_eq!(e.kind, EventKind::Algebroid { k });
        assert_eq!(e.local_order, Some(k));
    }
}

/// Polyline lift of the y-path `ys` through `x = y e^y / c` on the leaf `H = c`.
fn painleve_lift(cst: Complex64, ys: &[Complex64]) -> Vec<Complex64> {
    ys.iter().map(|y| y * y.exp() / cst).collect()
}

#[test]
fn painleve_tangency_on_a_lifted_path() {
    // leaf through (1, 1): the upper unit half circle in y reaches y = -1 at x1 = -1/e^2
    let cst = c(E, 0.0);
    let ys: Vec<Complex64> = (0..=400).map(|i| Complex64::from_polar(1.0, PI * i as f64 / 400.0)).collect();
    let mut xs = painleve_lift(cst, &ys);
    let n = xs.len();
    let dir = (xs[n - 1] - xs[n - 2]) / (xs[n - 1] - xs[n - 2]).norm();
    xs.push(xs[n - 1] + dir * 0.05);
    let path = PathSpec::polyline(&xs);
    let r = continue_along(&painleve8(), Fiber::Finite(c(1.0, 0.0)), &path, &DetourPolicy::halt().with_epsilon(0.02)).unwrap();
    let e = &r.events[0];
    assert!((e.x1 - c(-1.0 / (E * E), 0.0)).norm() < 1e-9, "{}", e.x1);
    assert_eq!(e.kind, EventKind::Algebroid { k: 2 });
    let Some(Fiber::Finite(y1)) = e.y1 else { panic!() };
    assert!((y1 - c(-1.0, 0.0)).norm() < 1e-6);
}

#[test]
fn scripted_windings_pick_the_sign() {
    let path = PathSpec::line(c(0.0, 0.0), c(2.0, 0.0));
    let run = |w: Vec<i64>| continue_along(&hk(2), Fiber::Finite(c(1.0, 0.0)), &path, &DetourPolicy::scripted(w)).unwrap();
    let plus = run(vec![1]);
    let minus = run(vec![-1]);
    assert!((endpoint(&plus) - c(0.0, 1.0)).norm() < 1e-8, "{}", endpoint(&plus));
    assert!((endpoint(&minus) - c(0.0, -1.0)).norm() < 1e-8);
    // w and w + k land on the same determination
    assert!((endpoint(&run(vec![3])) - endpoint(&plus)).norm() < 1e-6);
    assert!((endpoint(&run(vec![-3])) - endpoint(&minus)).norm() < 1e-6);
    assert_eq!(plus.address.windings[0].w, 1);
    assert_eq!(plus.events[0].kind, EventKind::Algebroid { k: 2 });
    assert_eq!(
        continue_along(&hk(2), Fiber::Finite(c(1.0, 0.0)), &path, &DetourPolicy::scripted(vec![])).unwrap_err(),
        ContinuationError::ScriptExhausted
    );
}

#[test]
fn detour_around_a_regular_point_is_harmless() {
    let path = PathSpec::line(c(0.0, 0.0), c(1.0, 0.0));
    let detoured = apply_detour(&path, 0.5, c(0.5, 0.0), 0.1, 1).unwrap();
    let r = continue_along(&exp_model(), Fiber::Finite(c(1.0, 0.0)), &detoured, &DetourPolicy::halt()).unwrap();
    assert!((endpoint(&r) - c(E, 0.0)).norm() < 1e-8);
    assert_eq!(apply_detour(&path, 0.5, c(0.5, 0.0), 0.1, 0).unwrap(), path);
}

#[test]
fn enumeration_finds_both_square_roots() {
    let path = PathSpec::line(c(0.0, 0.0), c(2.0, 0.0));
    let mut ends: Vec<Complex64> =
        enumerate_branches(&hk(2), Fiber::Finite(c(1.0, 0.0)), &path, &DetourPolicy::enumerate()).unwrap().iter().map(endpoint).collect();
    ends.sort_by(|a, b| a.im.total_cmp(&b.im));
    assert_eq!(ends.len(), 2);
    assert!((ends[0] - c(0.0, -1.0)).norm() < 1e-8 && (ends[1] - c(0.0, 1.0)).norm() < 1e-8);
}

#[test]
fn endpoint_on_the_singularity() {
    let r = continue_along(&hk(2), Fiber::Finite(c(1.0, 0.0)), &PathSpec::line(c(0.0, 0.0), c(1.0, 0.0)), &DetourPolicy::halt()).unwrap();
    assert_eq!(r.status, Status::EndpointSingularity);
    assert!(r.endpoint.is_none());
    assert_eq!(r.events[0].kind, EventKind::EndpointSingularity);
    let Some(Fiber::Finite(y1)) = r.events[0].y1 else { panic!() };
    assert!(y1.norm() < 1e-6);
}

#[test]
fn guarded_preconditions() {
    let through_zero = PathSpec::line(c(-1.0, 0.1), c(1.0, 0.1));
    assert_eq!(
        continue_along(&painleve8(), Fiber::Finite(c(1.0, 0.0)), &through_zero, &DetourPolicy::halt()).unwrap_err(),
        ContinuationError::PathTooCloseToSigmaE
    );
    let away = PathSpec::line(c(1.0, 0.0), c(2.0, 0.0));
    assert_eq!(
        continue_along(&painleve8(), Fiber::Finite(c(-1.0, 0.0)), &away, &DetourPolicy::halt()).unwrap_err(),
        ContinuationError::StartOnDiscriminant
    );
}

#[test]
fn pole_passes_through_the_infinity_chart() {
    // y' = y^2, y(0) = 1: y = 1/(1 - x) has a pole at 1, which the infinity chart crosses
    let m = model(&[(0, 2, 1.0)], &[(0, 0, 1.0)]);
    let r = continue_along(&m, Fiber::Finite(c(1.0, 0.0)), &PathSpec::line(c(0.0, 0.0), c(2.0, 0.0)), &DetourPolicy::halt()).unwrap();
    assert!((endpoint(&r) - c(-1.0, 0.0)).norm() < 1e-8, "{}", endpoint(&r));
    assert!(r.trace.iter().any(|p| p.point.chart == algebroid::continuation::Chart::Infinity));
}

#[test]
fn monodromy_of_hk_at_the_movable_point() {
    for k in 2..=4usize {
        let seed = ChartedPoint::affine(c(0.9, 0.0), c(0.1f64.powf(1.0 / k as f64), 0.0));
        assert_eq!(monodromy_order(&hk(k), c(1.0, 0.0), seed, 12), MonodromyOrder::Finite(k));
    }
}

#[test]
fn trace_csv_has_header_and_rows() {
    let r =
        continue_along(&exp_model(), Fiber::Finite(c(1.0, 0.0)), &PathSpec::line(c(0.0, 0.0), c(1.0, 0.0)), &DetourPolicy::halt()).unwrap();
    let csv = r.trace_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re_x,im_x,re_y,im_y,chart,step_size"));
    assert_eq!(lines.count(), r.trace.len());
}
