use num_complex::Complex64;

use super::engine::{Context, Run};
use super::{ChartedPoint, DetourPolicy, EngineConfig, PathSpec, CLUSTER_TOL};
use crate::foliation::OdeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonodromyOrder {
    Finite(usize),
    NotFinite,
}

impl MonodromyOrder {
    pub fn finite(self) -> Option<usize> {
        match self {
            Self::Finite(k) => Some(k),
            Self::NotFinite => None,
        }
    }
}

/// Number of counterclockwise turns about `x1`, starting from `seed` on the
/// circle through it, after which the determination returns to the seed
/// (chordal distance below [`CLUSTER_TOL`]). `NotFinite` if that does not
/// happen within `max_windings` turns or the integration fails.
pub fn monodromy_order(model: &OdeModel<f64>, x1: Complex64, seed: ChartedPoint, max_windings: usize) -> MonodromyOrder {
    let policy = DetourPolicy::halt();
    match Context::new(model, EngineConfig::default(), &policy) {
        Ok(ctx) => order_on_circle(&ctx, x1, seed, max_windings),
        Err(_) => MonodromyOrder::NotFinite,
    }
}

pub(crate) fn order_on_circle(ctx: &Context, x1: Complex64, seed: ChartedPoint, max_windings: usize) -> MonodromyOrder {
    let circle = PathSpec::circle(seed.x, x1, 1.0);
    let len = circle.length();
    let mut current = seed;
    for k in 1..=max_windings {
        let mut run = Run::new(circle.clone(), current);
        if run.follow_to(ctx, len).is_err() {
            return MonodromyOrder::NotFinite;
        }
        current = run.point();
        current.x = seed.x;
        if current.sphere_distance(&seed) < CLUSTER_TOL {
            return MonodromyOrder::Finite(k);
        }
    }
    MonodromyOrder::NotFinite
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BiPoly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn power(alpha: f64) -> OdeModel<f64> {
        OdeModel::new(BiPoly::from_terms(&[(0, 1, c(alpha, 0.0))]), BiPoly::from_terms(&[(1, 0, c(1.0, 0.0))])).unwrap()
    }

    #[test]
    fn orders_of_power_models() {
        let seed = ChartedPoint::affine(c(1.0, 0.0), c(1.0, 0.0));
        assert_eq!(monodromy_order(&power(0.5), c(0.0, 0.0), seed, 12), MonodromyOrder::Finite(2));
        assert_eq!(monodromy_order(&power(2.0 / 3.0), c(0.0, 0.0), seed, 12), MonodromyOrder::Finite(3));
        assert_eq!(monodromy_order(&power(1.0 / 3.0), c(0.0, 0.0), seed, 2), MonodromyOrder::NotFinite);
    }

    #[test]
    fn logarithm_never_returns() {
        let log = OdeModel::new(BiPoly::from_terms(&[(0, 0, c(1.0, 0.0))]), BiPoly::from_terms(&[(1, 0, c(1.0, 0.0))])).unwrap();
        let seed = ChartedPoint::affine(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(monodromy_order(&log, c(0.0, 0.0), seed, 12), MonodromyOrder::NotFinite);
    }
}
