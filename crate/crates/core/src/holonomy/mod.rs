//! Holonomy maps: a disk of initial values carried along a path, split into
//! branches by detour address and fitted by algebroid germs.

mod fit;

pub use fit::{fit_about, fit_analytic, AlgebroidFit, FitKind, D_MAX, FIT_TOL, MIN_SAMPLES, Q_MAX};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::continuation::{
    enumerate_branches_with, BranchAddress, Chart, ChartedPoint, ContinuationError, ContinuationResult, DetourMode, DetourPolicy,
    EngineConfig, PathSpec, BRANCH_CAP, CLUSTER_TOL, R_SWITCH,
};
use crate::foliation::{sigma_e, total_tangency_multiplicity, Fiber, FoliationError, OdeModel};

/// Number of times the disk radius may be halved.
pub const MAX_SHRINKS: usize = 6;
/// Minimum number of seeds per ring.
pub const MIN_GRID: usize = 8;
const RINGS: usize = 3;
/// Endpoints with `|y|` above this are fitted in the chart `Y = 1/y`.
const AFFINE_FIT_LIMIT: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HolonomyError {
    #[error("grid of {0} seeds per ring is below the minimum of 8")]
    InvalidGrid(usize),
    #[error("no stable disk radius down to {radius}: {reason}")]
    DiskShrinkExhausted { radius: f64, reason: String },
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
}

impl HolonomyError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::InvalidGrid(_) => "InvalidGrid",
            Self::DiskShrinkExhausted { .. } => "DiskShrinkExhausted",
            Self::Continuation(e) => e.name(),
        }
    }
}

/// One branch of the holonomy map.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSample {
    pub address: BranchAddress,
    /// `(seed, endpoint)` pairs; the seed is in the disk chart.
    pub values: Vec<(Complex64, ChartedPoint)>,
    /// Chart of the endpoint values used by the fit.
    pub value_chart: Chart,
    pub fit: AlgebroidFit,
}

impl BranchSample {
    /// Endpoint value in [`Self::value_chart`].
    pub fn value_in_chart(&self, p: &ChartedPoint) -> Complex64 {
        chart_value(p, self.value_chart)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyResult {
    pub x0: Complex64,
    pub x1: Complex64,
    pub y0_center: Fiber<f64>,
    /// Chart in which the disk of seeds is round.
    pub disk_chart: Chart,
    /// Radius actually used, after any shrinking.
    pub disk_radius: f64,
    /// Seeds in the disk chart; the first is the center.
    pub grid: Vec<Complex64>,
    pub branches: Vec<BranchSample>,
    /// Smallest detour radius taken, or the policy cap when there was none.
    pub epsilon_used: f64,
    /// Distinct endpoint values per seed, clustered on the sphere; a cross-check
    /// of the address grouping.
    pub endpoint_clusters: Vec<usize>,
    pub shrinks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolonomyConfig {
    pub grid_n: usize,
    pub q_max: usize,
    pub engine: EngineConfig,
}

impl HolonomyConfig {
    pub fn new(grid_n: usize) -> Self {
        Self { grid_n, q_max: Q_MAX, engine: EngineConfig::default() }
    }
}

fn chart_value(p: &ChartedPoint, chart: Chart) -> Complex64 {
    match chart {
        Chart::Affine => p.y_value(),
        Chart::Infinity if p.chart == Chart::Infinity => p.value,
        Chart::Infinity => p.value.inv(),
    }
}

/// Seeds on `RINGS` concentric circles of `grid_n` points each, plus the
/// center; consecutive rings are rotated against each other.
fn seeds(center: Complex64, radius: f64, grid_n: usize) -> Vec<Complex64> {
    let mut out = vec![center];
    for ring in 1..=RINGS {
        let r = radius * ring as f64 / RINGS as f64;
        for i in 0..grid_n {
            let angle = std::f64::consts::TAU * (i as f64 + 0.25 * ring as f64) / grid_n as f64;
            out.push(center + Complex64::from_polar(r, angle));
        }
    }
    out
}

fn seed_fiber(s: Complex64, chart: Chart) -> Fiber<f64> {
    match chart {
        Chart::Affine => Fiber::Finite(s),
        Chart::Infinity if s.norm() == 0.0 => Fiber::Infinity,
        Chart::Infinity => Fiber::Finite(s.inv()),
    }
}

/// Holonomy of `path` on a disk about `y0_center` with [`HolonomyConfig::new`].
pub fn holonomy_map(
    model: &OdeModel<f64>,
    y0_center: Fiber<f64>,
    disk_radius: f64,
    path: &PathSpec,
    policy: &DetourPolicy,
    grid_n: usize,
) -> Result<HolonomyResult, HolonomyError> {
    holonomy_map_with(model, y0_center, disk_radius, path, policy, HolonomyConfig::new(grid_n))
}

/// Carries every seed of the disk along `path` in enumerate mode and groups
/// the endpoints by branch address.
///
/// A center with `|y| > R_SWITCH` (or at infinity) puts the disk in the chart
/// `Y = 1/y`, with the radius measured there. The structure is stable when
/// every seed succeeds, all seeds see the same set of addresses, and every
/// branch admits an algebroid fit; otherwise the radius is halved, at most
/// [`MAX_SHRINKS`] times.
pub fn holonomy_map_with(
    model: &OdeModel<f64>,
    y0_center: Fiber<f64>,
    disk_radius: f64,
    path: &PathSpec,
    policy: &DetourPolicy,
    config: HolonomyConfig,
) -> Result<HolonomyResult, HolonomyError> {
    if config.grid_n < MIN_GRID {
        return Err(HolonomyError::InvalidGrid(config.grid_n));
    }
    path.validate()?;
    let policy = DetourPolicy { mode: DetourMode::Enumerate, ..policy.clone() };
    let (disk_chart, center) = match y0_center {
        Fiber::Infinity => (Chart::Infinity, Complex64::new(0.0, 0.0)),
        Fiber::Finite(y) if y.norm() > R_SWITCH => (Chart::Infinity, y.inv()),
        Fiber::Finite(y) => (Chart::Affine, y),
    };
    let mut radius = disk_radius;
    let mut reason = String::new();
    for shrinks in 0..=MAX_SHRINKS {
        let grid = seeds(center, radius, config.grid_n);
        match attempt(model, &grid, disk_chart, path, &policy, &config)? {
            Ok((branches, epsilon_used, endpoint_clusters)) => {
                return Ok(HolonomyResult {
                    x0: path.start,
                    x1: path.end(),
                    y0_center,
                    disk_chart,
                    disk_radius: radius,
                    grid,
                    branches,
                    epsilon_used,
                    endpoint_clusters,
                    shrinks,
                })
            }
            Err(why) => reason = why,
        }
        if shrinks < MAX_SHRINKS {
            radius *= 0.5;
        }
    }
    Err(HolonomyError::DiskShrinkExhausted { radius, reason })
}

type Attempt = Result<(Vec<BranchSample>, f64, Vec<usize>), String>;

/// Seeds paired with the endpoints they reach.
type Samples = Vec<(Complex64, ChartedPoint)>;

/// One pass over the grid. The outer error is fatal; the inner one names the
/// instability that calls for a smaller disk.
fn attempt(
    model: &OdeModel<f64>,
    grid: &[Complex64],
    chart: Chart,
    path: &PathSpec,
    policy: &DetourPolicy,
    config: &HolonomyConfig,
) -> Result<Attempt, HolonomyError> {
    let runs: Vec<Result<Vec<ContinuationResult>, ContinuationError>> =
        grid.par_iter().map(|&s| enumerate_branches_with(model, seed_fiber(s, chart), path, policy, config.engine)).collect();
    let mut per_seed = Vec::with_capacity(runs.len());
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Ok(leaves) => per_seed.push(leaves),
            Err(
                e @ (ContinuationError::InvalidPath(_)
                | ContinuationError::PathTooCloseToSigmaE
                | ContinuationError::Budget
                | ContinuationError::Foliation(_)),
            ) => return Err(e.into()),
            Err(e) => return Ok(Err(format!("seed {i} failed with {}", e.name()))),
        }
    }

    let mut groups: BTreeMap<Vec<i64>, (BranchAddress, Samples)> = BTreeMap::new();
    let mut epsilon_used = f64::INFINITY;
    let mut clusters = Vec::with_capacity(grid.len());
    let mut reference: Option<Vec<Vec<i64>>> = None;
    for (i, leaves) in per_seed.iter().enumerate() {
        let mut keys = Vec::new();
        let mut ends: Vec<ChartedPoint> = Vec::new();
        for leaf in leaves {
            let Some(end) = leaf.endpoint else {
                return Ok(Err(format!("seed {i} reached a singular endpoint")));
            };
            for e in &leaf.events {
                if e.epsilon > 0.0 {
                    epsilon_used = epsilon_used.min(e.epsilon);
                }
            }
            let key = leaf.address.key();
            keys.push(key.clone());
            if !ends.iter().any(|p| p.sphere_distance(&end) < CLUSTER_TOL) {
                ends.push(end);
            }
            groups.entry(key).or_insert_with(|| (leaf.address.clone(), Vec::new())).1.push((grid[i], end));
        }
        keys.sort();
        keys.dedup();
        match &reference {
            None => reference = Some(keys),
            Some(r) if *r != keys => {
                return Ok(Err(format!("seed {i} sees {} addresses, seed 0 sees {}", keys.len(), r.len())));
            }
            Some(_) => {}
        }
        clusters.push(ends.len());
    }
    if groups.len() > BRANCH_CAP {
        return Ok(Err(format!("{} branches exceed the cap", groups.len())));
    }

    let center = grid[0];
    let mut branches = Vec::with_capacity(groups.len());
    for (_, (address, values)) in groups {
        let affine_ok = values.iter().all(|(_, p)| {
            let y = p.y_value();
            y.re.is_finite() && y.im.is_finite() && y.norm() <= AFFINE_FIT_LIMIT
        });
        let value_chart = if affine_ok { Chart::Affine } else { Chart::Infinity };
        let samples: Vec<_> = values.iter().map(|(s, p)| (*s, chart_value(p, value_chart))).collect();
        let fit = fit_about(&samples, center, config.q_max);
        if !fit.is_fit() {
            return Ok(Err(format!("branch {:?} has no algebroid fit (residual {:e})", address.key(), fit.residual)));
        }
        branches.push(BranchSample { address, values, value_chart, fit });
    }
    if !epsilon_used.is_finite() {
        epsilon_used = policy.epsilon;
    }
    Ok(Ok((branches, epsilon_used, clusters)))
}

/// The branch-count bound `⌈(k+1)^(L/ε)⌉` with the quantities it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchBound {
    /// Saturates at `u64::MAX`.
    pub bound: u64,
    pub k: usize,
    pub length: f64,
    pub epsilon: f64,
}

/// `⌈(k+1)^(length/epsilon)⌉`, saturating.
pub fn bound_from(k: usize, length: f64, epsilon: f64) -> u64 {
    if k == 0 {
        return 1;
    }
    let log = (length / epsilon) * ((k + 1) as f64).ln();
    if !log.is_finite() || log >= u64::MAX as f64 {
        return u64::MAX;
    }
    let v = ((k + 1) as f64).powf(length / epsilon).ceil();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

/// Abscissas, away from any structure, at which the tangency multiplicity is sampled.
pub const GENERIC_ABSCISSAS: [(f64, f64); 3] = [(0.573_219, 0.321_487), (-0.702_113, 1.409_331), (1.618_034, -0.618_034)];

/// Bound on the number of determinations along `path`. The tangency
/// multiplicity `k` is taken at generic abscissas; `ε` is the radius of the
/// singularity-free disks of the covering, `min(cap, dist(γ, Σ_E) / 2)`.
pub fn branch_count_bound(model: &OdeModel<f64>, path: &PathSpec, cap: f64) -> Result<BranchBound, FoliationError> {
    let locus = sigma_e(model)?;
    let k = GENERIC_ABSCISSAS
        .iter()
        .filter_map(|&(re, im)| total_tangency_multiplicity(model, Complex64::new(re, im)).ok())
        .max()
        .ok_or(FoliationError::OnSigmaE)?;
    let dist = locus.points.iter().map(|p| path.distance_to(p.x)).fold(f64::INFINITY, f64::min);
    let epsilon = cap.min(dist / 2.0);
    let length = path.length();
    Ok(BranchBound { bound: bound_from(k, length, epsilon), k, length, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic() {
        assert_eq!(bound_from(1, 1.0, 0.25), 16);
        assert_eq!(bound_from(0, 100.0, 1e-6), 1);
        assert_eq!(bound_from(2, 1.0, 1e-6), u64::MAX);
        assert_eq!(bound_from(2, 1.0, 0.5), 9);
    }

    #[test]
    fn seed_layout() {
        let g = seeds(Complex64::new(1.0, 0.0), 0.3, 8);
        assert_eq!(g.len(), 25);
        assert!(g.iter().all(|s| (s - 1.0).norm() <= 0.3 + 1e-15));
        assert!((g.iter().sum::<Complex64>() / 25.0 - 1.0).norm() < 1e-14);
    }

    #[test]
    fn seeds_at_infinity() {
        assert_eq!(seed_fiber(Complex64::new(0.0, 0.0), Chart::Infinity), Fiber::Infinity);
        assert_eq!(seed_fiber(Complex64::new(0.5, 0.0), Chart::Infinity), Fiber::Finite(Complex64::new(2.0, 0.0)));
    }
}
