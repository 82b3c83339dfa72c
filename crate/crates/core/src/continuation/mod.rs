//! Continuation of solutions along base paths, with detours around movable
//! singularities and local monodromy measurement.

mod engine;
mod locate;
mod monodromy;
mod path;

pub use engine::{continue_along, continue_along_with, enumerate_branches, enumerate_branches_with};
pub use locate::{locate_singularity, Located};
pub use monodromy::{monodromy_order, MonodromyOrder};
pub use path::{apply_detour, extra_turns, PathSpec, Segment};

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use thiserror::Error;

use crate::foliation::{Fiber, FoliationError};
use crate::integrate::Stats;
use crate::scalar::chordal;

/// Values with `|y|` above `2 R` move to the chart `Y = 1/y`, and back below `R`.
pub const R_SWITCH: f64 = 10.0;
/// Chordal radius within which a loop is considered to return to its seed.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Upper bound on the number of leaves produced by branch enumeration.
pub const BRANCH_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContinuationError {
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("path passes too close to the fixed singular locus")]
    PathTooCloseToSigmaE,
    #[error("initial point lies on the discriminant")]
    StartOnDiscriminant,
    #[error("step size underflow at t = {t} without a located singularity")]
    StepUnderflow { t: f64 },
    #[error("winding script exhausted")]
    ScriptExhausted,
    #[error("detour disk meets the path more than once")]
    DiskNotSimple,
    #[error("wall-clock budget exceeded")]
    Budget,
    #[error(transparent)]
    Foliation(#[from] FoliationError),
}

impl ContinuationError {
    /// Machine-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::InvalidPath(_) => "InvalidPath",
            Self::PathTooCloseToSigmaE => "PathTooCloseToSigmaE",
            Self::StartOnDiscriminant => "StartOnDiscriminant",
            Self::StepUnderflow { .. } => "StepUnderflow",
            Self::ScriptExhausted => "ScriptExhausted",
            Self::DiskNotSimple => "DiskNotSimple",
            Self::Budget => "Budget",
            Self::Foliation(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    /// The value is `y`.
    Affine,
    /// The value is `Y = 1/y`.
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartedPoint {
    pub x: Complex64,
    pub value: Complex64,
    pub chart: Chart,
}

impl ChartedPoint {
    pub fn affine(x: Complex64, y: Complex64) -> Self {
        Self { x, value: y, chart: Chart::Affine }
    }

    /// Starting point for a fiber value, in the chart the engine would use.
    pub fn from_fiber(x: Complex64, y: Fiber<f64>) -> Self {
        match y {
            Fiber::Infinity => Self { x, value: Complex64::new(0.0, 0.0), chart: Chart::Infinity },
            Fiber::Finite(y) if y.norm() > 2.0 * R_SWITCH => Self { x, value: y.inv(), chart: Chart::Infinity },
            Fiber::Finite(y) => Self::affine(x, y),
        }
    }

    /// The fiber value `y`, `Infinity` for `Y = 0`.
    pub fn y(&self) -> Fiber<f64> {
        match self.chart {
            Chart::Affine => Fiber::Finite(self.value),
            Chart::Infinity if self.value.norm() == 0.0 => Fiber::Infinity,
            Chart::Infinity => Fiber::Finite(self.value.inv()),
        }
    }

    /// `y` as a complex number (non-finite at `y = ∞`).
    pub fn y_value(&self) -> Complex64 {
        match self.chart {
            Chart::Affine => self.value,
            Chart::Infinity => self.value.inv(),
        }
    }

    /// Chordal distance between the fiber values on the Riemann sphere.
    pub fn sphere_distance(&self, other: &ChartedPoint) -> f64 {
        if self.chart == other.chart {
            chordal(self.value, other.value)
        } else {
            // y -> 1/y is an isometry of the chordal metric
            chordal(self.value, other.value.inv())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Algebroid { k: usize },
    EndpointSingularity,
    Divergence,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityEvent {
    /// Path parameter of the closest approach, in `(0, 1]`.
    pub t_hit: f64,
    pub x1: Complex64,
    /// Limit value at `x1`.
    pub y1: Option<Fiber<f64>>,
    pub kind: EventKind,
    /// Detour radius used (zero if no detour was taken).
    pub epsilon: f64,
    /// Order predicted from the root multiplicity of `Q(x1, ·)` plus one.
    pub local_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub x1: Complex64,
    pub w: i64,
    /// Monodromy order measured at the event, when finite.
    pub order: Option<usize>,
}

impl Winding {
    /// Class of the detour: two windings give the same determination when
    /// their extra turns agree modulo the order.
    pub fn class(&self) -> i64 {
        if self.w == 0 {
            return i64::MIN;
        }
        let j = extra_turns(self.w);
        match self.order {
            Some(k) => j.rem_euclid(k as i64),
            None => j,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BranchAddress {
    pub windings: Vec<Winding>,
}

impl BranchAddress {
    /// Key identifying the branch up to the per-event mod-k identification.
    pub fn key(&self) -> Vec<i64> {
        self.windings.iter().map(Winding::class).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub point: ChartedPoint,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Completed,
    Halted,
    EndpointSingularity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    /// Determination at the end of the path; absent when the run halted or the
    /// endpoint is itself singular.
    pub endpoint: Option<ChartedPoint>,
    pub address: BranchAddress,
    pub events: Vec<SingularityEvent>,
    pub trace: Vec<TracePoint>,
    pub stats: Stats<f64>,
    pub status: Status,
    /// The path actually followed, detours included.
    pub path: PathSpec,
}

impl ContinuationResult {
    /// Trace as CSV with columns `t, re_x, im_x, re_y, im_y, chart, step_size`;
    /// the y columns hold the chart value.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t,re_x,im_x,re_y,im_y,chart,step_size\n");
        for p in &self.trace {
            let chart = match p.point.chart {
                Chart::Affine => "affine",
                Chart::Infinity => "infinity",
            };
            let (x, v) = (p.point.x, p.point.value);
            let _ = writeln!(out, "{},{},{},{},{},{},{}", p.t, x.re, x.im, v.re, v.im, chart, p.step);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetourMode {
    HaltOnSingularity,
    Scripted,
    Enumerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetourPolicy {
    /// Upper bound for the detour radius.
    pub epsilon: f64,
    pub mode: DetourMode,
    /// Windings consumed in encounter order (scripted mode).
    pub script: Vec<i64>,
    pub max_windings: usize,
}

impl DetourPolicy {
    pub fn halt() -> Self {
        Self { epsilon: 0.05, mode: DetourMode::HaltOnSingularity, script: Vec::new(), max_windings: 12 }
    }

    pub fn scripted(script: Vec<i64>) -> Self {
        Self { mode: DetourMode::Scripted, script, ..Self::halt() }
    }

    pub fn enumerate() -> Self {
        Self { mode: DetourMode::Enumerate, ..Self::halt() }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Numerical knobs of the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub step_tol: f64,
    pub r_switch: f64,
    /// Minimum step relative to the path length.
    pub min_step: f64,
    pub deadline: Option<Instant>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { step_tol: crate::integrate::STEP_TOL, r_switch: R_SWITCH, min_step: 1e-13, deadline: None }
    }
}

impl EngineConfig {
    pub(crate) fn check_deadline(&self) -> Result<(), ContinuationError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(ContinuationError::Budget),
            _ => Ok(()),
        }
    }
}
