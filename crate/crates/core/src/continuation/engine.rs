use num_complex::Complex64;

use super::locate::{locate_with, Fields};
use super::monodromy::{order_on_circle, MonodromyOrder};
use super::path::{disk_crossings, splice_detour, Piece};
use super::{
    BranchAddress, Chart, ChartedPoint, ContinuationError, ContinuationResult, DetourMode, DetourPolicy, EngineConfig, EventKind, PathSpec,
    SingularityEvent, Status, TracePoint, Winding, BRANCH_CAP,
};
use crate::foliation::{sigma_e, Fiber, FixedSingularLocus, OdeModel, SING_TOL};
use crate::integrate::{dopri_step, step_factor, Stats, Tolerances};

/// Relative `|Q|` below which a located point counts as a tangency.
const LOCATE_RESIDUAL: f64 = 1e-7;
/// Distance (relative to the path length) at which on-path singularities are captured
/// outside enumerate mode.
const HIT_TOL: f64 = 1e-8;

/// Shared read-only context of a run.
pub(crate) struct Context<'a> {
    pub fields: Fields,
    pub locus: FixedSingularLocus<f64>,
    pub config: EngineConfig,
    pub policy: &'a DetourPolicy,
}

impl<'a> Context<'a> {
    pub fn new(model: &OdeModel<f64>, config: EngineConfig, policy: &'a DetourPolicy) -> Result<Self, ContinuationError> {
        Ok(Self { fields: Fields::new(model), locus: sigma_e(model)?, config, policy })
    }
}

/// A singularity the run stopped at, waiting for a winding decision.
#[derive(Debug, Clone)]
pub(crate) struct Pending {
    x1: Complex64,
    y1: Fiber<f64>,
    s_hit: f64,
    s_in: f64,
    s_out: f64,
    epsilon: f64,
    order: MonodromyOrder,
    local_order: usize,
}

enum Outcome {
    Finished,
    EndpointSingular { x1: Complex64, y1: Fiber<f64>, s_hit: f64, local_order: usize },
    Singular(Pending),
}

#[derive(Clone)]
pub(crate) struct Run {
    path: PathSpec,
    pieces: Vec<Piece>,
    len: f64,
    s: f64,
    point: ChartedPoint,
    h: f64,
    /// Arc length before which the path may no longer be rewound into.
    s_floor: f64,
    trace: Vec<TracePoint>,
    events: Vec<SingularityEvent>,
    windings: Vec<Winding>,
    dismissed: Vec<Complex64>,
    stats: Stats<f64>,
}

impl Run {
    pub fn new(path: PathSpec, start: ChartedPoint) -> Self {
        let pieces = path.pieces();
        let len = path.length();
        let mut run = Self {
            path,
            pieces,
            len,
            s: 0.0,
            point: start,
            h: len * 0.01,
            s_floor: 0.0,
            trace: Vec::new(),
            events: Vec::new(),
            windings: Vec::new(),
            dismissed: Vec::new(),
            stats: Stats::new(),
        };
        run.trace.push(TracePoint { t: 0.0, point: start, step: 0.0 });
        run
    }

    pub fn point(&self) -> ChartedPoint {
        self.point
    }

    fn set_path(&mut self, path: PathSpec) {
        self.pieces = path.pieces();
        self.len = path.length();
        self.path = path;
    }

    fn piece_at(&self, s: f64) -> (usize, f64) {
        let i = self.pieces.iter().rposition(|p| p.s0 <= s && p.len > 0.0).unwrap_or(0);
        let p = &self.pieces[i];
        (i, p.s0 + p.len)
    }

    /// One adaptive step towards `s_end` (at most to the next breakpoint).
    /// Returns `false` if the step was rejected.
    fn step(&mut self, ctx: &Context, s_end: f64, h_cap: f64) -> Result<bool, ContinuationError> {
        let (i, s_break) = self.piece_at(self.s);
        let piece = self.pieces[i];
        let target = s_end.min(s_break);
        let h_min = ctx.config.min_step * self.len.max(1e-300);
        let mut h = self.h.min(h_cap).max(h_min).min(target - self.s);
        let last = h >= target - self.s;
        if last {
            h = target - self.s;
        }
        let chart = self.point.chart;
        let field = ctx.fields.chart(chart);
        let mut rhs = |s: f64, v: Complex64| {
            let u = s - piece.s0;
            field.slope(piece.point(u), v) * piece.tangent(u)
        };
        let rtol = ctx.config.step_tol;
        let tol = Tolerances { rtol, atol: rtol * 1e-2 };
        let trial = dopri_step(&mut rhs, self.s, self.point.value, h, &tol);
        let accepted = trial.err <= 1.0;
        if accepted {
            self.s = if last { target } else { self.s + h };
            let x = piece.point(self.s - piece.s0);
            self.point = switch_chart(ChartedPoint { x, value: trial.y, chart }, ctx.config.r_switch);
            self.stats.accepted += 1;
            self.stats.min_step = self.stats.min_step.min(h);
            self.stats.max_err = self.stats.max_err.max(trial.err);
            self.trace.push(TracePoint { t: self.s, point: self.point, step: h });
        } else {
            self.stats.rejected += 1;
            if h <= h_min * 1.000_001 {
                return Err(ContinuationError::StepUnderflow { t: self.s / self.len });
            }
        }
        self.h = (h * step_factor(trial.err)).max(h_min);
        Ok(accepted)
    }

    /// Integrates to `s_end` without looking for singularities.
    pub fn follow_to(&mut self, ctx: &Context, s_end: f64) -> Result<(), ContinuationError> {
        let mut count = 0usize;
        while self.s < s_end {
            self.step(ctx, s_end, f64::INFINITY)?;
            count += 1;
            if count.is_multiple_of(256) {
                ctx.config.check_deadline()?;
            }
        }
        Ok(())
    }

    fn trigger_radius(&self, ctx: &Context) -> f64 {
        let base = 0.02 * self.len;
        match ctx.policy.mode {
            DetourMode::Enumerate => base.max(3.0 * ctx.policy.epsilon),
            _ => base,
        }
    }

    fn is_dismissed(&self, x1_est: Complex64, dist: f64) -> bool {
        self.dismissed.iter().any(|d| (d - x1_est).norm() <= 0.5 * dist + 1e-9)
    }

    /// Detour radius around `x1`.
    fn epsilon_for(&self, ctx: &Context, x1: Complex64) -> f64 {
        let mut eps = ctx.policy.epsilon.min(0.25 * ctx.locus.distance(x1));
        for e in &self.events {
            let d = (e.x1 - x1).norm();
            if d > 1e-9 {
                eps = eps.min(0.25 * d);
            }
        }
        eps.min(0.25 * (x1 - self.path.start).norm()).min(0.25 * (x1 - self.path.end()).norm())
    }

    /// Runs until the end of the path or a singularity that needs a decision.
    fn advance(&mut self, ctx: &Context) -> Result<Outcome, ContinuationError> {
        let mut count = 0usize;
        let mut forced = false;
        while self.s < self.len {
            count += 1;
            if count.is_multiple_of(64) {
                ctx.config.check_deadline()?;
            }
            let field = ctx.fields.chart(self.point.chart);
            let (d_est, x1_est) = field.tangency_estimate(self.point.x, self.point.value);
            if forced || (d_est < self.trigger_radius(ctx) && !self.is_dismissed(x1_est, d_est)) {
                if let Some(outcome) = self.examine(ctx, x1_est)? {
                    return Ok(outcome);
                }
            }
            let h_cap = if d_est.is_finite() { (0.5 * d_est).max(1e-300) } else { f64::INFINITY };
            forced = false;
            match self.step(ctx, self.len, h_cap) {
                Ok(_) => {}
                Err(ContinuationError::StepUnderflow { t }) => {
                    // one localization attempt before giving up
                    if self.is_dismissed(x1_est, 0.0) {
                        return Err(ContinuationError::StepUnderflow { t });
                    }
                    forced = true;
                    self.dismissed.push(x1_est);
                    self.h = 1e-6 * self.len;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Outcome::Finished)
    }

    /// Locates the tangency ahead and decides whether the path meets it.
    fn examine(&mut self, ctx: &Context, x1_est: Complex64) -> Result<Option<Outcome>, ContinuationError> {
        let located = locate_with(&ctx.fields, self.point);
        let Some(loc) = located.filter(|l| {
            let f = ctx.fields.chart(l.point.chart);
            l.residual <= LOCATE_RESIDUAL && f.p_residual(l.point.x, l.point.value) > SING_TOL
        }) else {
            self.dismissed.push(x1_est);
            return Ok(None);
        };
        let x1 = loc.point.x;
        if self.dismissed.iter().any(|d| (d - x1).norm() <= 1e-9 * x1.norm().max(1.0)) || ctx.locus.distance(x1) < 1e-9 {
            self.dismissed.push(x1_est);
            return Ok(None);
        }
        let reach = 2.0 * (self.trigger_radius(ctx) + ctx.policy.epsilon);
        let (s_hit, dist) = self.path.closest_in(x1, (self.s - reach).max(self.s_floor), (self.s + reach).min(self.len));
        let hit_tol = HIT_TOL * self.len.max(1.0);
        let mut eps = self.epsilon_for(ctx, x1);
        let capture = match ctx.policy.mode {
            DetourMode::Enumerate => eps.max(hit_tol),
            _ => hit_tol,
        };
        if dist > capture {
            self.dismissed.push(x1);
            self.dismissed.push(x1_est);
            return Ok(None);
        }
        let field = ctx.fields.chart(loc.point.chart);
        let local_order = field.tangency_order(x1, loc.point.value, 1e-6);
        let y1 = loc.point.y();
        if (x1 - self.path.end()).norm() <= hit_tol {
            return Ok(Some(Outcome::EndpointSingular { x1, y1, s_hit, local_order }));
        }
        let mut crossing = None;
        for _ in 0..8 {
            match disk_crossings(&self.path, s_hit, x1, eps, self.s_floor) {
                Ok(c) => {
                    crossing = Some(c);
                    break;
                }
                Err(ContinuationError::DiskNotSimple) => eps *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let (s_in, s_out) = crossing.ok_or(ContinuationError::DiskNotSimple)?;
        self.rewind_to(ctx, s_in)?;
        let order = order_on_circle(ctx, x1, self.point, ctx.policy.max_windings);
        self.dismissed.push(x1);
        Ok(Some(Outcome::Singular(Pending { x1, y1, s_hit, s_in, s_out, epsilon: eps, order, local_order })))
    }

    /// Restores the last trace point at or before `s` and integrates up to `s`.
    fn rewind_to(&mut self, ctx: &Context, s: f64) -> Result<(), ContinuationError> {
        while self.trace.len() > 1 && self.trace.last().is_some_and(|p| p.t > s) {
            self.trace.pop();
        }
        let last = *self.trace.last().unwrap();
        self.s = last.t;
        self.point = last.point;
        self.h = (s - self.s).max(1e-3 * self.len) * 0.5;
        self.follow_to(ctx, s)
    }

    fn event(&self, p: &Pending, kind: EventKind, epsilon: f64) -> SingularityEvent {
        SingularityEvent { t_hit: p.s_hit, x1: p.x1, y1: Some(p.y1), kind, epsilon, local_order: Some(p.local_order) }
    }

    /// Takes the detour with winding `w` and records the event.
    fn detour(&mut self, p: &Pending, w: i64) {
        let kind = match p.order {
            MonodromyOrder::Finite(k) if k >= 2 => EventKind::Algebroid { k },
            _ => EventKind::Unclassified,
        };
        self.events.push(self.event(p, kind, p.epsilon));
        self.windings.push(Winding { x1: p.x1, w, order: p.order.finite() });
        let old_len = self.len;
        let path = splice_detour(&self.path, p.s_in, p.s_out, p.x1, w);
        self.set_path(path);
        self.s_floor = p.s_in + (self.len - old_len) + (p.s_out - p.s_in);
        self.h = self.h.min(0.1 * p.epsilon);
    }

    fn finish(mut self, status: Status) -> ContinuationResult {
        let len = self.len;
        for p in &mut self.trace {
            p.t /= len;
        }
        for e in &mut self.events {
            e.t_hit /= len;
        }
        let endpoint = (status == Status::Completed).then_some(self.point);
        ContinuationResult {
            endpoint,
            address: BranchAddress { windings: self.windings },
            events: self.events,
            trace: self.trace,
            stats: self.stats,
            status,
            path: self.path,
        }
    }
}

/// Sends `|y| > 2R` to the infinity chart and `|Y| > 1/R` back.
fn switch_chart(p: ChartedPoint, r: f64) -> ChartedPoint {
    match p.chart {
        Chart::Affine if p.value.norm() > 2.0 * r => ChartedPoint { x: p.x, value: p.value.inv(), chart: Chart::Infinity },
        Chart::Infinity if p.value.norm() > 1.0 / r => ChartedPoint { x: p.x, value: p.value.inv(), chart: Chart::Affine },
        _ => p,
    }
}

fn validate(ctx: &Context, y0: Fiber<f64>, path: &PathSpec) -> Result<ChartedPoint, ContinuationError> {
    path.validate()?;
    if ctx.policy.epsilon.is_nan() || ctx.policy.epsilon <= 0.0 || ctx.policy.max_windings == 0 {
        return Err(ContinuationError::InvalidPath("detour policy needs epsilon > 0 and max_windings >= 1".into()));
    }
    for p in &ctx.locus.points {
        if path.distance_to(p.x) <= 2.0 * ctx.policy.epsilon {
            return Err(ContinuationError::PathTooCloseToSigmaE);
        }
    }
    let start = switch_chart(ChartedPoint::from_fiber(path.start, y0), ctx.config.r_switch);
    let f = ctx.fields.chart(start.chart);
    if f.q_residual(start.x, start.value) <= SING_TOL {
        return Err(ContinuationError::StartOnDiscriminant);
    }
    Ok(start)
}

/// Follows the solution through `(path.start, y0)` along `path`; see
/// [`continue_along_with`].
pub fn continue_along(
    model: &OdeModel<f64>,
    y0: Fiber<f64>,
    path: &PathSpec,
    policy: &DetourPolicy,
) -> Result<ContinuationResult, ContinuationError> {
    continue_along_with(model, y0, path, policy, EngineConfig::default())
}

/// Follows the solution through `(path.start, y0)` along `path`.
///
/// Movable singularities met on the way are located and handled according to
/// the policy: the run halts, takes the next scripted winding, or (in
/// enumerate mode) takes the counterclockwise bypass `w = 1`. Use
/// [`enumerate_branches`] to follow every winding class.
pub fn continue_along_with(
    model: &OdeModel<f64>,
    y0: Fiber<f64>,
    path: &PathSpec,
    policy: &DetourPolicy,
    config: EngineConfig,
) -> Result<ContinuationResult, ContinuationError> {
    let ctx = Context::new(model, config, policy)?;
    let start = validate(&ctx, y0, path)?;
    let mut run = Run::new(path.clone(), start);
    let mut script = policy.script.iter().copied();
    loop {
        match run.advance(&ctx)? {
            Outcome::Finished => return Ok(run.finish(Status::Completed)),
            Outcome::EndpointSingular { x1, y1, s_hit, local_order } => {
                run.events.push(endpoint_event(x1, y1, s_hit, local_order));
                return Ok(run.finish(Status::EndpointSingularity));
            }
            Outcome::Singular(p) => match policy.mode {
                DetourMode::HaltOnSingularity => {
                    let kind = match p.order {
                        MonodromyOrder::Finite(k) if k >= 2 => EventKind::Algebroid { k },
                        _ => EventKind::Unclassified,
                    };
                    run.events.push(run.event(&p, kind, 0.0));
                    return Ok(run.finish(Status::Halted));
                }
                DetourMode::Scripted => {
                    let w = script.next().ok_or(ContinuationError::ScriptExhausted)?;
                    run.detour(&p, w);
                }
                DetourMode::Enumerate => run.detour(&p, 1),
            },
        }
    }
}

fn endpoint_event(x1: Complex64, y1: Fiber<f64>, s_hit: f64, local_order: usize) -> SingularityEvent {
    SingularityEvent { t_hit: s_hit, x1, y1: Some(y1), kind: EventKind::EndpointSingularity, epsilon: 0.0, local_order: Some(local_order) }
}

/// Representatives of the winding classes at an event: `1, -1, 2, -2, ...`.
fn representatives(order: MonodromyOrder, max_windings: usize) -> Vec<i64> {
    let n = order.finite().unwrap_or(max_windings).max(1);
    (0..n as i64).map(|i| if i % 2 == 0 { i / 2 + 1 } else { -(i / 2 + 1) }).collect()
}

/// Every determination at the end of `path`, one per combination of winding
/// classes at the singularities met. The tree is capped at [`BRANCH_CAP`]
/// leaves; once the cap is reached further events only follow `w = 1`.
pub fn enumerate_branches(
    model: &OdeModel<f64>,
    y0: Fiber<f64>,
    path: &PathSpec,
    policy: &DetourPolicy,
) -> Result<Vec<ContinuationResult>, ContinuationError> {
    enumerate_branches_with(model, y0, path, policy, EngineConfig::default())
}

pub fn enumerate_branches_with(
    model: &OdeModel<f64>,
    y0: Fiber<f64>,
    path: &PathSpec,
    policy: &DetourPolicy,
    config: EngineConfig,
) -> Result<Vec<ContinuationResult>, ContinuationError> {
    let ctx = Context::new(model, config, policy)?;
    let start = validate(&ctx, y0, path)?;
    let mut stack = vec![Run::new(path.clone(), start)];
    let mut done = Vec::new();
    while let Some(mut run) = stack.pop() {
        match run.advance(&ctx)? {
            Outcome::Finished => done.push(run.finish(Status::Completed)),
            Outcome::EndpointSingular { x1, y1, s_hit, local_order } => {
                run.events.push(endpoint_event(x1, y1, s_hit, local_order));
                done.push(run.finish(Status::EndpointSingularity));
            }
            Outcome::Singular(p) => {
                let reps = representatives(p.order, policy.max_windings);
                let room = BRANCH_CAP.saturating_sub(done.len() + stack.len());
                let take = if room >= reps.len() { reps.len() } else { 1 };
                // pushed in reverse so that w = 1 is explored first
                for &w in reps[..take].iter().rev() {
                    let mut child = run.clone();
                    child.detour(&p, w);
                    stack.push(child);
                }
            }
        }
    }
    Ok(done)
}
