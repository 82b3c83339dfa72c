use std::f64::consts::TAU;

use num_complex::Complex64;

use super::ContinuationError;

/// One piece of a base path. Each segment starts where the previous one ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        to: Complex64,
    },
    /// Circular arc about `center`; positive `sweep` (radians) is counterclockwise.
    Arc {
        center: Complex64,
        sweep: f64,
    },
}

/// Piecewise base path in the x-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub start: Complex64,
    pub segments: Vec<Segment>,
}

/// A segment with its start point resolved and its arc-length offset.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece {
    pub a: Complex64,
    pub seg: Segment,
    pub s0: f64,
    pub len: f64,
}

impl Piece {
    fn arc_data(&self) -> (Complex64, f64, f64, f64) {
        let Segment::Arc { center, sweep } = self.seg else { unreachable!() };
        let r = (self.a - center).norm();
        (center, r, (self.a - center).arg(), sweep.signum())
    }

    /// Point at local arc length `u`.
    pub fn point(&self, u: f64) -> Complex64 {
        match self.seg {
            Segment::Line { to } => {
                if self.len == 0.0 {
                    self.a
                } else {
                    self.a + (to - self.a) * (u / self.len)
                }
            }
            Segment::Arc { .. } => {
                let (c, r, th, sg) = self.arc_data();
                c + Complex64::from_polar(r, th + sg * u / r)
            }
        }
    }

    /// Unit tangent `dx/ds` at local arc length `u`.
    pub fn tangent(&self, u: f64) -> Complex64 {
        match self.seg {
            Segment::Line { to } => (to - self.a) / self.len,
            Segment::Arc { .. } => {
                let (_, r, th, sg) = self.arc_data();
                Complex64::new(0.0, sg) * Complex64::from_polar(1.0, th + sg * u / r)
            }
        }
    }

    pub fn end(&self) -> Complex64 {
        match self.seg {
            Segment::Line { to } => to,
            Segment::Arc { .. } => self.point(self.len),
        }
    }

    /// The sub-piece between local arc lengths `u0 <= u1`, as a segment
    /// starting at `point(u0)`.
    fn sub(&self, u0: f64, u1: f64) -> Segment {
        match self.seg {
            Segment::Line { .. } => Segment::Line { to: self.point(u1) },
            Segment::Arc { center, sweep } => {
                let r = (self.a - center).norm();
                Segment::Arc { center, sweep: sweep.signum() * (u1 - u0) / r }
            }
        }
    }

    /// Closest point of the piece to `z`: `(local arc length, distance)`.
    fn closest(&self, z: Complex64) -> (f64, f64) {
        match self.seg {
            Segment::Line { to } => {
                if self.len == 0.0 {
                    return (0.0, (z - self.a).norm());
                }
                let d = (to - self.a) / self.len;
                let u = ((z - self.a) * d.conj()).re.clamp(0.0, self.len);
                (u, (self.point(u) - z).norm())
            }
            Segment::Arc { sweep, .. } => {
                let (c, r, th, sg) = self.arc_data();
                let mut best = (0.0, (self.a - z).norm());
                let end = (self.len, (self.end() - z).norm());
                if end.1 < best.1 {
                    best = end;
                }
                if (z - c).norm() > 0.0 {
                    let phi = (sg * ((z - c).arg() - th)).rem_euclid(TAU);
                    let span = sweep.abs();
                    if phi <= span {
                        let u = phi * r;
                        let d = ((z - c).norm() - r).abs();
                        if d < best.1 {
                            best = (u, d);
                        }
                    }
                }
                best
            }
        }
    }
}

impl PathSpec {
    pub fn new(start: Complex64, segments: Vec<Segment>) -> Self {
        Self { start, segments }
    }

    /// Straight line from `a` to `b`.
    pub fn line(a: Complex64, b: Complex64) -> Self {
        Self::new(a, vec![Segment::Line { to: b }])
    }

    /// Polyline through the given points.
    pub fn polyline(points: &[Complex64]) -> Self {
        Self::new(points[0], points[1..].iter().map(|&to| Segment::Line { to }).collect())
    }

    /// Loop starting at `start` about `center`, `turns` counterclockwise turns
    /// (negative for clockwise).
    pub fn circle(start: Complex64, center: Complex64, turns: f64) -> Self {
        Self::new(start, vec![Segment::Arc { center, sweep: TAU * turns }])
    }

    pub(crate) fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::with_capacity(self.segments.len());
        let (mut a, mut s0) = (self.start, 0.0);
        for &seg in &self.segments {
            let len = match seg {
                Segment::Line { to } => (to - a).norm(),
                Segment::Arc { center, sweep } => (a - center).norm() * sweep.abs(),
            };
            let p = Piece { a, seg, s0, len };
            a = p.end();
            s0 += len;
            out.push(p);
        }
        out
    }

    /// Checks finiteness, positive length and nondegenerate arcs.
    pub fn validate(&self) -> Result<(), ContinuationError> {
        let bad = |m: &str| Err(ContinuationError::InvalidPath(m.to_string()));
        if !self.start.is_finite() {
            return bad("start is not finite");
        }
        if self.segments.is_empty() {
            return bad("path has no segments");
        }
        for p in self.pieces() {
            match p.seg {
                Segment::Line { to } if !to.is_finite() => return bad("segment end is not finite"),
                Segment::Arc { center, sweep } => {
                    if !center.is_finite() || !sweep.is_finite() {
                        return bad("arc parameters are not finite");
                    }
                    if (p.a - center).norm() == 0.0 {
                        return bad("arc radius is zero");
                    }
                }
                _ => {}
            }
        }
        let len = self.length();
        if !(len > 0.0 && len.is_finite()) {
            return bad("path length must be positive and finite");
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.pieces().iter().map(|p| p.len).sum()
    }

    pub fn end(&self) -> Complex64 {
        self.pieces().last().map_or(self.start, Piece::end)
    }

    fn locate(&self, s: f64) -> (Piece, f64) {
        let pieces = self.pieces();
        let i = pieces.iter().rposition(|p| p.s0 <= s).unwrap_or(0);
        let p = pieces[i];
        (p, (s - p.s0).clamp(0.0, p.len))
    }

    /// Point at arc length `s`.
    pub fn point_at(&self, s: f64) -> Complex64 {
        let (p, u) = self.locate(s);
        p.point(u)
    }

    /// Point at the normalized parameter `t ∈ [0, 1]`.
    pub fn point_at_t(&self, t: f64) -> Complex64 {
        self.point_at(t * self.length())
    }

    /// The part of the path between arc lengths `s0 <= s1`.
    pub fn sub_path(&self, s0: f64, s1: f64) -> PathSpec {
        let mut segments = Vec::new();
        for p in self.pieces() {
            let (u0, u1) = ((s0 - p.s0).max(0.0), (s1 - p.s0).min(p.len));
            if u1 - u0 > 1e-14 * (1.0 + p.len) {
                segments.push(p.sub(u0, u1));
            }
        }
        PathSpec { start: self.point_at(s0), segments }
    }

    /// Closest point between arc lengths `s0` and `s1`: `(s, distance)`.
    pub fn closest_in(&self, z: Complex64, s0: f64, s1: f64) -> (f64, f64) {
        let mut best = (s0, (self.point_at(s0) - z).norm());
        for p in self.pieces() {
            if p.s0 + p.len < s0 || p.s0 > s1 {
                continue;
            }
            let (u, d) = p.closest(z);
            let s = p.s0 + u;
            if d < best.1 && s >= s0 && s <= s1 {
                best = (s, d);
            }
        }
        let end = (s1, (self.point_at(s1) - z).norm());
        if end.1 < best.1 {
            best = end;
        }
        best
    }

    /// Distance from `z` to the whole path.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.closest_in(z, 0.0, self.length()).1
    }

    /// Same geometry with line segment `index` split at its midpoint.
    pub fn split_line(&self, index: usize, fraction: f64) -> PathSpec {
        let pieces = self.pieces();
        let mut segments = self.segments.clone();
        if let Segment::Line { to } = segments[index] {
            let mid = pieces[index].point(fraction * pieces[index].len);
            segments.splice(index..=index, [Segment::Line { to: mid }, Segment::Line { to }]);
        }
        PathSpec { start: self.start, segments }
    }

    /// Concatenation of two paths that meet.
    pub fn then(mut self, other: &PathSpec) -> PathSpec {
        self.segments.extend_from_slice(&other.segments);
        self
    }
}

/// `j(w)`: extra full turns on top of the half-turn bypass. `w = 1` is the
/// counterclockwise bypass, `w = -1` the clockwise one; `|w| > 1` adds turns.
pub fn extra_turns(w: i64) -> i64 {
    if w >= 1 {
        w - 1
    } else {
        w
    }
}

/// Boundary crossings of the disk `|x - x1| < eps` around `s_hit`:
/// `(s_in, s_out)`, with `DiskNotSimple` if the path meets the disk elsewhere.
pub(crate) fn disk_crossings(path: &PathSpec, s_hit: f64, x1: Complex64, eps: f64, s_floor: f64) -> Result<(f64, f64), ContinuationError> {
    let len = path.length();
    let dist = |s: f64| (path.point_at(s) - x1).norm();
    let h = eps / 16.0;
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..80 {
            let m = 0.5 * (inside + outside);
            if dist(m) < eps {
                inside = m;
            } else {
                outside = m;
            }
        }
        outside
    };
    let mut s = s_hit;
    while dist(s) < eps {
        if s <= s_floor {
            return Err(ContinuationError::DiskNotSimple);
        }
        s = (s - h).max(s_floor);
    }
    let s_in = if s == s_hit { s_hit } else { bisect((s + h).min(s_hit), s) };
    let mut s = s_hit;
    while dist(s) < eps {
        if s >= len {
            return Err(ContinuationError::DiskNotSimple);
        }
        s = (s + h).min(len);
    }
    let s_out = if s == s_hit { s_hit } else { bisect((s - h).max(s_hit), s) };
    if s_out <= s_in {
        return Err(ContinuationError::DiskNotSimple);
    }
    let margin = eps * (1.0 - 1e-9);
    let before = if s_in > 0.0 { path.closest_in(x1, 0.0, s_in).1 } else { f64::INFINITY };
    let after = if s_out < len { path.closest_in(x1, s_out, len).1 } else { f64::INFINITY };
    if before < margin || after < margin {
        return Err(ContinuationError::DiskNotSimple);
    }
    Ok((s_in, s_out))
}

/// Replaces the part of `path` between arc lengths `s_in` and `s_out` (both on
/// the circle `|x - x1| = eps`) by an arc about `x1` with winding `w`.
/// `w = 0` leaves the path unchanged.
pub(crate) fn splice_detour(path: &PathSpec, s_in: f64, s_out: f64, x1: Complex64, w: i64) -> PathSpec {
    if w == 0 {
        return path.clone();
    }
    let (entry, exit) = (path.point_at(s_in), path.point_at(s_out));
    let mut delta = ((exit - x1) / (entry - x1)).arg().rem_euclid(TAU);
    if delta == 0.0 {
        delta = TAU;
    }
    let sweep = delta + TAU * extra_turns(w) as f64;
    let mut out = path.sub_path(0.0, s_in);
    out.segments.push(Segment::Arc { center: x1, sweep });
    let len = path.length();
    if s_out < len {
        out.segments.extend(path.sub_path(s_out, len).segments);
    }
    out
}

/// Detour of radius `eps` around `x1` at the normalized parameter `t_hit`,
/// with winding `w` (see [`extra_turns`]).
pub fn apply_detour(path: &PathSpec, t_hit: f64, x1: Complex64, eps: f64, w: i64) -> Result<PathSpec, ContinuationError> {
    let s_hit = t_hit * path.length();
    let (s_in, s_out) = disk_crossings(path, s_hit, x1, eps, 0.0)?;
    Ok(splice_detour(path, s_in, s_out, x1, w))
}
