//! JSON file formats shared by the command line and the HTTP service.
//!
//! Complex numbers are `[re, im]` arrays. A point of the fiber is either such
//! an array or the string `"infinity"`.

use std::collections::BTreeMap;

use algebroid::algebra::BiPoly;
use algebroid::continuation::{BranchAddress, Chart, ChartedPoint, ContinuationResult, EventKind, PathSpec, Segment, Status, TracePoint};
use algebroid::foliation::{Fiber, OdeModel, Provenance};
use algebroid::holonomy::{AlgebroidFit, FitKind};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::api::ApiError;

pub type Cx = [f64; 2];

pub fn cx(z: Complex64) -> Cx {
    [z.re, z.im]
}

pub fn from_cx(v: Cx) -> Complex64 {
    Complex64::new(v[0], v[1])
}

pub type Tolerances = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    /// Coefficients of `P`, row = power of x, column = power of y.
    #[serde(rename = "P")]
    pub p: Vec<Vec<Cx>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<Cx>>,
    #[serde(default)]
    pub name: String,
}

pub fn matrix(b: &BiPoly<f64>) -> Vec<Vec<Cx>> {
    if b.is_zero() {
        return vec![vec![[0.0, 0.0]]];
    }
    b.rows().iter().map(|r| r.iter().map(|&z| cx(z)).collect()).collect()
}

fn bipoly(name: &str, m: &[Vec<Cx>]) -> Result<BiPoly<f64>, ApiError> {
    let width = m.first().map_or(0, Vec::len);
    if m.is_empty() || width == 0 || m.iter().any(|r| r.len() != width) {
        return Err(ApiError::malformed(format!("{name} must be a non-empty rectangular matrix")));
    }
    if m.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(ApiError::malformed(format!("{name} has a non-finite coefficient")));
    }
    Ok(BiPoly::new(m.iter().map(|r| r.iter().map(|&v| from_cx(v)).collect()).collect()))
}

impl ModelFile {
    pub fn from_model(name: &str, model: &OdeModel<f64>) -> Self {
        Self { p: matrix(model.p()), q: matrix(model.q()), name: name.to_string() }
    }

    /// Parses the matrices and admits the model.
    pub fn to_model(&self) -> Result<OdeModel<f64>, ApiError> {
        let p = bipoly("P", &self.p)?;
        let q = bipoly("Q", &self.q)?;
        OdeModel::new(p, q).map_err(|e| ApiError::admission(e.name(), e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberDto {
    Finite(Cx),
    Infinity,
}

impl From<Fiber<f64>> for FiberDto {
    fn from(f: Fiber<f64>) -> Self {
        match f {
            Fiber::Finite(y) => Self::Finite(cx(y)),
            Fiber::Infinity => Self::Infinity,
        }
    }
}

impl From<FiberDto> for Fiber<f64> {
    fn from(f: FiberDto) -> Self {
        match f {
            FiberDto::Finite(y) => Fiber::Finite(from_cx(y)),
            FiberDto::Infinity => Fiber::Infinity,
        }
    }
}

impl Serialize for FiberDto {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => v.serialize(s),
            Self::Infinity => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for FiberDto {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Finite(Cx),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Finite(v) => Ok(Self::Finite(v)),
            Raw::Tag(t) if t == "infinity" => Ok(Self::Infinity),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("expected [re, im] or \"infinity\", got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFile {
    pub start: Cx,
    pub segments: Vec<SegmentFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SegmentFile {
    Line { to: Cx },
    Arc { center: Cx, sweep: f64 },
}

impl PathFile {
    pub fn to_path(&self) -> PathSpec {
        let segments = self
            .segments
            .iter()
            .map(|s| match *s {
                SegmentFile::Line { to } => Segment::Line { to: from_cx(to) },
                SegmentFile::Arc { center, sweep } => Segment::Arc { center: from_cx(center), sweep },
            })
            .collect();
        PathSpec::new(from_cx(self.start), segments)
    }

    pub fn from_path(path: &PathSpec) -> Self {
        let segments = path
            .segments
            .iter()
            .map(|s| match *s {
                Segment::Line { to } => SegmentFile::Line { to: cx(to) },
                Segment::Arc { center, sweep } => SegmentFile::Arc { center: cx(center), sweep },
            })
            .collect();
        Self { start: cx(path.start), segments }
    }
}

fn chart_name(c: Chart) -> String {
    match c {
        Chart::Affine => "affine",
        Chart::Infinity => "infinity",
    }
    .to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFile {
    pub x: Cx,
    pub y: FiberDto,
    pub chart: String,
    /// Value in `chart`: `y`, or `1/y` in the infinity chart.
    pub value: Cx,
}

impl From<&ChartedPoint> for PointFile {
    fn from(p: &ChartedPoint) -> Self {
        Self { x: cx(p.x), y: p.y().into(), chart: chart_name(p.chart), value: cx(p.value) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingFile {
    pub x1: Cx,
    pub w: i64,
    pub order: Option<usize>,
}

fn address(a: &BranchAddress) -> Vec<WindingFile> {
    a.windings.iter().map(|w| WindingFile { x1: cx(w.x1), w: w.w, order: w.order }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFile {
    pub t_hit: f64,
    pub x1: Cx,
    pub y1: Option<FiberDto>,
    pub kind: String,
    pub k: Option<usize>,
    pub epsilon: f64,
    pub local_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsFile {
    pub accepted: usize,
    pub rejected: usize,
    /// Absent when no step was taken.
    pub min_step: Option<f64>,
    pub max_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: Cx,
    pub value: Cx,
    pub chart: String,
    pub step: f64,
}

impl From<&TracePoint> for TraceRow {
    fn from(p: &TracePoint) -> Self {
        Self { t: p.t, x: cx(p.point.x), value: cx(p.point.value), chart: chart_name(p.point.chart), step: p.step }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinueFile {
    pub kind: String,
    pub model: String,
    pub status: String,
    pub endpoint: Option<PointFile>,
    pub address: Vec<WindingFile>,
    pub events: Vec<EventFile>,
    pub stats: StatsFile,
    /// The path actually followed, detours included.
    pub path: PathFile,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
}

impl ContinueFile {
    pub fn new(model: &str, r: &ContinuationResult, tolerances: Tolerances, with_trace: bool) -> Self {
        let status = match r.status {
            Status::Completed => "completed",
            Status::Halted => "halted",
            Status::EndpointSingularity => "endpoint_singularity",
        };
        let events = r
            .events
            .iter()
            .map(|e| {
                let (kind, k) = match e.kind {
                    EventKind::Algebroid { k } => ("algebroid", Some(k)),
                    EventKind::EndpointSingularity => ("endpoint_singularity", None),
                    EventKind::Divergence => ("divergence", None),
                    EventKind::Unclassified => ("unclassified", None),
                };
                EventFile {
                    t_hit: e.t_hit,
                    x1: cx(e.x1),
                    y1: e.y1.map(Into::into),
                    kind: kind.to_string(),
                    k,
                    epsilon: e.epsilon,
                    local_order: e.local_order,
                }
            })
            .collect();
        let stats = StatsFile {
            accepted: r.stats.accepted,
            rejected: r.stats.rejected,
            min_step: r.stats.min_step.is_finite().then_some(r.stats.min_step),
            max_err: r.stats.max_err,
        };
        Self {
            kind: "continuation".into(),
            model: model.to_string(),
            status: status.into(),
            endpoint: r.endpoint.as_ref().map(Into::into),
            address: address(&r.address),
            events,
            stats,
            path: PathFile::from_path(&r.path),
            tolerances,
            trace: with_trace.then(|| r.trace.iter().map(Into::into).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaPointFile {
    pub x: Cx,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSetFile {
    /// `[x, y]` pairs.
    pub affine: Vec<[Cx; 2]>,
    /// Abscissas of singular points on `y = ∞`.
    pub at_infinity: Vec<Cx>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantFile {
    /// The affine part is the curve `Q(x, y) = 0`.
    #[serde(rename = "Q")]
    pub q: Vec<Vec<Cx>>,
    /// Numerator `Q̃(x, Y)` of the infinity chart `Y = 1/y`.
    #[serde(rename = "Q_infinity")]
    pub q_infinity: Vec<Vec<Cx>>,
    /// Order of vanishing of `Q̃` along `Y = 0`; positive when the line at
    /// infinity belongs to the discriminant.
    pub multiplicity_at_infinity: usize,
    /// Total tangency multiplicity of a generic vertical fiber.
    pub generic_tangency_multiplicity: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaFile {
    pub kind: String,
    pub model: String,
    pub sigma_e: Vec<SigmaPointFile>,
    pub singular_set: SingularSetFile,
    pub discriminant: DiscriminantFile,
    pub tolerances: Tolerances,
}

pub fn provenance_name(p: Provenance) -> String {
    match p {
        Provenance::SingularPoint => "singular_point",
        Provenance::VerticalLeaf => "vertical_leaf",
    }
    .to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub kind: String,
    pub degree: Option<usize>,
    pub q: Option<usize>,
    pub residual: f64,
    pub center: Cx,
    /// Coefficients of `(s - center)^(j/q)`, lowest first.
    pub coefficients: Vec<Cx>,
}

impl From<&AlgebroidFit> for FitFile {
    fn from(f: &AlgebroidFit) -> Self {
        let (kind, degree, q) = match f.kind {
            FitKind::Analytic { degree } => ("analytic", Some(degree), None),
            FitKind::Puiseux { q, degree } => ("puiseux", Some(degree), Some(q)),
            FitKind::NotFit => ("not_fit", None, None),
        };
        Self {
            kind: kind.into(),
            degree,
            q,
            residual: f.residual,
            center: cx(f.center),
            coefficients: f.coefficients.iter().map(|&z| cx(z)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    /// Seed in the disk chart.
    pub seed: Cx,
    pub endpoint: PointFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFile {
    pub address: Vec<WindingFile>,
    pub value_chart: String,
    pub values: Vec<SampleFile>,
    pub fit: FitFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFile {
    pub bound: u64,
    pub k: usize,
    pub length: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyFile {
    pub kind: String,
    pub model: String,
    pub x0: Cx,
    pub x1: Cx,
    pub y0_center: FiberDto,
    pub disk_chart: String,
    pub disk_radius: f64,
    pub grid: Vec<Cx>,
    pub branches: Vec<BranchFile>,
    pub epsilon_used: f64,
    pub endpoint_clusters: Vec<usize>,
    pub shrinks: usize,
    pub bound: Option<BoundFile>,
    pub tolerances: Tolerances,
}

impl HolonomyFile {
    pub fn new(model: &str, h: &algebroid::holonomy::HolonomyResult, bound: Option<BoundFile>, tolerances: Tolerances) -> Self {
        let branches = h
            .branches
            .iter()
            .map(|b| BranchFile {
                address: address(&b.address),
                value_chart: chart_name(b.value_chart),
                values: b.values.iter().map(|(s, p)| SampleFile { seed: cx(*s), endpoint: p.into() }).collect(),
                fit: (&b.fit).into(),
            })
            .collect();
        Self {
            kind: "holonomy".into(),
            model: model.to_string(),
            x0: cx(h.x0),
            x1: cx(h.x1),
            y0_center: h.y0_center.into(),
            disk_chart: chart_name(h.disk_chart),
            disk_radius: h.disk_radius,
            grid: h.grid.iter().map(|&z| cx(z)).collect(),
            branches,
            epsilon_used: h.epsilon_used,
            endpoint_clusters: h.endpoint_clusters.clone(),
            shrinks: h.shrinks,
            bound,
            tolerances,
        }
    }
}

/// Determination requested from an oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BranchFileSpec {
    Principal,
    Sheet {
        n: i64,
    },
    Sheets {
        n: [i64; 3],
    },
    Signed {
        n: i64,
        minus: bool,
    },
    Root {
        x0: Cx,
        y0: Cx,
        index: usize,
    },
    Lift {
        x0: Cx,
        y0: Cx,
        #[serde(default)]
        via: Vec<Cx>,
    },
}

impl BranchFileSpec {
    pub fn to_spec(&self) -> algebroid::oracles::BranchSpec {
        use algebroid::oracles::BranchSpec as B;
        match self {
            Self::Principal => B::Principal,
            Self::Sheet { n } => B::Sheet(*n),
            Self::Sheets { n } => B::Sheets(*n),
            Self::Signed { n, minus } => B::Signed { n: *n, minus: *minus },
            Self::Root { x0, y0, index } => B::Root { x0: from_cx(*x0), y0: from_cx(*y0), index: *index },
            Self::Lift { x0, y0, via } => B::Lift { x0: from_cx(*x0), y0: from_cx(*y0), via: via.iter().map(|&v| from_cx(v)).collect() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSingularityFile {
    pub x: Cx,
    /// Number of determinations, absent when the monodromy has infinite order.
    pub order: Option<usize>,
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFile {
    pub kind: String,
    pub id: String,
    pub model: ModelFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singularities: Option<Vec<OracleSingularityFile>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_encoding() {
        assert_eq!(serde_json::to_string(&FiberDto::Infinity).unwrap(), "\"infinity\"");
        assert_eq!(serde_json::to_string(&FiberDto::Finite([1.0, -0.5])).unwrap(), "[1.0,-0.5]");
        let f: FiberDto = serde_json::from_str("[2, 3]").unwrap();
        assert_eq!(f, FiberDto::Finite([2.0, 3.0]));
        assert!(serde_json::from_str::<FiberDto>("\"nowhere\"").is_err());
    }

    #[test]
    fn segments_are_tagged() {
        let p: PathFile =
            serde_json::from_str(r#"{"start":[1,0],"segments":[{"type":"line","to":[2,0]},{"type":"arc","center":[0,0],"sweep":3.5}]}"#)
                .unwrap();
        assert_eq!(p.segments[1], SegmentFile::Arc { center: [0.0, 0.0], sweep: 3.5 });
        assert_eq!(PathFile::from_path(&p.to_path()), p);
    }

    #[test]
    fn ragged_matrices_are_rejected() {
        let m = ModelFile { p: vec![vec![[1.0, 0.0]], vec![]], q: vec![vec![[1.0, 0.0]]], name: String::new() };
        assert_eq!(m.to_model().unwrap_err().name, "MalformedInput");
    }
}
