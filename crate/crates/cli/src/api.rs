//! Requests and their evaluation, shared by the command line and the HTTP
//! service so both produce the same bytes.

use std::time::Instant;

use algebroid::algebra::{COPRIME_TOL, ROOT_CLUSTER_TOL};
use algebroid::continuation::{continue_along_with, ContinuationError, DetourMode, DetourPolicy, EngineConfig, BRANCH_CAP, CLUSTER_TOL};
use algebroid::foliation::{sigma_e, singular_points, total_tangency_multiplicity, FoliationError, SING_TOL};
use algebroid::holonomy::{
    branch_count_bound, holonomy_map_with, HolonomyConfig, HolonomyError, D_MAX, FIT_TOL, GENERIC_ABSCISSAS, MAX_SHRINKS, Q_MAX,
};
use algebroid::oracles::{OracleError, OracleModel, Region};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dto::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The request could not be read.
    Malformed,
    /// The model or path was refused before any computation.
    Admission,
    /// The engine stopped on a guarded precondition or a numerical failure.
    Engine,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{name}: {message}")]
pub struct ApiError {
    pub class: ErrorClass,
    pub name: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn malformed(message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Malformed, name: "MalformedInput", message: message.into() }
    }

    pub fn admission(name: &'static str, message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Admission, name, message: message.into() }
    }

    pub fn engine(name: &'static str, message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Engine, name, message: message.into() }
    }

    /// `{"error": name}`, with the reason added for refused requests.
    pub fn body(&self) -> String {
        match self.class {
            ErrorClass::Engine => render(&serde_json::json!({ "error": self.name })),
            _ => render(&serde_json::json!({ "error": self.name, "reason": self.message })),
        }
    }

    /// Process exit code of the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self.class {
            ErrorClass::Engine => 1,
            _ => 2,
        }
    }
}

impl From<ContinuationError> for ApiError {
    fn from(e: ContinuationError) -> Self {
        match e {
            ContinuationError::InvalidPath(_) => Self::admission(e.name(), e.to_string()),
            _ => Self::engine(e.name(), e.to_string()),
        }
    }
}

impl From<HolonomyError> for ApiError {
    fn from(e: HolonomyError) -> Self {
        match e {
            HolonomyError::Continuation(c) => c.into(),
            HolonomyError::InvalidGrid(_) => Self::admission(e.name(), e.to_string()),
            HolonomyError::DiskShrinkExhausted { .. } => Self::engine(e.name(), e.to_string()),
        }
    }
}

impl From<FoliationError> for ApiError {
    fn from(e: FoliationError) -> Self {
        Self::engine(e.name(), e.to_string())
    }
}

impl From<OracleError> for ApiError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::UnknownOracle(_) | OracleError::InvalidBranch(_) => Self::admission(e.name(), e.to_string()),
            _ => Self::engine(e.name(), e.to_string()),
        }
    }
}

/// Pretty JSON followed by a newline.
pub fn render<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("result types serialize");
    s.push('\n');
    s
}

pub fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, ApiError> {
    serde_json::from_str(text).map_err(|e| ApiError::malformed(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    #[default]
    Halt,
    Scripted,
    Enumerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinueRequest {
    pub model: ModelFile,
    pub path: PathFile,
    pub y0: FiberDto,
    #[serde(default)]
    pub policy: PolicyName,
    #[serde(default)]
    pub script: Vec<i64>,
    /// Upper bound for detour radii.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub max_windings: Option<usize>,
    /// Include the trace in the result.
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyRequest {
    pub model: ModelFile,
    pub path: PathFile,
    pub y0_center: FiberDto,
    pub radius: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub max_windings: Option<usize>,
}

fn default_grid() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub id: String,
    #[serde(default)]
    pub x: Option<Cx>,
    #[serde(default)]
    pub branch: Option<BranchFileSpec>,
    /// Opposite corners of the rectangle searched for singularities.
    #[serde(default)]
    pub region: Option<[Cx; 2]>,
    /// A point `[x0, y0]` selecting the leaf for movable singularities.
    #[serde(default)]
    pub leaf: Option<[Cx; 2]>,
}

fn policy(name: PolicyName, script: &[i64], epsilon: Option<f64>, max_windings: Option<usize>) -> Result<DetourPolicy, ApiError> {
    let mut p = match name {
        PolicyName::Halt => DetourPolicy::halt(),
        PolicyName::Scripted => DetourPolicy::scripted(script.to_vec()),
        PolicyName::Enumerate => DetourPolicy::enumerate(),
    };
    if let Some(e) = epsilon {
        if !(e.is_finite() && e > 0.0) {
            return Err(ApiError::malformed("epsilon must be positive"));
        }
        p.epsilon = e;
    }
    if let Some(m) = max_windings {
        p.max_windings = m;
    }
    Ok(p)
}

fn engine_tolerances(config: &EngineConfig, policy: &DetourPolicy) -> Tolerances {
    let mut t = Tolerances::new();
    t.insert("step_tol".into(), config.step_tol);
    t.insert("atol_factor".into(), 1e-2);
    t.insert("min_step".into(), config.min_step);
    t.insert("r_switch".into(), config.r_switch);
    t.insert("sing_tol".into(), SING_TOL);
    t.insert("cluster_tol".into(), CLUSTER_TOL);
    t.insert("epsilon_cap".into(), policy.epsilon);
    t.insert("max_windings".into(), policy.max_windings as f64);
    t.insert("branch_cap".into(), BRANCH_CAP as f64);
    t
}

fn config(deadline: Option<Instant>) -> EngineConfig {
    EngineConfig { deadline, ..EngineConfig::default() }
}

/// Fixed singular locus, singular set and discriminant of a model.
pub fn sigma(model_file: &ModelFile) -> Result<SigmaFile, ApiError> {
    let model = model_file.to_model()?;
    let locus = sigma_e(&model)?;
    let sing = singular_points(&model)?;
    let generic = GENERIC_ABSCISSAS.iter().filter_map(|&(re, im)| total_tangency_multiplicity(&model, Complex64::new(re, im)).ok()).max();
    let inf = model.infinity();
    let mut tolerances = Tolerances::new();
    tolerances.insert("sing_tol".into(), SING_TOL);
    tolerances.insert("root_cluster_tol".into(), ROOT_CLUSTER_TOL);
    tolerances.insert("coprime_tol".into(), COPRIME_TOL);
    Ok(SigmaFile {
        kind: "sigma".into(),
        model: model_file.name.clone(),
        sigma_e: locus
            .points
            .iter()
            .map(|p| SigmaPointFile { x: cx(p.x), provenance: p.provenance.iter().map(|&v| provenance_name(v)).collect() })
            .collect(),
        singular_set: SingularSetFile {
            affine: sing.affine.iter().map(|&(x, y)| [cx(x), cx(y)]).collect(),
            at_infinity: sing.at_infinity.iter().map(|&x| cx(x)).collect(),
        },
        discriminant: DiscriminantFile {
            q: matrix(model.q()),
            q_infinity: matrix(&inf.q),
            multiplicity_at_infinity: inf.q.y_valuation(),
            generic_tangency_multiplicity: generic,
        },
        tolerances,
    })
}

/// Result of a continuation request with the CSV trace alongside.
pub struct ContinueOutput {
    pub file: ContinueFile,
    pub trace_csv: String,
}

pub fn continuation(req: &ContinueRequest, deadline: Option<Instant>) -> Result<ContinueOutput, ApiError> {
    let model = req.model.to_model()?;
    let path = req.path.to_path();
    let policy = policy(req.policy, &req.script, req.epsilon, req.max_windings)?;
    let config = config(deadline);
    let r = continue_along_with(&model, req.y0.into(), &path, &policy, config)?;
    Ok(ContinueOutput {
        file: ContinueFile::new(&req.model.name, &r, engine_tolerances(&config, &policy), req.trace),
        trace_csv: r.trace_csv(),
    })
}

pub fn holonomy(req: &HolonomyRequest, deadline: Option<Instant>) -> Result<HolonomyFile, ApiError> {
    let model = req.model.to_model()?;
    let path = req.path.to_path();
    if !(req.radius.is_finite() && req.radius > 0.0) {
        return Err(ApiError::malformed("radius must be positive"));
    }
    let policy = policy(PolicyName::Enumerate, &[], req.epsilon, req.max_windings)?;
    let config = config(deadline);
    let h = holonomy_map_with(
        &model,
        req.y0_center.into(),
        req.radius,
        &path,
        &policy,
        HolonomyConfig { engine: config, ..HolonomyConfig::new(req.grid) },
    )?;
    let bound = branch_count_bound(&model, &path, policy.epsilon).ok().map(|b| BoundFile {
        bound: b.bound,
        k: b.k,
        length: b.length,
        epsilon: b.epsilon,
    });
    let mut tolerances = engine_tolerances(&config, &DetourPolicy { mode: DetourMode::Enumerate, ..policy });
    tolerances.insert("fit_tol".into(), FIT_TOL);
    tolerances.insert("d_max".into(), D_MAX as f64);
    tolerances.insert("q_max".into(), Q_MAX as f64);
    tolerances.insert("max_shrinks".into(), MAX_SHRINKS as f64);
    Ok(HolonomyFile::new(&req.model.name, &h, bound, tolerances))
}

pub fn oracle(req: &OracleRequest) -> Result<OracleFile, ApiError> {
    let m = OracleModel::by_name(&req.id)?;
    let value = match req.x {
        Some(x) => {
            let spec = req.branch.clone().unwrap_or(BranchFileSpec::Principal).to_spec();
            Some(cx(m.value(from_cx(x), &spec)?))
        }
        None => None,
    };
    let singularities = req.region.map(|[a, b]| {
        let region = Region::new(Complex64::new(a[0].min(b[0]), a[1].min(b[1])), Complex64::new(a[0].max(b[0]), a[1].max(b[1])));
        let leaf = req.leaf.map(|[x, y]| (from_cx(x), from_cx(y)));
        m.singularities(region, leaf)
            .into_iter()
            .map(|s| OracleSingularityFile { x: cx(s.x), order: s.order.finite(), fixed: s.fixed })
            .collect()
    });
    Ok(OracleFile { kind: "oracle".into(), id: req.id.clone(), model: ModelFile::from_model(&req.id, &m.model), value, singularities })
}
