use std::path::PathBuf;
use std::process::Command;

use algebroid_cli::api::{self, ContinueRequest, HolonomyRequest, PolicyName};
use algebroid_cli::dto::{ContinueFile, FiberDto, HolonomyFile, ModelFile, PathFile, SigmaFile};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower::ServiceExt;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load<T: DeserializeOwned>(name: &str) -> T {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_algebroid")).args(args).current_dir(fixture("")).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

async fn http(method: &str, uri: &str, body: String) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json").body(Body::from(body)).unwrap();
    let res = algebroid_cli::server::router().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn post<T: Serialize>(uri: &str, body: &T) -> (StatusCode, String) {
    http("POST", uri, serde_json::to_string(body).unwrap()).await
}

fn hk2_request(policy: PolicyName, script: Vec<i64>) -> ContinueRequest {
    ContinueRequest {
        model: load("hk2.json"),
        path: load("line_0_2.json"),
        y0: FiberDto::Finite([1.0, 0.0]),
        policy,
        script,
        epsilon: None,
        max_windings: None,
        trace: false,
    }
}

fn roundtrips<T: Serialize + DeserializeOwned>(text: &str) {
    let parsed: T = serde_json::from_str(text).unwrap();
    assert_eq!(api::render(&parsed), text);
}

#[test]
fn sigma_lists_the_fixed_locus() {
    let (code, out, _) = cli(&["sigma", "painleve8.json"]);
    assert_eq!(code, 0);
    let f: SigmaFile = serde_json::from_str(&out).unwrap();
    assert_eq!(f.sigma_e.len(), 1);
    assert_eq!(f.sigma_e[0].x, [0.0, 0.0]);
    assert_eq!(f.sigma_e[0].provenance, ["singular_point", "vertical_leaf"]);

    let (_, out, _) = cli(&["sigma", "riccati3.json"]);
    let f: SigmaFile = serde_json::from_str(&out).unwrap();
    let xs: Vec<f64> = f.sigma_e.iter().map(|p| p.x[0]).collect();
    assert_eq!(xs.len(), 3);
    for (x, z) in xs.iter().zip([0.0, 1.0, 2.0]) {
        assert!((x - z).abs() < 1e-9, "{xs:?}");
    }

    let (_, out, _) = cli(&["sigma", "hk2.json"]);
    let f: SigmaFile = serde_json::from_str(&out).unwrap();
    assert!(f.sigma_e.is_empty());
    roundtrips::<SigmaFile>(&out);
}

#[test]
fn rejected_model_exits_with_two() {
    let dir = std::env::temp_dir().join("algebroid-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let ragged = dir.join("ragged.json");
    std::fs::write(&ragged, r#"{"P":[[[1,0]],[]],"Q":[[[1,0]]]}"#).unwrap();
    let (code, out, err) = cli(&["sigma", ragged.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("MalformedInput"));

    // P and Q share the factor y
    let common = dir.join("common.json");
    std::fs::write(&common, r#"{"P":[[[0,0],[1,0]]],"Q":[[[0,0],[1,0]],[[0,0],[1,0]]]}"#).unwrap();
    let (code, _, err) = cli(&["sigma", common.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("NotCoprime"), "{err}");
}

#[test]
fn continue_examples() {
    let (code, out, _) = cli(&["continue", "hk2.json", "line_0_2.json", "--y0", "1", "--policy", "halt"]);
    assert_eq!(code, 0);
    let f: ContinueFile = serde_json::from_str(&out).unwrap();
    assert_eq!(f.status, "halted");
    let x1 = f.events[0].x1;
    assert!((x1[0] - 1.0).abs() < 1e-6 && x1[1].abs() < 1e-6, "{x1:?}");
    roundtrips::<ContinueFile>(&out);

    let (_, out, _) = cli(&["continue", "hk2.json", "line_0_2.json", "--y0", "1", "--policy", "scripted", "--script", "1"]);
    let f: ContinueFile = serde_json::from_str(&out).unwrap();
    let end = f.endpoint.unwrap();
    assert_eq!(end.x, [2.0, end.x[1]]);
    assert!(end.value[0].abs() < 1e-6 && (end.value[1] - 1.0).abs() < 1e-6, "{:?}", end.value);

    let trace = std::env::temp_dir().join("algebroid-exp-trace.csv");
    let (_, out, _) = cli(&["continue", "exp.json", "line_0_1.json", "--y0", "1", "--trace", trace.to_str().unwrap()]);
    let f: ContinueFile = serde_json::from_str(&out).unwrap();
    let e = f.endpoint.unwrap().value;
    assert!((e[0] - std::f64::consts::E).abs() < 1e-8 && e[1].abs() < 1e-8, "{e:?}");
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.lines().count() > 2);
}

#[test]
fn engine_error_exits_with_one() {
    let (code, out, err) = cli(&["continue", "painleve8.json", "through_0.json", "--y0", "1"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.starts_with("PathTooCloseToSigmaE"));
}

#[test]
fn oracle_subcommand_evaluates_the_catalog() {
    let (code, out, _) = cli(&["oracle", "log", "--x", "1,1", "--branch", r#"{"type":"sheet","n":1}"#]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let z = num_complex::Complex64::new(1.0, 1.0).ln() + num_complex::Complex64::new(0.0, std::f64::consts::TAU);
    assert!((v["value"][0].as_f64().unwrap() - z.re).abs() < 1e-14);
    assert!((v["value"][1].as_f64().unwrap() - z.im).abs() < 1e-14);
    let (code, _, err) = cli(&["oracle", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("UnknownOracle"));
}

#[tokio::test]
async fn health() {
    let (status, body) = http("GET", "/api/health", String::new()).await;
    assert_eq!(status, StatusCode::OK);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v, serde_json::json!({ "status": "ok" }));
}

#[tokio::test]
async fn sigma_is_identical_over_http() {
    let (_, out, _) = cli(&["sigma", "painleve8.json"]);
    let (status, body) = post("/api/sigma", &load::<ModelFile>("painleve8.json")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, out);
}

#[tokio::test]
async fn continue_is_identical_over_http() {
    for (policy, script, args) in [
        (PolicyName::Halt, vec![], vec!["--policy", "halt"]),
        (PolicyName::Scripted, vec![1], vec!["--policy", "scripted", "--script", "1"]),
        (PolicyName::Enumerate, vec![], vec!["--policy", "enumerate"]),
    ] {
        let mut a = vec!["continue", "hk2.json", "line_0_2.json", "--y0", "1"];
        a.extend(args);
        let (_, out, _) = cli(&a);
        let (status, body) = post("/api/continue", &hk2_request(policy, script)).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body, out);
    }
}

#[tokio::test]
async fn holonomy_is_identical_over_http() {
    let (code, out, err) = cli(&["holonomy", "hk2.json", "line_0_3.json", "--y0-center", "1", "--radius", "0.1", "--grid", "8"]);
    assert_eq!(code, 0, "{err}");
    let req = HolonomyRequest {
        model: load("hk2.json"),
        path: load("line_0_3.json"),
        y0_center: FiberDto::Finite([1.0, 0.0]),
        radius: 0.1,
        grid: 8,
        epsilon: None,
        max_windings: None,
    };
    let (status, body) = post("/api/holonomy", &req).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, out);
    let f: HolonomyFile = serde_json::from_str(&body).unwrap();
    assert_eq!(f.branches.len(), 2);
    roundtrips::<HolonomyFile>(&body);
}

#[tokio::test]
async fn path_through_the_fixed_locus_is_422() {
    let req = ContinueRequest {
        model: load("painleve8.json"),
        path: load::<PathFile>("through_0.json"),
        y0: FiberDto::Finite([1.0, 0.0]),
        policy: PolicyName::Halt,
        script: vec![],
        epsilon: None,
        max_windings: None,
        trace: false,
    };
    let (status, body) = post("/api/continue", &req).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v, serde_json::json!({ "error": "PathTooCloseToSigmaE" }));
}

#[tokio::test]
async fn refused_requests_are_400_with_a_reason() {
    let (status, body) = http("POST", "/api/sigma", "{not json".into()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["error"], "MalformedInput");
    assert!(v["reason"].as_str().is_some());

    let (status, body) = http("POST", "/api/sigma", r#"{"P":[[[0,0],[1,0]]],"Q":[[[0,0],[1,0]]]}"#.into()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["error"], "NotCoprime");
}

#[tokio::test]
async fn exhausted_budget_is_422() {
    let req = hk2_request(PolicyName::Enumerate, vec![]);
    let past = std::time::Instant::now() - std::time::Duration::from_secs(1);
    let err = api::continuation(&req, Some(past)).err().expect("deadline already passed");
    assert_eq!(err.name, "Budget");
    assert!(err.body().contains("\"error\": \"Budget\""));
}

#[tokio::test]
async fn cors_is_enabled() {
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/api/sigma")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let res = algebroid_cli::server::router().oneshot(req).await.unwrap();
    assert!(res.headers().contains_key("access-control-allow-origin"));
}
