//! Recorded request/response pairs under `tests/golden`. Each
//! `NAME.case.json` holds a request (and optionally the equivalent CLI
//! invocation); `NAME.response.json` holds the exact response bytes.
//! Set `UPDATE_GOLDEN=1` to re-record.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Output;
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use numeracy_workbench::service::router;
use numeracy_workbench::Workbench;
use serde::Deserialize;
use serde_json::Value;
use tower::ServiceExt;

/// Clock value used for every recorded session.
pub const RECORDED_TS: u64 = 1_700_000_000_000;

#[derive(Debug, Clone, Deserialize)]
pub struct Case {
    #[serde(skip)]
    pub name: String,
    pub method: String,
    pub path: String,
    #[serde(default)]
    pub body: Option<Value>,
    #[serde(default)]
    pub raw_body: Option<String>,
    #[serde(default)]
    pub cli: Option<Vec<String>>,
    #[serde(default)]
    pub files: BTreeMap<String, Value>,
    pub status: u16,
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn updating() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some()
}

pub fn load_cases() -> Vec<Case> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".case.json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let mut case: Case = serde_json::from_str(&std::fs::read_to_string(&p).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            case.name = p.file_name().unwrap().to_string_lossy().trim_end_matches(".case.json").to_string();
            case
        })
        .collect()
}

fn file_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => serde_json::to_string_pretty(other).unwrap(),
    }
}

fn substitute(value: &Value, files: &BTreeMap<String, Value>) -> Value {
    match value {
        Value::Object(map) if map.len() == 1 && map.contains_key("$file") => {
            let name = map["$file"].as_str().unwrap();
            files.get(name).unwrap_or_else(|| panic!("no file {name}")).clone()
        }
        Value::Object(map) => Value::Object(map.iter().map(|(k, v)| (k.clone(), substitute(v, files))).collect()),
        Value::Array(items) => Value::Array(items.iter().map(|v| substitute(v, files)).collect()),
        other => other.clone(),
    }
}

impl Case {
    pub fn request_body(&self) -> String {
        match (&self.raw_body, &self.body) {
            (Some(raw), _) => raw.clone(),
            (None, Some(body)) => serde_json::to_string(&substitute(body, &self.files)).unwrap(),
            (None, None) => String::new(),
        }
    }

    pub fn response_path(&self) -> PathBuf {
        golden_dir().join(format!("{}.response.json", self.name))
    }

    pub fn recorded(&self) -> String {
        std::fs::read_to_string(self.response_path())
            .unwrap_or_else(|_| panic!("no recording for {}; run with UPDATE_GOLDEN=1", self.name))
    }

    /// Writes the case's input files into `dir`.
    pub fn write_files(&self, dir: &Path) {
        for (name, value) in &self.files {
            std::fs::write(dir.join(name), file_text(value)).unwrap();
        }
    }
}

pub fn recording_workbench() -> Arc<Workbench> {
    Arc::new(Workbench::in_memory().deterministic(RECORDED_TS))
}

pub async fn call(app: &axum::Router, method: &str, path: &str, body: String) -> (u16, String) {
    let request = Request::builder()
        .method(method)
        .uri(path)
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status().as_u16();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

/// Replays every case in order against one recording workbench. Returns
/// the mismatches; re-records instead when updating.
pub async fn check_service(cases: &[Case]) -> Vec<String> {
    let app = router(recording_workbench());
    let mut failures = Vec::new();
    for case in cases {
        let (status, body) = call(&app, &case.method, &case.path, case.request_body()).await;
        if updating() {
            std::fs::write(case.response_path(), &body).unwrap();
        } else if body != case.recorded() {
            failures.push(format!("{}: response differs from recording", case.name));
        }
        if status != case.status {
            failures.push(format!("{}: status {status}, expected {}", case.name, case.status));
        }
    }
    failures
}

pub fn run_cli(args: &[String], dir: &Path) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

/// Runs each case's CLI form and compares it with the recorded response:
/// identical stdout on success, a nonzero exit naming the same error code
/// on failure.
pub fn check_cli(cases: &[Case]) -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut failures = Vec::new();
    for case in cases {
        let Some(args) = &case.cli else { continue };
        checked += 1;
        let dir = tempfile::tempdir().unwrap();
        case.write_files(dir.path());
        let out = run_cli(args, dir.path());
        let recorded = case.recorded();
        if case.status == 200 {
            if !out.status.success() {
                failures.push(format!("{}: cli failed: {}", case.name, String::from_utf8_lossy(&out.stderr)));
            } else if String::from_utf8_lossy(&out.stdout) != recorded {
                failures.push(format!("{}: cli output differs from the service", case.name));
            }
        } else {
            let code: Value = serde_json::from_str(&recorded).unwrap();
            let code = code["code"].as_str().unwrap().to_string();
            let stderr = String::from_utf8_lossy(&out.stderr);
            if out.status.success() || !stderr.starts_with(&format!("{code}: ")) {
                failures.push(format!("{}: cli should fail with {code}, got {:?} {stderr}", case.name, out.status));
            }
        }
    }
    (checked, failures)
}
