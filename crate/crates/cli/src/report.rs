//! Machine-readable run reports, format version 1.
//!
//! The JSON schema lives in `schema/run_report.v1.json` at the repo root.

use std::collections::BTreeMap;

use c2lab::families::FamilyId;
use c2lab::recurrence::RecurrenceSolution;
use c2lab::{C2Result, LabeledGraph, Method};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub command: CommandEcho,
    pub inputs: Inputs,
    pub result: RunResult,
    /// `None` when run with `--omit-timing`.
    pub timing: Option<Timing>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecInput>,
    pub parameters: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// SHA-256 of the canonical graph text.
    pub sha256: String,
    pub vertices: usize,
    pub edges: usize,
}

impl GraphInput {
    pub fn new(path: Option<String>, g: &LabeledGraph) -> Self {
        Self {
            path,
            sha256: sha256_hex(&g.to_text()),
            vertices: g.vertex_count(),
            edges: g.edge_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecInput {
    pub path: String,
    pub name: String,
    /// SHA-256 of the canonical spec text (base graph inlined).
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunResult {
    C2 { result: C2Result },
    CrossCheck(CrossCheck),
    Scan { rows: Vec<ScanRow> },
    Recurrence { solution: RecurrenceSolution },
    Error { message: String },
}

impl RunResult {
    /// False for errors and failed cross-checks, in this result or any row.
    pub fn passed(&self) -> bool {
        match self {
            RunResult::C2 { .. } | RunResult::Recurrence { .. } => true,
            RunResult::CrossCheck(c) => c.agree,
            RunResult::Scan { rows } => rows.iter().all(|r| r.outcome.passed()),
            RunResult::Error { .. } => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub results: Vec<C2Result>,
    pub skipped: Vec<Skipped>,
    pub agree: bool,
    /// The common value when all methods agree.
    pub value: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub method: Method,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub parameter: usize,
    pub family: FamilyId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census_name: Option<String>,
    pub graph: Option<GraphInput>,
    pub outcome: RunResult,
    pub micros: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_micros: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub methods: Vec<Method>,
    pub threads: usize,
}

impl Provenance {
    pub fn new(methods: Vec<Method>) -> Self {
        Self {
            tool: "c2lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            methods,
            threads: rayon::current_num_threads(),
        }
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()).as_slice())
}
