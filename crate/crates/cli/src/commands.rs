use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};
use c2lab::families::{FamilyId, FamilyKind};
use c2lab::recurrence::{solve_family, RecursiveFamilySpec, SolveOptions};
use c2lab::{
    c2_assign, c2_brute, c2_formula, C2Error, C2Result, EdgeId, LabeledGraph, Method, PrimeField,
};
use serde_json::json;

use crate::report::{CrossCheck, GraphInput, RunResult, ScanRow, Skipped, SpecInput};

/// How to compute c₂ for one graph.
#[derive(Debug, Clone)]
pub struct C2Plan {
    pub p: u64,
    pub method: Method,
    /// Formula feeding `assign`.
    pub formula: u8,
    pub edges: Option<Vec<EdgeId>>,
    pub cross_check: bool,
    pub experimental: bool,
    pub budget: u64,
}

impl C2Plan {
    pub fn methods(&self) -> Vec<Method> {
        if self.cross_check {
            ALL_METHODS.to_vec()
        } else {
            vec![self.method]
        }
    }

    pub fn parameters(&self) -> BTreeMap<String, serde_json::Value> {
        let mut out = BTreeMap::new();
        out.insert("budget".into(), json!(self.budget));
        out.insert("cross_check".into(), json!(self.cross_check));
        if self.cross_check {
            return out;
        }
        out.insert("method".into(), json!(self.method.name()));
        if self.method == Method::Assign {
            out.insert("formula".into(), json!(self.formula));
        }
        if let Some(e) = &self.edges {
            out.insert("edges".into(), json!(e));
        }
        out
    }
}

const ALL_METHODS: [Method; 5] = [
    Method::Brute,
    Method::Formula1,
    Method::Formula2,
    Method::Formula3,
    Method::Assign,
];

fn formula_of(method: Method) -> Option<u8> {
    match method {
        Method::Formula1 => Some(1),
        Method::Formula2 => Some(2),
        Method::Formula3 => Some(3),
        _ => None,
    }
}

fn run_method(
    g: &LabeledGraph,
    field: PrimeField,
    method: Method,
    plan: &C2Plan,
    edges: Option<&[EdgeId]>,
) -> Result<C2Result, C2Error> {
    match method {
        Method::Brute => c2_brute(g, field, plan.budget),
        Method::Assign => {
            if field.modulus() != 2 && !plan.experimental {
                return Err(C2Error::UnsupportedPrime(field.modulus()));
            }
            c2_assign(g, field, plan.formula, edges)
        }
        m => c2_formula(
            g,
            field,
            formula_of(m).expect("formula method"),
            edges,
            plan.budget,
        ),
    }
}

pub fn c2_graph(g: &LabeledGraph, plan: &C2Plan) -> RunResult {
    let field = match PrimeField::new(plan.p) {
        Ok(f) => f,
        Err(e) => {
            return RunResult::Error {
                message: e.to_string(),
            }
        }
    };
    if plan.cross_check {
        return RunResult::CrossCheck(cross_check(g, field, plan));
    }
    match run_method(g, field, plan.method, plan, plan.edges.as_deref()) {
        Ok(result) => RunResult::C2 { result },
        Err(C2Error::UnsupportedPrime(p)) if plan.method == Method::Assign => RunResult::Error {
            message: format!("edge assignment at p = {p} is experimental; pass --experimental"),
        },
        Err(e) => RunResult::Error {
            message: e.to_string(),
        },
    }
}

/// Errors that mean "this method does not apply here" rather than a failure.
fn infeasible(e: &C2Error) -> bool {
    matches!(
        e,
        C2Error::BudgetExceeded { .. }
            | C2Error::TooManyEdges { .. }
            | C2Error::TooFewVertices(_)
            | C2Error::EdgeChoice { .. }
            | C2Error::NotLogDivergent { .. }
            | C2Error::DegreeMismatch { .. }
            | C2Error::UnsupportedPrime(_)
    )
}

fn cross_check(g: &LabeledGraph, field: PrimeField, plan: &C2Plan) -> CrossCheck {
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    let mut failure = None;
    for method in ALL_METHODS {
        match run_method(g, field, method, plan, None) {
            Ok(r) => results.push(r),
            Err(e) if infeasible(&e) => {
                let reason = match e {
                    C2Error::UnsupportedPrime(_) => {
                        "edge assignment at p > 2 needs --experimental".into()
                    }
                    e => e.to_string(),
                };
                skipped.push(Skipped { method, reason });
            }
            Err(e) => {
                failure.get_or_insert_with(|| format!("{}: {e}", method.name()));
            }
        }
    }
    if failure.is_none() {
        if let Some(r) = results.iter().find(|r| !r.valid) {
            failure = Some(format!(
                "{}: point count not divisible by p^2",
                r.method.name()
            ));
        } else if results.iter().any(|r| r.value != results[0].value) {
            let vals: Vec<String> = results
                .iter()
                .map(|r| format!("{}={}", r.method.name(), r.value))
                .collect();
            failure = Some(format!("methods disagree: {}", vals.join(", ")));
        } else if results.len() < 2 {
            failure = Some(format!(
                "only {} method(s) feasible, nothing to compare",
                results.len()
            ));
        }
    }
    let agree = failure.is_none();
    CrossCheck {
        value: if agree { Some(results[0].value) } else { None },
        results,
        skipped,
        agree,
        failure,
    }
}

pub fn load_graph(path: &Path) -> anyhow::Result<LabeledGraph> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    LabeledGraph::parse_text(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Builds a family kind from its kind name and parameters.
pub fn family_kind(kind: &str, params: &[usize]) -> anyhow::Result<FamilyKind> {
    let arity = |n: usize| -> anyhow::Result<()> {
        if params.len() != n {
            bail!("{kind} takes {n} parameter(s), got {}", params.len());
        }
        Ok(())
    };
    Ok(match kind {
        "toroidal" => {
            arity(3)?;
            FamilyKind::ToroidalGrid {
                k: params[0],
                l: params[1],
                m: params[2],
            }
        }
        "circulant" => {
            if params.len() < 2 {
                bail!("circulant takes N followed by at least one gap");
            }
            FamilyKind::Circulant {
                n: params[0],
                gaps: params[1..].to_vec(),
            }
        }
        "capped-x-ladder" => {
            arity(1)?;
            FamilyKind::CappedXLadder { size: params[0] }
        }
        "symmetric-x-ladder" => {
            arity(1)?;
            FamilyKind::SymmetricXLadder { size: params[0] }
        }
        _ => bail!(
            "unknown family {kind:?} (toroidal, circulant, capped-x-ladder, symmetric-x-ladder)"
        ),
    })
}

pub fn gen(
    kind: &str,
    params: &[usize],
    decomplete: Option<usize>,
) -> anyhow::Result<LabeledGraph> {
    let id = FamilyId {
        kind: family_kind(kind, params)?,
        decompletion_vertex: decomplete,
    };
    Ok(id.build()?)
}

/// An inclusive range `A..B` with optional step `:S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl std::str::FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected A..B or A..B:S, got {s:?}");
        let (range, step) = match s.split_once(':') {
            Some((r, st)) => (r, st.parse().map_err(|_| bad())?),
            None => (s, 1),
        };
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let (start, end) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if step == 0 || start > end {
            return Err(bad());
        }
        Ok(NRange { start, end, step })
    }
}

impl NRange {
    pub fn values(self) -> impl Iterator<Item = usize> {
        (self.start..=self.end).step_by(self.step)
    }
}

/// Substitutes `n` into the parameter template; exactly one entry must be `n`.
pub fn scan_params(template: &[String], n: usize) -> anyhow::Result<Vec<usize>> {
    if template.iter().filter(|t| *t == "n").count() != 1 {
        bail!("scan parameters need exactly one `n` placeholder");
    }
    template
        .iter()
        .map(|t| {
            if t == "n" {
                Ok(n)
            } else {
                t.parse().with_context(|| format!("bad parameter {t:?}"))
            }
        })
        .collect()
}

pub fn scan(
    kind: &str,
    template: &[String],
    range: NRange,
    decomplete: Option<usize>,
    plan: &C2Plan,
    timing: bool,
) -> anyhow::Result<Vec<ScanRow>> {
    scan_params(template, range.start)?;
    let mut rows = Vec::new();
    for n in range.values() {
        let start = Instant::now();
        let params = scan_params(template, n)?;
        let family = FamilyId {
            kind: family_kind(kind, &params)?,
            decompletion_vertex: decomplete,
        };
        let (graph, outcome) = match family.build() {
            Ok(g) => (Some(GraphInput::new(None, &g)), c2_graph(&g, plan)),
            Err(e) => (
                None,
                RunResult::Error {
                    message: e.to_string(),
                },
            ),
        };
        rows.push(ScanRow {
            parameter: n,
            census_name: family.census_name().map(String::from),
            family,
            graph,
            outcome,
            micros: timing.then(|| start.elapsed().as_micros() as u64),
        });
    }
    Ok(rows)
}

pub fn recur(path: &Path, p: u64, options: &SolveOptions) -> (Option<SpecInput>, RunResult) {
    let spec = match RecursiveFamilySpec::load(path) {
        Ok(s) => s,
        Err(e) => {
            return (
                None,
                RunResult::Error {
                    message: e.to_string(),
                },
            )
        }
    };
    let input = SpecInput {
        path: path.display().to_string(),
        name: spec.name.clone(),
        sha256: crate::report::sha256_hex(&spec.to_text()),
    };
    let result = PrimeField::new(p)
        .map_err(|e| e.to_string())
        .and_then(|f| solve_family(&spec, f, options).map_err(|e| e.to_string()));
    let result = match result {
        Ok(solution) => RunResult::Recurrence { solution },
        Err(message) => RunResult::Error { message },
    };
    (Some(input), result)
}

fn tuple(values: &[u64]) -> String {
    let v: Vec<String> = values.iter().map(ToString::to_string).collect();
    format!("({})", v.join(","))
}

fn describe_c2(r: &C2Result) -> String {
    let mut out = format!("c2 = {}  [{}", r.value, r.method.name());
    if let Some(f) = r.diagnostics.formula {
        write!(out, " via formula {f}").unwrap();
    }
    if !r.edge_choice.is_empty() {
        let e: Vec<String> = r.edge_choice.iter().map(ToString::to_string).collect();
        write!(out, ", edges {}", e.join(" ")).unwrap();
    }
    out.push(']');
    if !r.valid {
        out.push_str("  (point count not divisible by p^2)");
    }
    out
}

/// Human-readable rendering of a result.
pub fn render(result: &RunResult, p: u64) -> String {
    let mut out = String::new();
    match result {
        RunResult::C2 { result } => writeln!(out, "{}", describe_c2(result)).unwrap(),
        RunResult::CrossCheck(c) => {
            for r in &c.results {
                writeln!(out, "{}", describe_c2(r)).unwrap();
            }
            for s in &c.skipped {
                writeln!(out, "skipped {}: {}", s.method.name(), s.reason).unwrap();
            }
            match (&c.failure, c.value) {
                (None, Some(v)) => writeln!(out, "cross-check passed: c2 = {v}").unwrap(),
                (Some(f), _) => writeln!(out, "cross-check FAILED: {f}").unwrap(),
                _ => unreachable!("agreeing cross-check has a value"),
            }
        }
        RunResult::Scan { rows } => out.push_str(&scan_table(rows)),
        RunResult::Recurrence { solution: s } => {
            writeln!(out, "family {} at p = {p}", s.family).unwrap();
            writeln!(
                out,
                "states: {} (formula {}, seed edges {})",
                s.state_count,
                s.formula,
                s.seed_edges.join(" ")
            )
            .unwrap();
            writeln!(
                out,
                "indices n >= {} in steps of {}; recurrence from n = {}",
                s.offset, s.stride, s.recurrence_from
            )
            .unwrap();
            writeln!(out, "preperiod: {}", tuple(&s.preperiod)).unwrap();
            writeln!(out, "period: {}", tuple(&s.period)).unwrap();
            writeln!(out, "overlap window (n: direct, predicted):").unwrap();
            for o in &s.overlap {
                writeln!(out, "  {}: {}, {}", o.n, o.direct, o.predicted).unwrap();
            }
        }
        RunResult::Error { .. } => {}
    }
    out
}

fn scan_table(rows: &[ScanRow]) -> String {
    let header = ["n", "graph", "|V|", "|E|", "c2", "note"].map(String::from);
    let mut table = vec![header.to_vec()];
    for row in rows {
        let graph = match row.family.decompletion_vertex {
            Some(v) => format!("{} - v{v}", row.family.kind),
            None => row.family.kind.to_string(),
        };
        let (vs, es) = row.graph.as_ref().map_or(("-".into(), "-".into()), |g| {
            (g.vertices.to_string(), g.edges.to_string())
        });
        let (value, mut note) = match &row.outcome {
            RunResult::C2 { result } => (result.value.to_string(), String::new()),
            RunResult::CrossCheck(c) => match (c.value, &c.failure) {
                (Some(v), _) => (v.to_string(), format!("{} methods agree", c.results.len())),
                (None, f) => ("FAIL".into(), f.clone().unwrap_or_default()),
            },
            RunResult::Error { message } => ("error".into(), message.clone()),
            other => ("?".into(), format!("unexpected row result {other:?}")),
        };
        if let Some(name) = &row.census_name {
            note = if note.is_empty() {
                name.clone()
            } else {
                format!("{name}; {note}")
            };
        }
        table.push(vec![row.parameter.to_string(), graph, vs, es, value, note]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| {
            table
                .iter()
                .map(|r| r[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in &table {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
    }
    out
}
