//! End-to-end runs of the `c2lab` binary. Goldens are byte-exact; set
//! `C2LAB_UPDATE_GOLDEN=1` to rewrite them after an intended change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use c2lab::families::gen_circulant;
use c2lab_cli::report::{RunReport, RunResult};

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn c2lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2lab"))
        .args(args)
        .current_dir(crate_dir())
        .env_remove("C2LAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("C2LAB_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden {name} differs");
}

fn report(out: &Output) -> RunReport {
    serde_json::from_str(&stdout(out)).expect("stdout is a run report")
}

fn validator() -> jsonschema::Validator {
    let text =
        std::fs::read_to_string(crate_dir().join("../../schema/run_report.v1.json")).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(json: &str) {
    let instance: serde_json::Value = serde_json::from_str(json).unwrap();
    let v = validator();
    let errors: Vec<String> = v.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

const REPORTS: &[(&str, &[&str])] = &[
    (
        "c2_k3_brute.json",
        &[
            "--threads",
            "1",
            "--omit-timing",
            "--json",
            "-",
            "c2",
            "tests/data/k3.graph",
            "--method",
            "brute",
        ],
    ),
    (
        "c2_grid_cross_check.json",
        &[
            "--threads",
            "1",
            "--omit-timing",
            "--json",
            "-",
            "c2",
            "tests/data/grid_3_0_3_d0.graph",
            "--cross-check",
        ],
    ),
    (
        "scan_x_ladder.json",
        &[
            "--threads",
            "1",
            "--omit-timing",
            "--json",
            "-",
            "scan",
            "capped-x-ladder",
            "n",
            "--n-range",
            "7..9:2",
            "--decomplete",
        ],
    ),
    (
        "recur_skew.json",
        &[
            "--threads",
            "1",
            "--omit-timing",
            "--json",
            "-",
            "recur",
            "../../specs/skew_circulant_1_3.family",
        ],
    ),
];

#[test]
fn report_goldens() {
    for (name, args) in REPORTS {
        let out = c2lab(args);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        check_golden(name, &stdout(&out));
    }
}

#[test]
fn reports_match_schema_and_round_trip() {
    let mut texts: Vec<String> = REPORTS
        .iter()
        .map(|(_, args)| stdout(&c2lab(args)))
        .collect();
    // an errored run and a scan with an errored row
    texts.push(stdout(&c2lab(&[
        "--omit-timing",
        "--json",
        "-",
        "c2",
        "tests/data/path.graph",
        "--method",
        "formula1",
    ])));
    texts.push(stdout(&c2lab(&[
        "--json",
        "-",
        "scan",
        "toroidal",
        "n",
        "0",
        "3",
        "--n-range",
        "2..3",
        "--decomplete",
    ])));
    texts.push(stdout(&c2lab(&[
        "--json",
        "-",
        "recur",
        "../../specs/invalid/path.family",
    ])));
    for text in &texts {
        assert_valid(text);
        let parsed: RunReport = serde_json::from_str(text).unwrap();
        let mut again = serde_json::to_string_pretty(&parsed).unwrap();
        again.push('\n');
        assert_eq!(&again, text);
        let reparsed: RunReport = serde_json::from_str(&again).unwrap();
        assert_eq!(parsed, reparsed);
    }
}

#[test]
fn gen_toroidal_sizes() {
    let full = stdout(&c2lab(&["gen", "toroidal", "3", "0", "3"]));
    let g = c2lab::LabeledGraph::parse_text(&full).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (9, 18));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.graph");
    let out = c2lab(&[
        "gen",
        "toroidal",
        "3",
        "0",
        "3",
        "--decomplete",
        "0",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let g = c2lab::LabeledGraph::parse_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (8, 14));
    let fixture =
        std::fs::read_to_string(crate_dir().join("tests/data/grid_3_0_3_d0.graph")).unwrap();
    assert_eq!(g.to_text(), fixture);
}

#[test]
fn gen_circulant_is_the_circulant() {
    let text = stdout(&c2lab(&["gen", "circulant", "12", "4", "3"]));
    assert_eq!(text, gen_circulant(12, &[4, 3]).unwrap().to_text());
}

#[test]
fn x_ladder_adjacency_goldens() {
    for kind in ["capped-x-ladder", "symmetric-x-ladder"] {
        let out = c2lab(&["gen", kind, "7"]);
        assert!(out.status.success());
        check_golden(&format!("{kind}-7.graph"), &stdout(&out));
    }
}

#[test]
fn gen_reports_family_errors() {
    let out = c2lab(&["gen", "toroidal", "2", "0", "3"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("k >= 3"), "{}", stderr(&out));
    let out = c2lab(&["gen", "capped-x-ladder", "8"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("odd"));
}

#[test]
fn k3_brute_is_one() {
    let out = c2lab(&["c2", "tests/data/k3.graph", "--method", "brute"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "c2 = 1  [brute]\n");
}

#[test]
fn path_graph_fails_formula_precondition() {
    let out = c2lab(&["c2", "tests/data/path.graph", "--method", "formula1"]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("2+|E| = 2|V| violated"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn grid_cross_check_passes() {
    let out = c2lab(&["c2", "tests/data/grid_3_0_3_d0.graph", "--cross-check"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).ends_with("cross-check passed: c2 = 0\n"));
}

#[test]
fn cross_check_needs_two_methods() {
    // only brute force applies to the path
    let out = c2lab(&[
        "--json",
        "-",
        "c2",
        "tests/data/path.graph",
        "--cross-check",
    ]);
    assert!(!out.status.success());
    let RunResult::CrossCheck(c) = report(&out).result else {
        panic!("expected a cross-check")
    };
    assert!(!c.agree);
    assert_eq!(c.results.len(), 1);
    assert_eq!(c.skipped.len(), 4);
}

#[test]
fn assign_above_two_is_gated() {
    let out = c2lab(&["c2", "tests/data/grid_3_0_3_d0.graph", "--p", "3"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--experimental"));
    let out = c2lab(&[
        "c2",
        "tests/data/grid_3_0_3_d0.graph",
        "--p",
        "3",
        "--experimental",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn budget_flag_and_env() {
    let out = c2lab(&[
        "--budget",
        "4",
        "c2",
        "tests/data/k3.graph",
        "--method",
        "brute",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("budget"));
    let out = Command::new(env!("CARGO_BIN_EXE_c2lab"))
        .args(["c2", "tests/data/k3.graph", "--method", "brute"])
        .current_dir(crate_dir())
        .env("C2LAB_BUDGET", "4")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn scan_tables() {
    let out = c2lab(&[
        "scan",
        "circulant",
        "n",
        "1",
        "3",
        "--n-range",
        "7..12",
        "--decomplete",
    ]);
    assert!(out.status.success());
    check_golden("scan_circulant_1_3.txt", &stdout(&out));

    let out = c2lab(&[
        "scan",
        "toroidal",
        "n",
        "0",
        "3",
        "--n-range",
        "3..6",
        "--decomplete",
    ]);
    assert!(out.status.success());
    check_golden("scan_grid_m3.txt", &stdout(&out));
}

#[test]
fn scan_flags_the_census_graph() {
    let out = c2lab(&[
        "scan",
        "capped-x-ladder",
        "n",
        "--n-range",
        "7..13:2",
        "--decomplete",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row7 = text.lines().find(|l| l.starts_with("7 ")).unwrap();
    assert!(row7.contains("P_{6,3}"));
    assert_eq!(text.matches("P_{6,3}").count(), 1);
}

#[test]
fn scan_continues_after_a_row_error() {
    let out = c2lab(&[
        "--json",
        "-",
        "scan",
        "toroidal",
        "n",
        "0",
        "3",
        "--n-range",
        "2..4",
        "--decomplete",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let RunResult::Scan { rows } = report(&out).result else {
        panic!("expected a scan")
    };
    assert_eq!(rows.len(), 3);
    assert!(matches!(rows[0].outcome, RunResult::Error { .. }));
    for row in &rows[1..] {
        assert!(matches!(&row.outcome, RunResult::C2 { result } if result.value == 0));
    }
}

#[test]
fn scan_needs_one_placeholder() {
    let out = c2lab(&["scan", "toroidal", "3", "0", "3", "--n-range", "3..4"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("placeholder"));
}

#[test]
fn recur_text() {
    let out = c2lab(&["recur", "../../specs/nonskew_grid_m3.family"]);
    assert!(out.status.success(), "{}", stderr(&out));
    check_golden("recur_grid_m3.txt", &stdout(&out));
    let out = c2lab(&["recur", "../../specs/constant_k4.family"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("period: (1)\n"));
}

#[test]
fn recur_rejects_invalid_specs() {
    for spec in ["completed_grid_m3", "path", "deletion_too_old"] {
        let out = c2lab(&["recur", &format!("../../specs/invalid/{spec}.family")]);
        assert_eq!(out.status.code(), Some(1), "{spec}");
        assert!(stderr(&out).starts_with("error: "), "{spec}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let out = c2lab(&[
            "--threads",
            threads,
            "--omit-timing",
            "--json",
            "-",
            "recur",
            "../../specs/nonskew_grid_m3.family",
        ]);
        report(&out).result
    };
    assert_eq!(run("1"), run("3"));
}
