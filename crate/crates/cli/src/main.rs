use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use c2lab::c2::DEFAULT_BUDGET;
use c2lab::recurrence::{SolveOptions, DEFAULT_STATE_CAP};
use c2lab::{EdgeId, Method};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use c2lab_cli::commands::{self, C2Plan, NRange};
use c2lab_cli::report::{
    CommandEcho, GraphInput, Inputs, Provenance, RunReport, RunResult, Timing, FORMAT_VERSION,
};

#[derive(Parser)]
#[command(
    name = "c2lab",
    version,
    about = "c2 invariants of graphs over small prime fields"
)]
struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON run report to PATH (`-` for stdout, replacing the text output).
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Leave timing out of the report, for reproducible output.
    #[arg(long, global = true)]
    omit_timing: bool,
    /// Cap on polynomial evaluations for point counting.
    #[arg(long, global = true, env = "C2LAB_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a family member in the graph text format.
    Gen(GenArgs),
    /// c2 of one graph file.
    C2(C2Args),
    /// c2 along a one-parameter slice of a family.
    Scan(ScanArgs),
    /// Solve a recursive family spec by transfer matrix.
    Recur(RecurArgs),
}

#[derive(Args)]
struct GenArgs {
    /// toroidal K L M | circulant N GAP... | capped-x-ladder SIZE | symmetric-x-ladder SIZE
    family: String,
    #[arg(required = true)]
    params: Vec<usize>,
    /// Delete vertex V (default 0) of the 4-regular graph.
    #[arg(long, value_name = "V", num_args = 0..=1, default_missing_value = "0")]
    decomplete: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// brute, formula1, formula2, formula3 or assign.
    #[arg(long, default_value = "assign")]
    method: Method,
    /// Formula whose factors the assign method counts.
    #[arg(long, default_value_t = 2)]
    formula: u8,
    /// Run every feasible method and require them to agree.
    #[arg(long)]
    cross_check: bool,
    /// Allow edge assignment at p > 2.
    #[arg(long)]
    experimental: bool,
}

#[derive(Args)]
struct C2Args {
    graph: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    /// Comma-separated edge ids for the formula (default: first nondegenerate choice).
    #[arg(long, value_delimiter = ',')]
    edges: Option<Vec<EdgeId>>,
}

#[derive(Args)]
struct ScanArgs {
    family: String,
    /// Family parameters with exactly one `n` for the scanned one, e.g. `n 0 3`.
    #[arg(required = true)]
    params: Vec<String>,
    /// Values of n: A..B (inclusive) or A..B:STEP.
    #[arg(long)]
    n_range: NRange,
    #[arg(long, value_name = "V", num_args = 0..=1, default_missing_value = "0")]
    decomplete: Option<usize>,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Args)]
struct RecurArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// Override the formula given in the spec.
    #[arg(long)]
    formula: Option<u8>,
    /// Directly computed members past the offset.
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
    /// Allow p > 2.
    #[arg(long)]
    experimental: bool,
}

fn plan(m: &MethodArgs, edges: Option<Vec<EdgeId>>, budget: u64) -> C2Plan {
    C2Plan {
        p: m.p,
        method: m.method,
        formula: m.formula,
        edges,
        cross_check: m.cross_check,
        experimental: m.experimental,
        budget,
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let start = Instant::now();
    let (name, inputs, result, methods) = match &cli.command {
        Command::Gen(a) => {
            let g = commands::gen(&a.family, &a.params, a.decomplete)?;
            match &a.output {
                Some(path) => {
                    std::fs::write(path, g.to_text())
                        .with_context(|| format!("writing {}", path.display()))?;
                    eprintln!(
                        "wrote {} ({} vertices, {} edges)",
                        path.display(),
                        g.vertex_count(),
                        g.edge_count()
                    );
                }
                None => print!("{}", g.to_text()),
            }
            return Ok(true);
        }
        Command::C2(a) => {
            if a.edges.is_some() && a.method.cross_check {
                bail!(
                    "--edges picks edges for one formula and cannot be combined with --cross-check"
                );
            }
            if a.edges.is_some() && a.method.method == Method::Brute {
                bail!("--edges does not apply to brute force");
            }
            let g = commands::load_graph(&a.graph)?;
            let plan = plan(&a.method, a.edges.clone(), cli.budget);
            let inputs = Inputs {
                p: plan.p,
                graph: Some(GraphInput::new(Some(a.graph.display().to_string()), &g)),
                spec: None,
                parameters: plan.parameters(),
            };
            ("c2", inputs, commands::c2_graph(&g, &plan), plan.methods())
        }
        Command::Scan(a) => {
            let plan = plan(&a.method, None, cli.budget);
            let mut parameters = plan.parameters();
            parameters.insert("family".into(), json!(a.family));
            parameters.insert("params".into(), json!(a.params));
            parameters.insert(
                "n_range".into(),
                json!({"start": a.n_range.start, "end": a.n_range.end, "step": a.n_range.step}),
            );
            parameters.insert("decomplete".into(), json!(a.decomplete));
            let rows = commands::scan(
                &a.family,
                &a.params,
                a.n_range,
                a.decomplete,
                &plan,
                !cli.omit_timing,
            )?;
            let inputs = Inputs {
                p: plan.p,
                graph: None,
                spec: None,
                parameters,
            };
            ("scan", inputs, RunResult::Scan { rows }, plan.methods())
        }
        Command::Recur(a) => {
            let options = SolveOptions {
                formula: a.formula,
                warmup: a.warmup,
                state_cap: a.state_cap,
                experimental: a.experimental,
            };
            let mut parameters = std::collections::BTreeMap::new();
            parameters.insert("formula".into(), json!(a.formula));
            parameters.insert("warmup".into(), json!(a.warmup));
            parameters.insert("state_cap".into(), json!(a.state_cap));
            let (spec, result) = commands::recur(&a.spec, a.p, &options);
            let inputs = Inputs {
                p: a.p,
                graph: None,
                spec,
                parameters,
            };
            ("recur", inputs, result, vec![Method::Assign])
        }
    };
    let passed = result.passed();
    let p = inputs.p;
    let report = RunReport {
        format_version: FORMAT_VERSION,
        command: CommandEcho {
            name: name.into(),
            args: std::env::args().skip(1).collect(),
        },
        inputs,
        result,
        timing: (!cli.omit_timing).then(|| Timing {
            wall_micros: start.elapsed().as_micros() as u64,
        }),
        provenance: Provenance::new(methods),
    };
    let to_stdout = cli.json.as_deref() == Some(std::path::Path::new("-"));
    if !to_stdout {
        print!("{}", commands::render(&report.result, p));
    }
    if let Some(path) = &cli.json {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        if to_stdout {
            std::io::stdout().write_all(text.as_bytes())?;
        } else {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if let RunResult::Error { message } = &report.result {
        eprintln!("error: {message}");
    }
    Ok(passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
