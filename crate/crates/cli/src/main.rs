//! Command-line entry point: enumerate model points, build and verify the
//! component graph, sweep the combinatorial lemmas, and check path-lemma
//! witnesses from JSON input.
//!
//! Exit codes: 0 on pass, 1 on falsification or counterexample, 2 on
//! usage, precision, or budget errors. All output is deterministic for a
//! fixed configuration.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use kisinlab::algebra::FieldParams;
use kisinlab::connect::{build_component_graph, path_condition, NilTuple};
use kisinlab::kisin::{Params, Presentation};
use kisinlab::lemmas::{sweep_grid, verify_bounds_lemma, verify_decrement_lemma, LemmaReport};
use kisinlab::meta::{mat_from_strings, ParamsMeta, ToolMeta};
use kisinlab::moduli::{enumerate_models, DEFAULT_BUDGET};

#[derive(Parser)]
#[command(
    name = "kisinlab",
    version,
    about = "Exact enumeration and verification of finite flat models of the trivial rank-2 mod-p representation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate model points and emit the model-set JSON.
    Enumerate {
        #[command(flatten)]
        params: ParamArgs,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the component graph, verify non-ordinary connectivity, and
    /// emit the report JSON (optionally a Graphviz rendering).
    Components {
        #[command(flatten)]
        params: ParamArgs,
        /// Write a Graphviz DOT rendering to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep both combinatorial lemmas over p in {3,5}, r up to r-max,
    /// e = m(p-1) for m up to m-max.
    VerifyLemmas {
        #[arg(long, default_value_t = 4)]
        r_max: usize,
        #[arg(long, default_value_t = 3)]
        m_max: i64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read a presentation and a nilpotent tuple from JSON and print the
    /// path-condition result. Exit 0 when satisfied, 1 when not.
    PathCheck {
        /// Input JSON: {"params": .., "presentation": [..], "nilpotents": [..]}.
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// Odd prime p.
    #[arg(long)]
    p: u64,
    /// Residue extension degree r >= 2.
    #[arg(long)]
    r: usize,
    /// Ramification index e, divisible by p - 1.
    #[arg(long)]
    e: i64,
    /// Lower w-support bound for enumeration (default e).
    #[arg(long)]
    window: Option<i64>,
    /// Working precision for capped inversions (default 4ep + 8).
    #[arg(long)]
    work_prec: Option<i64>,
    /// Candidate-evaluation cap (default 10^7; KISINLAB_BUDGET overrides
    /// the default, the flag overrides both).
    #[arg(long)]
    budget: Option<u64>,
}

impl ParamArgs {
    fn to_params(&self) -> Result<Params, kisinlab::Error> {
        let field = FieldParams::new(self.p, self.r)?;
        let params = Params::new(field, self.e)?;
        Ok(match self.work_prec {
            Some(w) => params.with_work_prec(w),
            None => params,
        })
    }

    fn window(&self) -> i64 {
        self.window.unwrap_or(self.e)
    }

    fn budget(&self) -> Result<u64, kisinlab::Error> {
        if let Some(b) = self.budget {
            return Ok(b);
        }
        match std::env::var("KISINLAB_BUDGET") {
            Ok(s) => s.parse().map_err(|_| {
                kisinlab::Error::InvalidParams(format!("KISINLAB_BUDGET = '{s}' is not a number"))
            }),
            Err(_) => Ok(DEFAULT_BUDGET),
        }
    }
}

#[derive(Serialize)]
struct SweepReport {
    tool: ToolMeta,
    passed: bool,
    reports: Vec<LemmaReport>,
}

#[derive(Deserialize)]
struct PathCheckInput {
    params: ParamsMeta,
    presentation: Vec<[[String; 2]; 2]>,
    nilpotents: Vec<[[String; 2]; 2]>,
}

#[derive(Serialize)]
struct PathCheckOutput {
    tool: ToolMeta,
    params: ParamsMeta,
    satisfied: bool,
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("writing {path:?}: {e}")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Ok(exit code) for completed runs (0 pass, 1 falsification); Err for
/// usage, precision, and budget failures (exit 2).
fn run(cli: Cli) -> Result<u8, String> {
    match cli.cmd {
        Cmd::Enumerate { params, out } => {
            let budget = params.budget().map_err(|e| e.to_string())?;
            let pr = params.to_params().map_err(|e| e.to_string())?;
            let ms = enumerate_models(&pr, params.window(), budget).map_err(|e| e.to_string())?;
            let json = ms.to_json().map_err(|e| e.to_string())?;
            let text = serde_json::to_string_pretty(&json).map_err(|e| e.to_string())?;
            emit(&text, &out)?;
            Ok(0)
        }
        Cmd::Components { params, dot, out } => {
            let budget = params.budget().map_err(|e| e.to_string())?;
            let pr = params.to_params().map_err(|e| e.to_string())?;
            let ms = enumerate_models(&pr, params.window(), budget).map_err(|e| e.to_string())?;
            let graph = build_component_graph(&ms).map_err(|e| e.to_string())?;
            let report = graph.to_report().map_err(|e| e.to_string())?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            emit(&text, &out)?;
            if let Some(path) = dot {
                let rendered = graph.to_dot().map_err(|e| e.to_string())?;
                fs::write(&path, rendered).map_err(|e| format!("writing {path:?}: {e}"))?;
            }
            Ok(if report.verified { 0 } else { 1 })
        }
        Cmd::VerifyLemmas { r_max, m_max, out } => {
            let mut reports = Vec::new();
            for (p, r, e) in sweep_grid(r_max, m_max) {
                let field = FieldParams::new(p, r).map_err(|e| e.to_string())?;
                let pr = Params::new(field, e).map_err(|e| e.to_string())?;
                reports.push(verify_bounds_lemma(&pr));
                reports.push(verify_decrement_lemma(&pr));
            }
            let passed = reports.iter().all(LemmaReport::passed);
            let sweep = SweepReport {
                tool: ToolMeta::current(),
                passed,
                reports,
            };
            let text = serde_json::to_string_pretty(&sweep).map_err(|e| e.to_string())?;
            emit(&text, &out)?;
            Ok(if passed { 0 } else { 1 })
        }
        Cmd::PathCheck { input } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("reading {input:?}: {e}"))?;
            let parsed: PathCheckInput =
                serde_json::from_str(&text).map_err(|e| format!("parsing {input:?}: {e}"))?;
            let pr = parsed.params.to_params().map_err(|e| e.to_string())?;
            let field = pr.field();
            let mats = parsed
                .presentation
                .iter()
                .map(|m| mat_from_strings(field, m))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let presentation = Presentation::new(pr.clone(), mats).map_err(|e| e.to_string())?;
            let nil_mats = parsed
                .nilpotents
                .iter()
                .map(|m| mat_from_strings(field, m))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let nil = NilTuple::new(&pr, nil_mats).map_err(|e| e.to_string())?;
            let satisfied = path_condition(&nil, &presentation).map_err(|e| e.to_string())?;
            let output = PathCheckOutput {
                tool: ToolMeta::current(),
                params: ParamsMeta::of(&pr),
                satisfied,
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&output).map_err(|e| e.to_string())?
            );
            Ok(if satisfied { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
