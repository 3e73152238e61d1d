use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use atspp::atspp::{multipath_cover, solve_atspp, solve_k_person};
use atspp::error::Error;
use atspp::latency::solve_latency;
use atspp::lp::{solve_latency_lp, solve_lp_alpha};
use atspp::metric::{gen_bad_gap, gen_random, gen_weights, MetricInstance};
use atspp::oracle::{exact_atspp, exact_k_person, exact_latency};
use atspp::rational::{self, Rational};
use atspp::report::{gap_report, GapConfig, Problem, CSV_HEADER};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

/// Approximation algorithms for asymmetric TSP paths, k-person paths and
/// directed latency, with exact LP bounds and brute-force oracles.
#[derive(Parser)]
#[command(name = "atspp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    io: Io,
}

#[derive(Args)]
struct Io {
    /// Instance JSON to read.
    #[arg(long = "in", global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Where to write the JSON (or CSV) result.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Include the solver trace in the JSON result.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance: random (`--n`) or the bad-gap family (`--bad-gap D`).
    Gen {
        #[arg(long, value_name = "D", conflicts_with = "n")]
        bad_gap: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_weight: u64,
        /// Attach random node weights in 1..=MAX.
        #[arg(long, value_name = "MAX")]
        weights: Option<u64>,
    },
    /// Hamiltonian s-t path by the iterated cover algorithm.
    Atspp {
        /// Number of cover iterations (default 2⌈log₂ n⌉+1).
        #[arg(long)]
        iters: Option<usize>,
    },
    /// k s-t paths covering every node.
    Kperson {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Cover every node with at most k⌈log₂ n⌉ s-t paths.
    Multipath {
        #[arg(long)]
        k: usize,
    },
    /// Hamiltonian s-t path with small total latency.
    Latency {
        /// Use the instance's node weights.
        #[arg(long)]
        weighted: bool,
    },
    /// Optimal value of LP(α) or of the latency LP.
    LpBound {
        #[arg(
            long,
            value_name = "RAT",
            required_unless_present = "latency",
            conflicts_with = "latency"
        )]
        alpha: Option<String>,
        #[arg(long)]
        latency: bool,
    },
    /// Exact optimum by subset dynamic programming.
    Oracle {
        #[arg(long, value_parser = ["atspp", "latency", "kperson"])]
        problem: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Batch run on random instances; CSV of value, LP bound and optimum.
    GapReport {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        nmin: usize,
        #[arg(long)]
        nmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_weight: u64,
        /// Comma-separated: atspp, latency, kperson<k>.
        #[arg(long, default_value = "atspp")]
        problems: String,
        /// Fill the ms column (makes reruns differ).
        #[arg(long)]
        timing: bool,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<Error>() {
            Some(
                Error::Assertion { .. } | Error::Lp(_) | Error::Contract(_) | Error::Cyclic(_),
            ) => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            if let Some(Error::Assertion { trace: Some(t), .. }) = f.error.downcast_ref::<Error>() {
                eprintln!("{}", serde_json::to_string_pretty(t).unwrap_or_default());
            }
            ExitCode::from(f.code)
        }
    }
}

fn show(q: &Rational) -> String {
    format!("{} ({:.6})", rational::format(q), rational::to_f64(q))
}

fn load(io: &Io) -> anyhow::Result<MetricInstance> {
    let Some(path) = &io.input else {
        bail!(Error::Argument("--in FILE is required".into()))
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(MetricInstance::from_json(&text)?)
}

fn write_out(io: &Io, text: &str) -> anyhow::Result<()> {
    match &io.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Prints the summary and writes the JSON result to `--out`. With `--trace`
/// and no `--out` the JSON goes to stdout after the summary.
fn emit(io: &Io, summary: &[String], mut result: Value) -> anyhow::Result<()> {
    for line in summary {
        println!("{line}");
    }
    if !io.trace {
        if let Some(obj) = result.as_object_mut() {
            obj.remove("trace");
        }
    }
    if io.out.is_some() || io.trace {
        write_out(io, &format!("{}\n", serde_json::to_string_pretty(&result)?))?;
    }
    Ok(())
}

fn nodes(p: &[usize]) -> String {
    p.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<(), Failure> {
    let io = &cli.io;
    match cli.command {
        Command::Gen {
            bad_gap,
            n,
            seed,
            max_weight,
            weights,
        } => {
            let mut inst = match (bad_gap, n) {
                (Some(d), _) => gen_bad_gap(d)?,
                (None, Some(n)) => gen_random(n, seed, max_weight)?,
                (None, None) => {
                    return Err(Error::Argument("gen needs --n or --bad-gap".into()).into())
                }
            };
            if let Some(max) = weights {
                let w = gen_weights(inst.n, seed, max);
                inst = inst.with_weights(w)?;
            }
            write_out(io, &format!("{}\n", inst.to_json()))?;
        }
        Command::Atspp { iters } => {
            let inst = load(io)?;
            let run = solve_atspp(&inst, iters)?;
            let summary = vec![
                format!("path: {}", nodes(&run.path.nodes)),
                format!("cost: {}", show(&run.path.cost)),
                format!(
                    "checks: {}/{}",
                    run.checks.passed(),
                    run.checks.passed() + run.checks.failed()
                ),
            ];
            emit(io, &summary, serde_json::to_value(&run)?)?;
        }
        Command::Kperson { k, iters } => {
            let inst = load(io)?;
            let run = solve_k_person(&inst, k, iters)?;
            let mut summary: Vec<String> = run
                .paths
                .iter()
                .map(|p| format!("path: {}", nodes(p)))
                .collect();
            summary.push(format!("cost: {}", show(&run.cost)));
            summary.push(format!(
                "checks: {}/{}",
                run.checks.passed(),
                run.checks.passed() + run.checks.failed()
            ));
            emit(io, &summary, serde_json::to_value(&run)?)?;
        }
        Command::Multipath { k } => {
            let inst = load(io)?;
            let run = multipath_cover(&inst, k)?;
            let mut summary: Vec<String> = run
                .paths
                .iter()
                .map(|p| format!("path: {}", nodes(p)))
                .collect();
            summary.push(format!("cost: {}", show(&run.cost)));
            summary.push(format!(
                "checks: {}/{}",
                run.checks.passed(),
                run.checks.passed() + run.checks.failed()
            ));
            emit(io, &summary, serde_json::to_value(&run)?)?;
        }
        Command::Latency { weighted } => {
            let mut inst = load(io)?;
            if weighted && inst.weights.is_none() {
                return Err(
                    Error::Argument("--weighted needs an instance with weights".into()).into(),
                );
            }
            if !weighted {
                inst.weights = None;
            }
            let run = solve_latency(&inst)?;
            let summary = vec![
                format!("path: {}", nodes(&run.order.nodes)),
                format!("latency: {}", show(&run.order.total)),
                format!("lp: {}", show(&run.lp_value)),
                format!(
                    "checks: {}/{}",
                    run.checks.passed(),
                    run.checks.passed() + run.checks.failed()
                ),
            ];
            emit(io, &summary, serde_json::to_value(&run)?)?;
        }
        Command::LpBound { alpha, latency } => {
            let inst = load(io)?;
            let (value, result) = if latency {
                let sol = solve_latency_lp(&inst)?;
                (sol.objective.clone(), sol.to_json())
            } else {
                let alpha = rational::parse(alpha.as_deref().expect("clap requires one"))?;
                let (value, x) = solve_lp_alpha(&inst, &alpha)?;
                (
                    value.clone(),
                    json!({ "alpha": rational::format(&alpha), "objective": rational::format(&value), "x": x }),
                )
            };
            emit(io, &[format!("lp: {}", show(&value))], result)?;
        }
        Command::Oracle { problem, k } => {
            let inst = load(io)?;
            let r = match problem.as_str() {
                "atspp" => exact_atspp(&inst)?,
                "latency" => exact_latency(&inst)?,
                _ => exact_k_person(&inst, k)?,
            };
            let mut summary: Vec<String> = r
                .paths
                .iter()
                .map(|p| format!("path: {}", nodes(p)))
                .collect();
            summary.push(format!("opt: {}", show(&r.value)));
            emit(io, &summary, serde_json::to_value(&r)?)?;
        }
        Command::GapReport {
            count,
            nmin,
            nmax,
            seed,
            max_weight,
            problems,
            timing,
        } => {
            let problems = problems
                .split(',')
                .map(|p| Problem::parse(p.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = GapConfig {
                count,
                nmin,
                nmax,
                seed,
                max_weight,
                problems,
            };
            let rows = gap_report(&cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for r in &rows {
                w.write_record(r.csv_fields(timing))?;
            }
            let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
            write_out(io, &String::from_utf8(bytes).context("CSV is UTF-8")?)?;
            if let Some(r) = rows.iter().find(|r| r.failure.is_some()) {
                let msg = format!(
                    "row {} ({}) failed: {}",
                    r.id,
                    r.algorithm,
                    r.failure.as_deref().unwrap_or("")
                );
                let code = if r.assertion { 2 } else { 1 };
                return Err(Failure {
                    code,
                    error: anyhow::anyhow!(msg),
                });
            }
        }
    }
    Ok(())
}
