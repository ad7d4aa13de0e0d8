use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use pirc::analysis::{analyze, export_relative, AnalysisConfig, AnalysisReport, BenchSummary};
use pirc::solver::SolverConfig;
use pirc::tpdb::parse_trs;
use pirc::trs::Trs;
use pirc::validate::{validate, OracleConfig, ValidationReport};

#[derive(Parser)]
#[command(
    name = "pirc",
    version,
    about = "Parallel-innermost runtime complexity analysis for term rewrite systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one TRS: confluence, dependency tuples and complexity bounds.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        opts: AnalysisOpts,
    },
    /// Write the relative TRS of the parallel dependency tuples in TPDB syntax.
    ExportRelative {
        path: PathBuf,
        /// Output file; standard output if omitted.
        out: Option<PathBuf>,
    },
    /// Cross-check derivation heights against chain-tree complexities on all
    /// small basic terms.
    Oracle {
        path: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long)]
        json: bool,
    },
    /// Analyze every `.trs` file in a directory and summarize the bounds.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[command(flatten)]
        opts: AnalysisOpts,
    },
}

#[derive(Args, Clone)]
struct AnalysisOpts {
    /// Largest start-term size for empirical irc/pirc curves (none if omitted).
    #[arg(long)]
    max_size: Option<usize>,
    /// Expanded-term budget for derivation heights.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Largest polynomial degree tried for interpretations.
    #[arg(long, default_value_t = 2)]
    degree_max: u32,
    /// Largest coefficient tried for interpretations.
    #[arg(long, default_value_t = 2)]
    coeff_max: i128,
    /// Deadline for each complexity proof search.
    #[arg(long, default_value_t = 10)]
    timeout_secs: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Include per-phase timings (makes output run-dependent).
    #[arg(long)]
    timings: bool,
}

impl AnalysisOpts {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            solver: SolverConfig {
                max_degree: self.degree_max,
                coeff_bound: self.coeff_max,
                timeout: Some(Duration::from_secs(self.timeout_secs)),
            },
            curve_max_size: self.max_size,
            budget: self.budget,
            timings: self.timings,
            ..AnalysisConfig::default()
        }
    }
}

enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn read_trs(path: &Path) -> Result<Trs, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(input)?;
    parse_trs(&text)
        .map_err(|e| anyhow!("{}:{e}", path.display()))
        .map_err(input)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.into()))?;
    println!("{s}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { path, opts } => {
            let trs = read_trs(&path)?;
            let report = analyze(&path.display().to_string(), &trs, &opts.config());
            if opts.json {
                print_json(&report)
            } else {
                print!("{}", report.to_text());
                Ok(())
            }
        }
        Command::ExportRelative { path, out } => {
            let trs = read_trs(&path)?;
            let text = export_relative(&trs);
            match out {
                Some(out) => fs::write(&out, text)
                    .with_context(|| format!("cannot write {}", out.display()))
                    .map_err(input),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Oracle {
            path,
            max_size,
            budget,
            json,
        } => {
            let trs = read_trs(&path)?;
            let config = OracleConfig {
                max_size,
                budget,
                ..OracleConfig::default()
            };
            let report = validate(&trs, &config);
            if json {
                print_json(&report)
            } else {
                print!("{}", oracle_text(&report));
                Ok(())
            }
        }
        Command::Bench { dir, workers, opts } => {
            let summary = bench(&dir, workers, &opts.config())?;
            if opts.json {
                print_json(&summary)
            } else {
                print!("{}", summary.to_text());
                Ok(())
            }
        }
    }
}

fn oracle_text(report: &ValidationReport) -> String {
    let mut out = format!(
        "confluent: {}  no parallelism: {}\n",
        report.confluent, report.no_parallelism
    );
    for c in &report.checks {
        let rel = if c.equality { "=" } else { "<=" };
        let status = if c.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status} {} ({rel}): {} terms checked", c.name, c.checked));
        if !c.inconclusive.is_empty() {
            out.push_str(&format!(
                ", {} inconclusive (budget): {}",
                c.inconclusive.len(),
                c.inconclusive.join(" ")
            ));
        }
        out.push('\n');
        if let Some(cx) = &c.counterexample {
            out.push_str(&format!("  counterexample: {cx}\n"));
        }
    }
    out
}

fn bench(dir: &Path, workers: usize, config: &AnalysisConfig) -> Result<BenchSummary, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))
        .map_err(input)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "trs"))
        .collect();
    files.sort();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Failure::Internal(e.into()))?;
    let results: Vec<(String, Result<AnalysisReport, String>)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
                let result = match read_trs(path) {
                    Err(Failure::Input(e) | Failure::Internal(e)) => Err(format!("{e:#}")),
                    Ok(trs) => catch_unwind(AssertUnwindSafe(|| analyze(&name, &trs, config)))
                        .map_err(|_| "internal error during analysis".to_string()),
                };
                (name, result)
            })
            .collect()
    });
    Ok(BenchSummary::collect(results))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Input(e))) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(e))) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}
