//! The per-TRS analysis pipeline and benchmark aggregation.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::confluence::{check_confluence, critical_pairs, search_nonconfluence, ConfluenceVerdict};
use crate::dt::{canonical_parallel_problem, canonical_problem, detup, no_parallelism};
use crate::rewrite::{Curve, DerivationHeight, Strategy};
use crate::solver::{solve, AsymptoticBound, SolverConfig};
use crate::sorts::{log_log_slope, sorted_irc_curve, HeightMethod};
use crate::tpdb::print_relative;
use crate::trs::Trs;

/// Bumped whenever a field of [`AnalysisReport`] changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub solver: SolverConfig,
    /// Largest start-term size for empirical curves; `None` skips them.
    pub curve_max_size: Option<usize>,
    /// Expanded-term budget for exhaustive derivation heights.
    pub budget: usize,
    /// Term and depth budgets of the non-confluence search.
    pub witness_budget: (usize, usize),
    pub timings: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            solver: SolverConfig {
                timeout: Some(std::time::Duration::from_secs(10)),
                ..SolverConfig::default()
            },
            curve_max_size: None,
            budget: 100_000,
            witness_budget: (1000, 4),
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalPairSummary {
    pub left: String,
    pub right: String,
    pub peak: String,
    pub position: String,
    pub overlay: bool,
    pub innermost_overlay: bool,
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub term: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curves {
    /// `exhaustive` or `descent`.
    pub method: String,
    pub irc: Curve,
    pub pirc: Curve,
    /// Pointwise `pirc(n) <= irc(n)` wherever both are exact.
    pub pirc_below_irc: bool,
}

/// Present only when `⇉` is known to be confluent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundEvidence {
    pub note: String,
    /// Log-log slope of the measured curves over the last three doublings.
    pub irc_slope: Option<f64>,
    pub pirc_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input: String,
    pub rules: usize,
    pub no_parallelism: bool,
    pub confluence: ConfluenceVerdict,
    pub critical_pairs: Vec<CriticalPairSummary>,
    pub nonconfluence_witness: Option<Witness>,
    pub dt_count: usize,
    pub pdt_count: usize,
    pub sequential: AsymptoticBound,
    pub parallel: AsymptoticBound,
    pub notes: Vec<String>,
    pub curves: Option<Curves>,
    pub lower_bounds: Option<LowerBoundEvidence>,
    /// Milliseconds per phase; only filled on request so reports stay
    /// byte-identical across runs by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

struct Clock {
    on: bool,
    last: Instant,
    phases: BTreeMap<String, f64>,
}

impl Clock {
    fn lap(&mut self, name: &str) {
        if self.on {
            let now = Instant::now();
            self.phases
                .insert(name.to_string(), (now - self.last).as_secs_f64() * 1000.0);
            self.last = now;
        }
    }
}

pub fn analyze(input: &str, trs: &Trs, config: &AnalysisConfig) -> AnalysisReport {
    let sig = trs.signature();
    let mut clock = Clock {
        on: config.timings,
        last: Instant::now(),
        phases: BTreeMap::new(),
    };
    let no_par = no_parallelism(trs);
    let seq_problem = canonical_problem(trs);
    let par_problem = canonical_parallel_problem(trs);
    clock.lap("dependency_tuples");

    let verdict = check_confluence(trs);
    let cps = critical_pairs(trs)
        .into_iter()
        .map(|cp| CriticalPairSummary {
            left: sig.display(&cp.left).to_string(),
            right: sig.display(&cp.right).to_string(),
            peak: sig.display(&cp.peak).to_string(),
            position: cp.position.to_string(),
            overlay: cp.is_overlay,
            innermost_overlay: cp.is_innermost_overlay,
            trivial: cp.is_trivial,
        })
        .collect();
    let witness = if verdict.is_confluent() {
        None
    } else {
        let (terms, depth) = config.witness_budget;
        search_nonconfluence(trs, terms, depth).map(|(t, a, b)| Witness {
            term: sig.display(&t).to_string(),
            left: sig.display(&a).to_string(),
            right: sig.display(&b).to_string(),
        })
    };
    clock.lap("confluence");

    let mut notes = Vec::new();
    let sequential = solve(&seq_problem, &config.solver);
    clock.lap("solve_sequential");
    let parallel = if no_par {
        notes.push("no parallelism: every right-hand side has a single dependency chain, so pirc = irc".into());
        sequential.clone()
    } else {
        solve(&par_problem, &config.solver)
    };
    clock.lap("solve_parallel");
    if sequential.timed_out || parallel.timed_out {
        notes.push("solver deadline reached; bounds reported as unknown".into());
    }

    let curves = config.curve_max_size.map(|n| {
        let method = if verdict.is_confluent() {
            HeightMethod::Descent {
                max_steps: config.budget as u64,
            }
        } else {
            HeightMethod::Exhaustive { budget: config.budget }
        };
        let irc = sorted_irc_curve(trs, Strategy::Innermost, n, method);
        let pirc = sorted_irc_curve(trs, Strategy::ParallelInnermost, n, method);
        let pirc_below_irc = irc.iter().all(|(k, i)| match (pirc[k].finite(), i.finite()) {
            (Some(p), Some(i)) => p <= i,
            _ => true,
        });
        Curves {
            method: match method {
                HeightMethod::Descent { .. } => "descent".into(),
                HeightMethod::Exhaustive { .. } => "exhaustive".into(),
            },
            irc,
            pirc,
            pirc_below_irc,
        }
    });
    clock.lap("curves");

    let lower_bounds = verdict.is_confluent().then(|| {
        let sizes = curves.as_ref().map(|c| doublings(*c.irc.keys().last().unwrap_or(&0)));
        let slope = |c: &Curve| sizes.as_ref().and_then(|s| log_log_slope(c, s));
        LowerBoundEvidence {
            note: "parallel-innermost rewriting is confluent, so pirc equals the runtime complexity of the parallel \
                   dependency tuple problem and lower bounds for the exported relative system carry over"
                .into(),
            irc_slope: curves.as_ref().and_then(|c| slope(&c.irc)),
            pirc_slope: curves.as_ref().and_then(|c| slope(&c.pirc)),
        }
    });

    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        input: input.to_string(),
        rules: trs.rules().len(),
        no_parallelism: no_par,
        confluence: verdict,
        critical_pairs: cps,
        nonconfluence_witness: witness,
        dt_count: seq_problem.dts().len(),
        pdt_count: par_problem.dts().len(),
        sequential,
        parallel,
        notes,
        curves,
        lower_bounds,
        timings: config.timings.then_some(clock.phases),
    }
}

/// The last four sizes `n, n/2, n/4, n/8` (three doublings) that are ≥ 1.
pub fn doublings(max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..4).map(|i| max >> i).filter(|&n| n >= 1).collect();
    out.reverse();
    out.dedup();
    out
}

/// The relative system `DT∥(R)/R` of the canonical parallel problem in TPDB
/// syntax.
pub fn export_relative(trs: &Trs) -> String {
    print_relative(&detup(&canonical_parallel_problem(trs)))
}

pub fn bound_class(degree: Option<u32>) -> String {
    match degree {
        Some(0) => "O(1)".into(),
        Some(1) => "O(n)".into(),
        Some(d) => format!("O(n^{d})"),
        None => "unknown".into(),
    }
}

impl AnalysisReport {
    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("input: {}", self.input));
        line(format!(
            "rules: {}  DTs: {}  PDTs: {}",
            self.rules, self.dt_count, self.pdt_count
        ));
        line(format!("no parallelism: {}", self.no_parallelism));
        line(format!("confluence: {}", verdict_name(self.confluence)));
        for cp in &self.critical_pairs {
            let mut flags = Vec::new();
            if cp.innermost_overlay {
                flags.push("innermost overlay");
            } else if cp.overlay {
                flags.push("overlay");
            }
            if cp.trivial {
                flags.push("trivial");
            }
            line(format!(
                "  <{}, {}> at {} [{}]",
                cp.left,
                cp.right,
                cp.position,
                flags.join(", ")
            ));
        }
        if let Some(w) = &self.nonconfluence_witness {
            line(format!(
                "  not confluent: {} => {} and {} => {}",
                w.term, w.left, w.term, w.right
            ));
        }
        line(format!("irc upper bound: {}", bound_class(self.sequential.degree())));
        line(format!("pirc upper bound: {}", bound_class(self.parallel.degree())));
        for n in &self.notes {
            line(format!("note: {n}"));
        }
        if let Some(c) = &self.curves {
            line(format!("curves ({}):", c.method));
            line("  n    irc    pirc".into());
            for (n, i) in &c.irc {
                line(format!("  {:<4} {:<6} {}", n, i.to_string(), c.pirc[n]));
            }
        }
        if let Some(lb) = &self.lower_bounds {
            let show = |s: Option<f64>| s.map_or("-".to_string(), |v| format!("{v:.2}"));
            line(format!("lower bounds: {}", lb.note));
            if lb.irc_slope.is_some() || lb.pirc_slope.is_some() {
                line(format!(
                    "  log-log slope: irc {}  pirc {}",
                    show(lb.irc_slope),
                    show(lb.pirc_slope)
                ));
            }
        }
        if let Some(t) = &self.timings {
            for (k, v) in t {
                line(format!("time {k}: {v:.1} ms"));
            }
        }
        out
    }
}

fn verdict_name(v: ConfluenceVerdict) -> &'static str {
    match v {
        ConfluenceVerdict::NonOverlapping => "non-overlapping",
        ConfluenceVerdict::TrivialInnermostOverlays => "trivial innermost overlays",
        ConfluenceVerdict::Unknown => "unknown",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub input: String,
    pub confluence: ConfluenceVerdict,
    pub sequential: Option<u32>,
    pub parallel: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub analyzed: usize,
    pub confluent: usize,
    pub verdicts: BTreeMap<String, usize>,
    /// Count per bound class (`O(1)`, `O(n)`, ..., `unknown`).
    pub sequential: BTreeMap<String, usize>,
    pub parallel: BTreeMap<String, usize>,
    pub rows: Vec<BenchRow>,
    pub errors: Vec<(String, String)>,
}

impl BenchSummary {
    /// Aggregates reports and per-file errors; the result is sorted by input
    /// name so it does not depend on completion order.
    pub fn collect(results: Vec<(String, Result<AnalysisReport, String>)>) -> BenchSummary {
        let mut results = results;
        results.sort_by(|a, b| a.0.cmp(&b.0));
        let mut s = BenchSummary {
            schema_version: SCHEMA_VERSION,
            ..Default::default()
        };
        for (name, r) in results {
            match r {
                Ok(rep) => {
                    s.analyzed += 1;
                    s.confluent += usize::from(rep.confluence.is_confluent());
                    *s.verdicts.entry(verdict_name(rep.confluence).to_string()).or_default() += 1;
                    *s.sequential.entry(bound_class(rep.sequential.degree())).or_default() += 1;
                    *s.parallel.entry(bound_class(rep.parallel.degree())).or_default() += 1;
                    s.rows.push(BenchRow {
                        input: name,
                        confluence: rep.confluence,
                        sequential: rep.sequential.degree(),
                        parallel: rep.parallel.degree(),
                    });
                }
                Err(e) => s.errors.push((name, e)),
            }
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "analyzed: {}  confluent: {}  errors: {}\n",
            self.analyzed,
            self.confluent,
            self.errors.len()
        );
        out.push_str(&format!(
            "{:<28} {:<28} {:<10} {}\n",
            "input", "confluence", "irc", "pirc"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<28} {:<28} {:<10} {}\n",
                r.input,
                verdict_name(r.confluence),
                bound_class(r.sequential),
                bound_class(r.parallel)
            ));
        }
        for (name, map) in [("irc", &self.sequential), ("pirc", &self.parallel)] {
            let cols: Vec<String> = map.iter().map(|(k, v)| format!("{k}: {v}")).collect();
            out.push_str(&format!("{name} bounds: {}\n", cols.join(", ")));
        }
        for (file, e) in &self.errors {
            out.push_str(&format!("error {file}: {e}\n"));
        }
        out
    }
}

/// Convenience for checks on the measured curves.
pub fn curve_value(curve: &Curve, n: usize) -> Option<u64> {
    curve.get(&n).copied().and_then(DerivationHeight::finite)
}
