//! End-to-end acceptance checks, one line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use pirc::analysis::{doublings, export_relative};
use pirc::confluence::{
    check_confluence, critical_pairs, innermost_critical_overlays, search_nonconfluence, ConfluenceVerdict,
};
use pirc::cpi::{parse_cpi, verify_cpi};
use pirc::dt::{canonical_parallel_problem, canonical_problem, detup, no_parallelism, DtProblem};
use pirc::fixtures;
use pirc::rewrite::{dh, step_innermost, step_parallel_innermost, DerivationHeight, Strategy};
use pirc::solver::{solve, BoundKind, SolverConfig};
use pirc::sorts::{log_log_slope, sorted_irc_curve, HeightMethod};
use pirc::term::Term;
use pirc::tpdb::{parse_relative, parse_term, parse_trs, print_relative, print_trs};
use pirc::trs::{enumerate_basic_terms, Trs};
use pirc::validate::{check_determinism, check_dh_vs_cplx, check_relative_sandwich, CheckOutcome, OracleConfig};

type Outcome = Result<String, String>;

/// Number, name, time limit in seconds, check.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn show(trs: &Trs, t: &Term) -> String {
    trs.signature().display(t).to_string()
}

fn dt_lines(p: &DtProblem) -> BTreeSet<String> {
    p.dts().iter().map(|d| d.display(p.signature()).to_string()).collect()
}

fn golden(lines: &[&str]) -> BTreeSet<String> {
    lines.iter().map(|s| s.to_string()).collect()
}

/// A check passes only with no counterexample and no budget-truncated term.
fn clean(c: &CheckOutcome) -> Result<usize, String> {
    if let Some(cx) = &c.counterexample {
        return Err(format!("{}: {cx}", c.name));
    }
    ensure(c.inconclusive.is_empty(), || {
        format!("{}: inconclusive on {:?}", c.name, c.inconclusive)
    })?;
    ensure(c.checked > 0, || format!("{}: nothing checked", c.name))?;
    Ok(c.checked)
}

fn c1_derivation_heights() -> Outcome {
    let trs = fixtures::size();
    let t = parse_term("size(Tree(Zero,Nil,Tree(Zero,Nil,Nil)))", trs.signature()).unwrap();
    let seq = dh(&t, Strategy::Innermost, &trs, 100_000);
    let par = dh(&t, Strategy::ParallelInnermost, &trs, 100_000);
    ensure(
        seq == DerivationHeight::Finite(7) && par == DerivationHeight::Finite(5),
        || format!("innermost {seq}, parallel {par}"),
    )?;
    Ok("innermost 7, parallel 5".into())
}

fn c2_pdt_golden() -> Outcome {
    let size = golden(&[
        "plus#(Zero,y) -> Com_0",
        "plus#(S(x),y) -> Com_1(plus#(x,y))",
        "size#(Nil) -> Com_0",
        "size#(Tree(v,l,r)) -> Com_2(size#(l),plus#(size(l),size(r)))",
        "size#(Tree(v,l,r)) -> Com_2(size#(r),plus#(size(l),size(r)))",
    ]);
    let doubles = golden(&[
        "doubles#(Zero) -> Com_0",
        "doubles#(S(x)) -> Com_1(d#(S(x)))",
        "doubles#(S(x)) -> Com_1(doubles#(x))",
        "d#(Zero) -> Com_0",
        "d#(S(x)) -> Com_1(d#(x))",
    ]);
    let modulo = golden(&[
        "leq#(0,y) -> Com_0",
        "leq#(s(x),0) -> Com_0",
        "leq#(s(x),s(y)) -> Com_1(leq#(x,y))",
        "mod#(0,y) -> Com_0",
        "mod#(s(x),0) -> Com_0",
        "mod#(s(x),s(y)) -> Com_2(leq#(y,x),if#(leq(y,x),mod(-(s(x),s(y)),s(y)),s(x)))",
        "mod#(s(x),s(y)) -> Com_3(-#(s(x),s(y)),mod#(-(s(x),s(y)),s(y)),if#(leq(y,x),mod(-(s(x),s(y)),s(y)),s(x)))",
        "if#(true,x,y) -> Com_0",
        "if#(false,x,y) -> Com_0",
        "-#(x,0) -> Com_0",
        "-#(s(x),s(y)) -> Com_1(-#(x,y))",
    ]);
    let mut counts = Vec::new();
    for (name, trs, expected) in [
        ("size", fixtures::size(), size),
        ("doubles", fixtures::doubles(), doubles),
        ("mod", fixtures::modulo(), modulo),
    ] {
        let p = canonical_parallel_problem(&trs);
        let got = dt_lines(&p);
        ensure(p.dts().len() == expected.len() && got == expected, || {
            format!("{name}: got {got:?}")
        })?;
        counts.push(format!("{name} {}", got.len()));
    }
    Ok(counts.join(", "))
}

const SIZE_CPI: &str =
    "plus# = size = x1\nsize# = 2*x1 + x1^2\nplus = x1 + x2\nTree = 1 + x2 + x3\nS = 1 + x1\nZero = Nil = 1\n";
const DOUBLES_CPI: &str = "doubles# = d = 2*x1\nd# = x1\ndoubles = Zero = Cons = Nil = 1\nS = 1 + x1\n";

fn c3_handwritten_cpis() -> Outcome {
    let mut out = Vec::new();
    let size = fixtures::size();
    for (label, p) in [
        ("size DTs", canonical_problem(&size)),
        ("size PDTs", canonical_parallel_problem(&size)),
    ] {
        let cpi = parse_cpi(SIZE_CPI, p.signature()).map_err(|e| e.to_string())?;
        let r = verify_cpi(&p, &cpi);
        ensure(r.solves() && r.degree == 2, || format!("{label}: {r:?}"))?;
        out.push(format!("{label} degree {}", r.degree));
    }
    let p = canonical_parallel_problem(&fixtures::doubles());
    let cpi = parse_cpi(DOUBLES_CPI, p.signature()).map_err(|e| e.to_string())?;
    let r = verify_cpi(&p, &cpi);
    ensure(r.solves() && r.degree == 1, || format!("doubles PDTs: {r:?}"))?;
    out.push(format!("doubles PDTs degree {}", r.degree));
    Ok(out.join(", "))
}

fn c4_solver_bounds() -> Outcome {
    let config = SolverConfig::default();
    let degree = |p: &DtProblem| match solve(p, &config).bound {
        BoundKind::UpperPoly { degree } => Some(degree),
        BoundKind::Unknown => None,
    };
    let size = fixtures::size();
    let doubles = fixtures::doubles();
    let got = [
        degree(&canonical_problem(&size)),
        degree(&canonical_parallel_problem(&size)),
        degree(&canonical_problem(&doubles)),
        degree(&canonical_parallel_problem(&doubles)),
    ];
    ensure(got == [Some(2), Some(2), Some(2), Some(1)], || {
        format!("size seq/par, doubles seq/par: {got:?}")
    })?;
    Ok("size O(n^2)/O(n^2), doubles irc O(n^2) vs pirc O(n)".into())
}

fn c5_confluence_verdicts() -> Outcome {
    use ConfluenceVerdict::*;
    for (name, trs, expected) in [
        ("size", fixtures::size(), NonOverlapping),
        ("doubles", fixtures::doubles(), NonOverlapping),
        ("mod", fixtures::modulo(), NonOverlapping),
        ("max", fixtures::max(), TrivialInnermostOverlays),
        ("no_confluence", fixtures::no_confluence(), Unknown),
    ] {
        let start = Instant::now();
        let v = check_confluence(&trs);
        ensure(v == expected, || format!("{name}: {v:?}"))?;
        ensure(start.elapsed() < Duration::from_secs(1), || {
            format!("{name}: {:?}", start.elapsed())
        })?;
    }
    let trs = fixtures::no_confluence();
    let w = search_nonconfluence(&trs, 1000, 4).ok_or("no witness found")?;
    let w = (show(&trs, &w.0), show(&trs, &w.1), show(&trs, &w.2));
    ensure(w == ("a".into(), "f(b,b)".into(), "f(b,c)".into()), || {
        format!("witness {w:?}")
    })?;
    Ok(format!("witness ({}, {}, {})", w.0, w.1, w.2))
}

fn c6_critical_pairs() -> Outcome {
    let trs = fixtures::critical_pairs();
    let got: BTreeSet<(String, String)> = critical_pairs(&trs)
        .iter()
        .map(|c| (show(&trs, &c.left), show(&trs, &c.right)))
        .collect();
    // the pair at position 1 pairs f(d) with the right-hand side b of f(a) -> b
    let expected: BTreeSet<(String, String)> = [("b", "c"), ("c", "b"), ("f(d)", "b")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    ensure(got == expected, || format!("got {got:?}"))?;
    ensure(critical_pairs(&trs).len() == 3, || "duplicate pairs".into())?;
    ensure(innermost_critical_overlays(&trs).is_empty(), || {
        "innermost overlays present".into()
    })?;
    Ok("<b,c>, <c,b>, <f(d),b>; no innermost overlays".into())
}

fn c7_oracle_suite() -> Outcome {
    let config = OracleConfig {
        max_size: 8,
        ..OracleConfig::default()
    };
    let mut checked = 0;
    for trs in [fixtures::size(), fixtures::doubles()] {
        let confluent = check_confluence(&trs).is_confluent();
        ensure(confluent, || "expected a confluent fixture".into())?;
        checked += clean(&check_dh_vs_cplx(
            &trs,
            &canonical_problem(&trs),
            Strategy::Innermost,
            true,
            &config,
        ))?;
        checked += clean(&check_dh_vs_cplx(
            &trs,
            &canonical_parallel_problem(&trs),
            Strategy::ParallelInnermost,
            true,
            &config,
        ))?;
    }
    let small = OracleConfig {
        max_size: 6,
        ..OracleConfig::default()
    };
    let m = fixtures::modulo();
    let mut sandwich = 0;
    for (label, p) in [
        ("innermost", canonical_problem(&m)),
        ("parallel", canonical_parallel_problem(&m)),
    ] {
        for c in check_relative_sandwich(&p, label, &small) {
            sandwich += clean(&c)?;
        }
    }
    Ok(format!(
        "{checked} height/complexity comparisons, {sandwich} sandwich comparisons, 0 counterexamples"
    ))
}

fn c8_no_parallelism() -> Outcome {
    let trs = fixtures::plus_only();
    ensure(no_parallelism(&trs), || "no_parallelism is false".into())?;
    let starts: Vec<Term> = enumerate_basic_terms(&trs, 20).take(100).collect();
    ensure(starts.len() == 100, || format!("only {} start terms", starts.len()))?;
    let mut steps = 0;
    for t in starts {
        let mut cur = t.clone();
        loop {
            let a = step_innermost(&cur, &trs);
            let b = step_parallel_innermost(&cur, &trs);
            ensure(a == b, || {
                format!("traces differ at {} from {}", show(&trs, &cur), show(&trs, &t))
            })?;
            let Some(next) = a.into_iter().next() else { break };
            ensure(b.len() == 1, || "nondeterministic step".into())?;
            cur = next;
            steps += 1;
        }
    }
    Ok(format!("100 traces, {steps} steps, identical"))
}

fn c9_determinism() -> Outcome {
    let config = OracleConfig {
        random_terms: 10_000,
        ..OracleConfig::default()
    };
    let mut names = Vec::new();
    for (name, trs) in fixtures::all() {
        if !check_confluence(&trs).is_confluent() {
            continue;
        }
        let c = check_determinism(&trs, &config);
        let n = clean(&c)?;
        ensure(n == 10_000, || format!("{name}: {n} terms checked"))?;
        names.push(name.trim_end_matches(".trs"));
    }
    Ok(format!("10^4 terms each for {}", names.join(", ")))
}

fn c10_asymptotics() -> Outcome {
    let trs = fixtures::doubles();
    let method = HeightMethod::Descent { max_steps: 1_000_000 };
    let sizes = doublings(32);
    let irc = sorted_irc_curve(&trs, Strategy::Innermost, 32, method);
    let pirc = sorted_irc_curve(&trs, Strategy::ParallelInnermost, 32, method);
    let si = log_log_slope(&irc, &sizes).ok_or("irc slope undefined")?;
    let sp = log_log_slope(&pirc, &sizes).ok_or("pirc slope undefined")?;
    let msg = format!("pirc slope {sp:.3}, irc slope {si:.3} over n = {sizes:?}");
    ensure((sp - 1.0).abs() <= 0.25 && (si - 2.0).abs() <= 0.3, || msg.clone())?;
    Ok(msg)
}

fn c11_round_trips() -> Outcome {
    for (name, source) in fixtures::SOURCES {
        let trs = parse_trs(source).map_err(|e| format!("{name}: {e}"))?;
        let printed = print_trs(&trs);
        let again = parse_trs(&printed).map_err(|e| format!("{name}: {e}"))?;
        ensure(again.same_rules_as(&trs) && print_trs(&again) == printed, || {
            format!("{name}: TRS round-trip")
        })?;
        let exported = export_relative(&trs);
        let rel = parse_relative(&exported).map_err(|e| format!("{name}: {e}"))?;
        let original = detup(&canonical_parallel_problem(&trs));
        ensure(rel.same_rules_as(&original) && print_relative(&rel) == exported, || {
            format!("{name}: relative round-trip")
        })?;
    }
    Ok(format!("{} fixtures, TRS and relative export", fixtures::SOURCES.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "derivation heights", 1, c1_derivation_heights),
        (2, "PDT generation", 1, c2_pdt_golden),
        (3, "hand-written CPIs", 1, c3_handwritten_cpis),
        (4, "solver bounds", 30, c4_solver_bounds),
        (5, "confluence verdicts", 5, c5_confluence_verdicts),
        (6, "critical pairs", 1, c6_critical_pairs),
        (7, "height/complexity oracles", 300, c7_oracle_suite),
        (8, "no-parallelism traces", 10, c8_no_parallelism),
        (9, "parallel determinism", 30, c9_determinism),
        (10, "empirical asymptotics", 120, c10_asymptotics),
        (11, "round-trips", 1, c11_round_trips),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match result {
            Ok(d) if secs < limit as f64 => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {n:>2} {:<4} {name} ({secs:.2} s, limit {limit} s): {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
