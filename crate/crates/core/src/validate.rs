//! Exhaustive cross-checks between derivation heights and chain-tree
//! complexities on small start terms.

use std::collections::{HashSet, VecDeque};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::chain::ChainOracle;
use crate::confluence::check_confluence;
use crate::dt::{
    canonical_parallel_problem, canonical_problem, detup, msdc, no_parallelism, DtProblem, SortAssignment,
};
use crate::rewrite::{step_innermost, step_parallel_innermost, DerivationHeight, DhOracle, NormalForms, Strategy};
use crate::term::{SymId, Term};
use crate::trs::{enumerate_basic_terms, Trs};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_size: usize,
    /// Bound on expanded terms per derivation-height or chain-tree query.
    pub budget: usize,
    /// Random terms for the determinism check.
    pub random_terms: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_size: 8,
            budget: 100_000,
            random_terms: 10_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Whether equality (rather than an inequality) was checked.
    pub equality: bool,
    pub checked: usize,
    pub counterexample: Option<String>,
    /// Start terms whose comparison was inconclusive because a budget ran out.
    pub inconclusive: Vec<String>,
}

impl CheckOutcome {
    fn new(name: &str, equality: bool) -> Self {
        CheckOutcome {
            name: name.into(),
            equality,
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    /// Records `lhs ≤ rhs` (or `=`) for the start term `t`.
    fn compare(&mut self, t: &str, lhs: DerivationHeight, rhs: DerivationHeight) {
        if self.counterexample.is_some() {
            return;
        }
        let holds = if self.equality { eq(lhs, rhs) } else { leq(lhs, rhs) };
        match holds {
            Some(true) => self.checked += 1,
            Some(false) => self.counterexample = Some(format!("{t}: {lhs} vs {rhs}")),
            None => self.inconclusive.push(t.to_string()),
        }
    }

    fn fail(&mut self, msg: String) {
        if self.counterexample.is_none() {
            self.counterexample = Some(msg);
        }
    }
}

fn leq(a: DerivationHeight, b: DerivationHeight) -> Option<bool> {
    use DerivationHeight::*;
    match (a, b) {
        (_, Omega) => Some(true),
        (Omega, Finite(_)) => Some(false),
        (Finite(x), Finite(y)) => Some(x <= y),
        (Finite(x), AtLeast(y)) if x <= y => Some(true),
        (AtLeast(x), Finite(y)) if x > y => Some(false),
        _ => None,
    }
}

fn eq(a: DerivationHeight, b: DerivationHeight) -> Option<bool> {
    match (a.is_exact(), b.is_exact()) {
        (true, true) => Some(a == b),
        _ => match (leq(a, b), leq(b, a)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            _ => None,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub confluent: bool,
    pub no_parallelism: bool,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }
}

/// Runs every check that applies to `trs`.
pub fn validate(trs: &Trs, config: &OracleConfig) -> ValidationReport {
    let confluent = check_confluence(trs).is_confluent();
    let seq = canonical_problem(trs);
    let par = canonical_parallel_problem(trs);
    let mut checks = vec![
        check_dh_vs_cplx(trs, &seq, Strategy::Innermost, confluent, config),
        check_dh_vs_cplx(trs, &par, Strategy::ParallelInnermost, confluent, config),
        check_parallel_below_sequential(trs, config),
    ];
    checks.extend(check_relative_sandwich(&seq, "innermost", config));
    checks.extend(check_relative_sandwich(&par, "parallel", config));
    let no_par = no_parallelism(trs);
    if no_par {
        checks.push(check_same_traces(trs, config));
    }
    if confluent {
        checks.push(check_determinism(trs, config));
        checks.push(check_nested_subterms(trs, config));
    }
    ValidationReport {
        confluent,
        no_parallelism: no_par,
        checks,
    }
}

/// `dh(t, →) ≤ cplx(t♯)` over the matching problem, with equality under
/// confluence.
pub fn check_dh_vs_cplx(
    trs: &Trs,
    problem: &DtProblem,
    strategy: Strategy,
    confluent: bool,
    config: &OracleConfig,
) -> CheckOutcome {
    let name = match strategy {
        Strategy::Innermost => "dh_innermost_vs_cplx",
        Strategy::ParallelInnermost => "dh_parallel_vs_cplx",
    };
    let mut out = CheckOutcome::new(name, confluent);
    let mut dh = DhOracle::new(trs, strategy);
    let mut chains = ChainOracle::new(problem, config.budget);
    let sig = trs.signature();
    for t in enumerate_basic_terms(trs, config.max_size) {
        let sharp = problem.dt_signature().sharp(&t);
        let c = chains.cplx(&sharp).expect("basic terms have normal arguments");
        out.compare(&sig.display(&t).to_string(), dh.dh(&t, config.budget), c);
    }
    out
}

/// `dh(t, ⇉) ≤ dh(t, →i)` and both relations have the same normal forms.
pub fn check_parallel_below_sequential(trs: &Trs, config: &OracleConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("dh_parallel_below_innermost", false);
    let mut seq = DhOracle::new(trs, Strategy::Innermost);
    let mut par = DhOracle::new(trs, Strategy::ParallelInnermost);
    let sig = trs.signature();
    for t in enumerate_basic_terms(trs, config.max_size) {
        let name = sig.display(&t).to_string();
        for u in reachable(&t, trs, config.budget) {
            if step_innermost(&u, trs).is_empty() != step_parallel_innermost(&u, trs).is_empty() {
                out.fail(format!("{name}: normal forms differ at {}", sig.display(&u)));
            }
        }
        out.compare(&name, par.dh(&t, config.budget), seq.dh(&t, config.budget));
    }
    out
}

/// `⇉`-reachable terms from `t`, at most `budget` of them.
fn reachable(t: &Term, trs: &Trs, budget: usize) -> Vec<Term> {
    let mut seen = HashSet::from([t.clone()]);
    let mut queue = VecDeque::from([t.clone()]);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        if out.len() >= budget {
            break;
        }
        for v in step_parallel_innermost(&u, trs) {
            if seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
        out.push(u);
    }
    out
}

/// `cplx(t♯) = dh(t♯, detup(p))` on well-typed sharp basic terms, and plain
/// basic terms have relative height 0. `label` distinguishes the check names.
pub fn check_relative_sandwich(problem: &DtProblem, label: &str, config: &OracleConfig) -> Vec<CheckOutcome> {
    let rel = detup(problem);
    let typing = SortAssignment::for_problem(problem);
    let sig = problem.signature();
    let mut upper = CheckOutcome::new(&format!("{label}_cplx_below_relative"), false);
    let mut lower = CheckOutcome::new(&format!("{label}_relative_below_cplx"), false);
    let mut dh = DhOracle::relative(&rel);
    let mut chains = ChainOracle::new(problem, config.budget);
    for t in enumerate_basic_terms(rel.union(), config.max_size) {
        if !typing.is_well_typed(&t) {
            continue;
        }
        let name = sig.display(&t).to_string();
        let h = dh.dh(&t, config.budget);
        match chains.cplx(&t) {
            Ok(c) => {
                upper.compare(&name, c, h);
                lower.compare(&name, h, c);
            }
            Err(_) => lower.compare(&name, h, DerivationHeight::Finite(0)),
        }
    }
    vec![upper, lower]
}

/// With no parallelism, `→i` and `⇉` have the same successors everywhere
/// along the derivations from basic terms.
pub fn check_same_traces(trs: &Trs, config: &OracleConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("same_traces", true);
    let sig = trs.signature();
    for t in enumerate_basic_terms(trs, config.max_size) {
        let mut same = true;
        for u in reachable(&t, trs, config.budget) {
            let mut a = step_innermost(&u, trs);
            let mut b = step_parallel_innermost(&u, trs);
            a.sort();
            a.dedup();
            b.sort();
            b.dedup();
            if a != b {
                out.fail(format!("{}: successors of {} differ", sig.display(&t), sig.display(&u)));
                same = false;
                break;
            }
        }
        if same {
            out.checked += 1;
        }
    }
    out
}

/// Random ground terms over the signature of `trs`, of depth at most
/// `max_depth`. Empty if there are no constants.
pub fn random_terms(trs: &Trs, count: usize, max_depth: usize, seed: u64) -> Vec<Term> {
    let sig = trs.signature();
    let symbols: Vec<(SymId, usize)> = sig.symbol_ids().map(|f| (f, sig.arity(f))).collect();
    let constants: Vec<SymId> = symbols.iter().filter(|s| s.1 == 0).map(|s| s.0).collect();
    if constants.is_empty() {
        return Vec::new();
    }
    let mut rng = StdRng::seed_from_u64(seed);
    fn gen(rng: &mut StdRng, symbols: &[(SymId, usize)], constants: &[SymId], depth: usize) -> Term {
        if depth == 0 || rng.gen_bool(0.3) {
            return Term::App(constants[rng.gen_range(0..constants.len())], Vec::new());
        }
        let (f, n) = symbols[rng.gen_range(0..symbols.len())];
        Term::App(f, (0..n).map(|_| gen(rng, symbols, constants, depth - 1)).collect())
    }
    (0..count)
        .map(|_| gen(&mut rng, &symbols, &constants, max_depth))
        .collect()
}

/// Every random term has at most one `⇉`-successor.
pub fn check_determinism(trs: &Trs, config: &OracleConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("parallel_determinism", true);
    let sig = trs.signature();
    for t in random_terms(trs, config.random_terms, 5, config.seed) {
        let succ = step_parallel_innermost(&t, trs);
        if succ.len() > 1 {
            out.fail(format!("{} has {} successors", sig.display(&t), succ.len()));
            break;
        }
        out.checked += 1;
    }
    out
}

/// `dh(t, ⇉)` equals the maximum over maximal structural dependency chains of
/// the summed heights of maximal parallel argument normal forms, for terms
/// reachable from small basic terms. Assumes `⇉` is confluent.
pub fn check_nested_subterms(trs: &Trs, config: &OracleConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("nested_subterms", true);
    let sig = trs.signature();
    let mut dh = DhOracle::new(trs, Strategy::ParallelInnermost);
    let mut nfs = NormalForms::new(trs, config.budget);
    let mut seen = HashSet::new();
    for start in enumerate_basic_terms(trs, config.max_size) {
        for t in reachable(&start, trs, config.budget) {
            if t.size() > config.max_size || !seen.insert(t.clone()) {
                continue;
            }
            let lhs = dh.dh(&t, config.budget);
            let rhs = match chain_sum(&t, trs, &mut dh, &mut nfs, config.budget) {
                Some(h) => h,
                None => {
                    out.inconclusive.push(sig.display(&t).to_string());
                    continue;
                }
            };
            out.compare(&sig.display(&t).to_string(), lhs, rhs);
        }
    }
    out
}

fn chain_sum(t: &Term, trs: &Trs, dh: &mut DhOracle, nfs: &mut NormalForms, budget: usize) -> Option<DerivationHeight> {
    let mut best = DerivationHeight::Finite(0);
    for chain in msdc(t, trs) {
        let mut total = 0u64;
        for p in &chain {
            let sub = t.subterm_at(p).expect("position of t");
            match max_anf_height(sub, dh, nfs, budget)? {
                DerivationHeight::Finite(h) => total += h,
                other => return Some(other),
            }
        }
        best = best.sup(DerivationHeight::Finite(total));
    }
    Some(best)
}

/// Largest `dh(·, ⇉)` over argument normal forms `f(n1, ..., nk)` with `ni` a
/// normal form of the `i`-th argument.
fn max_anf_height(t: &Term, dh: &mut DhOracle, nfs: &mut NormalForms, budget: usize) -> Option<DerivationHeight> {
    let Term::App(f, args) = t else {
        return Some(DerivationHeight::Finite(0));
    };
    let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
    for a in args {
        let options = nfs.of(a).ok()?;
        combos = combos
            .into_iter()
            .flat_map(|c| {
                options.iter().map(move |o| {
                    let mut c = c.clone();
                    c.push(o.clone());
                    c
                })
            })
            .collect();
    }
    let mut best = DerivationHeight::Finite(0);
    for c in combos {
        best = best.sup(dh.dh(&Term::App(*f, c), budget));
    }
    Some(best)
}
