//! Search for CPIs over bounded templates and the reduction pair processor.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpi::{interpret_with, orients, sum_poly, verify_cpi, Cpi, Mode};
use crate::dt::DtProblem;
use crate::poly::{Monomial, Poly};
use crate::term::{SymId, SymbolKind};
use crate::trs::Rule;

/// Polynomial in the template unknowns.
type Unknowns = Poly<usize, i128>;
/// Polynomial over argument positions whose coefficients contain unknowns.
type Template = Poly<usize, Unknowns>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub max_degree: u32,
    pub coeff_bound: i128,
    pub timeout: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_degree: 2,
            coeff_bound: 2,
            timeout: None,
        }
    }
}

impl SolverConfig {
    /// `(degree, bound)` pairs in the order they are tried.
    pub fn stages(&self) -> Vec<(u32, i128)> {
        let mut out = Vec::new();
        for d in 1..=self.max_degree {
            for b in 1..=self.coeff_bound {
                out.push((d, b));
            }
        }
        out
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("CPI search ran out of time")]
pub struct Timeout;

struct Constraint {
    /// `Σ c·Π u^e >= req`
    terms: Vec<(i128, Monomial<usize>)>,
    req: i128,
}

struct Templates {
    polys: BTreeMap<SymId, Template>,
    hi: Vec<i128>,
}

fn build_templates(problem: &DtProblem, degree: u32, bound: i128) -> Templates {
    let sig = problem.signature();
    let constructors = problem.trs().constructors();
    let mut symbols = BTreeSet::new();
    let rules = problem.dt_rules();
    for r in rules.iter().chain(problem.trs().rules()) {
        r.lhs.symbols(&mut symbols);
        r.rhs.symbols(&mut symbols);
    }
    let mut hi = Vec::new();
    let mut fresh = |h: i128| -> Unknowns {
        hi.push(h);
        Unknowns::var(hi.len() - 1)
    };
    let mut polys = BTreeMap::new();
    for f in symbols {
        let n = sig.arity(f);
        let p = if matches!(sig.kind(f), SymbolKind::Compound) {
            sum_poly(n)
        } else if constructors.contains(&f) {
            let mut p = Template::constant(fresh(bound));
            for i in 0..n {
                p = p.add(&Template::term(fresh(1), [(i, 1)]));
            }
            p
        } else {
            let mut p = Template::constant(fresh(bound));
            for i in 0..n {
                p = p.add(&Template::term(fresh(bound), [(i, 1)]));
            }
            if degree >= 2 {
                for i in 0..n {
                    for j in i..n {
                        p = p.add(&Template::term(fresh(bound), [(i, 1), (j, 1)]));
                    }
                }
            }
            p
        };
        polys.insert(f, p);
    }
    Templates { polys, hi }
}

/// Coefficient-wise constraints for orienting `rule`; `None` if some
/// constraint is violated whatever the unknowns are.
fn compile(problem: &DtProblem, t: &Templates, rule: &Rule, mode: Mode, out: &mut Vec<Constraint>) -> Option<()> {
    let sig = problem.signature();
    let lookup = |f: SymId| t.polys.get(&f);
    let l = interpret_with(&rule.lhs, sig, &lookup).expect("every symbol has a template");
    let r = interpret_with(&rule.rhs, sig, &lookup).expect("every symbol has a template");
    let diff = l.sub(&r);
    let mut constant_seen = false;
    for (m, c) in diff.terms() {
        let strict_here = m.is_empty() && mode == Mode::Strict;
        constant_seen |= m.is_empty();
        push(c, if strict_here { 1 } else { 0 }, out)?;
    }
    if mode == Mode::Strict && !constant_seen {
        return None;
    }
    Some(())
}

fn push(c: &Unknowns, req: i128, out: &mut Vec<Constraint>) -> Option<()> {
    let req = req - c.constant_term();
    let terms: Vec<(i128, Monomial<usize>)> = c
        .terms()
        .filter(|(m, _)| !m.is_empty())
        .map(|(m, &k)| (k, m.clone()))
        .collect();
    if terms.is_empty() {
        return if req <= 0 { Some(()) } else { None };
    }
    if req <= 0 && terms.iter().all(|(k, _)| *k >= 0) {
        return Some(());
    }
    out.push(Constraint { terms, req });
    Some(())
}

struct Search<'a> {
    cons: &'a [Constraint],
    hi: &'a [i128],
    val: Vec<Option<i128>>,
    deadline: Option<Instant>,
}

impl Search<'_> {
    fn range(&self, u: usize) -> (i128, i128) {
        match self.val[u] {
            Some(v) => (v, v),
            None => (0, self.hi[u]),
        }
    }

    fn bounds(&self, c: &Constraint) -> (i128, i128) {
        let (mut lb, mut ub) = (0, 0);
        for (k, m) in &c.terms {
            let (mut lo, mut up) = (1i128, 1i128);
            for &(u, e) in m {
                let (a, b) = self.range(u);
                lo *= a.pow(e);
                up *= b.pow(e);
            }
            if *k > 0 {
                lb += k * lo;
                ub += k * up;
            } else {
                lb += k * up;
                ub += k * lo;
            }
        }
        (lb, ub)
    }

    fn dfs(&mut self) -> Result<bool, Timeout> {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Timeout);
        }
        let mut pick: Option<(usize, usize)> = None;
        for c in self.cons {
            let (lb, ub) = self.bounds(c);
            if ub < c.req {
                return Ok(false);
            }
            if lb >= c.req {
                continue;
            }
            let mut open = c
                .terms
                .iter()
                .flat_map(|(_, m)| m)
                .filter(|(u, _)| self.val[*u].is_none());
            let Some(&(first, _)) = open.next() else { continue };
            let count = 1 + open.count();
            if pick.is_none_or(|(n, _)| count < n) {
                pick = Some((count, first));
            }
        }
        let Some((_, u)) = pick else { return Ok(true) };
        for v in 0..=self.hi[u] {
            self.val[u] = Some(v);
            if self.dfs()? {
                return Ok(true);
            }
        }
        self.val[u] = None;
        Ok(false)
    }
}

/// Searches one template stage for a CPI weakly orienting `D ∪ R` and
/// strictly orienting every tuple in `strict`.
fn search_stage(
    problem: &DtProblem,
    degree: u32,
    bound: i128,
    strict: &BTreeSet<usize>,
    deadline: Option<Instant>,
) -> Result<Option<Cpi>, Timeout> {
    if deadline.is_some_and(|d| Instant::now() >= d) {
        return Err(Timeout);
    }
    let t = build_templates(problem, degree, bound);
    let mut cons = Vec::new();
    let dt_rules = problem.dt_rules();
    for (i, r) in dt_rules.iter().enumerate() {
        let mode = if strict.contains(&i) { Mode::Strict } else { Mode::Weak };
        if compile(problem, &t, r, mode, &mut cons).is_none() {
            return Ok(None);
        }
    }
    for r in problem.trs().rules() {
        if compile(problem, &t, r, Mode::Weak, &mut cons).is_none() {
            return Ok(None);
        }
    }
    let mut seen = HashSet::new();
    cons.retain(|c| seen.insert((c.terms.clone(), c.req)));
    let mut search = Search {
        cons: &cons,
        hi: &t.hi,
        val: vec![None; t.hi.len()],
        deadline,
    };
    if !search.dfs()? {
        return Ok(None);
    }
    let val: Vec<i128> = search.val.iter().map(|v| v.unwrap_or(0)).collect();
    let mut cpi = Cpi::new();
    for (f, p) in &t.polys {
        cpi.set(*f, p.map_coeffs(|c| c.eval(|&u| val[u])));
    }
    Ok(Some(cpi))
}

fn strictly_oriented(problem: &DtProblem, cpi: &Cpi) -> BTreeSet<usize> {
    let sig = problem.signature();
    let rules = problem.dt_rules();
    problem
        .strict()
        .iter()
        .copied()
        .filter(|&i| orients(cpi, sig, &rules[i].lhs, &rules[i].rhs, Mode::Strict).unwrap_or(false))
        .collect()
}

/// Like [`find_cpi`] with the stages and deadline of `config`.
pub fn find_cpi_with(problem: &DtProblem, config: &SolverConfig) -> Result<Option<(Cpi, BTreeSet<usize>)>, Timeout> {
    let deadline = config.timeout.map(|d| Instant::now() + d);
    find_cpi_until(problem, config, deadline)
}

fn find_cpi_until(
    problem: &DtProblem,
    config: &SolverConfig,
    deadline: Option<Instant>,
) -> Result<Option<(Cpi, BTreeSet<usize>)>, Timeout> {
    if problem.is_solved() {
        return Ok(None);
    }
    // all of S first, then single tuples
    let mut targets = vec![problem.strict().clone()];
    if problem.strict().len() > 1 {
        targets.extend(problem.strict().iter().map(|&s| BTreeSet::from([s])));
    }
    for target in targets {
        for (degree, bound) in config.stages() {
            if let Some(cpi) = search_stage(problem, degree, bound, &target, deadline)? {
                let oriented = strictly_oriented(problem, &cpi);
                return Ok(Some((cpi, oriented)));
            }
        }
    }
    Ok(None)
}

/// A CPI that weakly orients `D ∪ R` and strictly orients a nonempty part of
/// `S`, together with that part. Templates of degree up to `max_degree` and
/// coefficients up to `coeff_bound` are searched exhaustively.
pub fn find_cpi(problem: &DtProblem, max_degree: u32, coeff_bound: i128) -> Option<(Cpi, BTreeSet<usize>)> {
    let config = SolverConfig {
        max_degree,
        coeff_bound,
        timeout: None,
    };
    find_cpi_with(problem, &config).expect("no deadline")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionPairError {
    #[error("no interpretation for `{0}`")]
    Missing(String),
    #[error("not a CPI: {0}")]
    Shape(String),
    #[error("`{0}` is not weakly oriented")]
    NotWeak(String),
    #[error("tuple {0} is not strictly oriented or not in S")]
    NotStrict(usize),
    #[error("no tuple of S is strictly oriented")]
    NoProgress,
}

/// Removes `oriented` from `S` after checking the processor's premises;
/// returns the new problem and the maximal degree of the sharp
/// interpretations.
pub fn reduction_pair_step(
    problem: &DtProblem,
    cpi: &Cpi,
    oriented: &BTreeSet<usize>,
) -> Result<(DtProblem, u32), ReductionPairError> {
    let report = verify_cpi(problem, cpi);
    if let Some(m) = report.missing.first() {
        return Err(ReductionPairError::Missing(m.clone()));
    }
    if let Some(v) = report.shape_violations.first() {
        return Err(ReductionPairError::Shape(v.clone()));
    }
    if let Some(row) = report.rows.iter().find(|r| !r.weak) {
        return Err(ReductionPairError::NotWeak(row.rule.clone()));
    }
    if oriented.is_empty() {
        return Err(ReductionPairError::NoProgress);
    }
    if let Some(&i) = oriented
        .iter()
        .find(|&&i| !problem.is_strict(i) || !report.rows[i].strict)
    {
        return Err(ReductionPairError::NotStrict(i));
    }
    let rest = problem.strict().difference(oriented).copied().collect();
    Ok((problem.with_strict(rest), report.degree))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessorStep {
    /// Indices of the tuples removed from `S`.
    pub removed: Vec<usize>,
    pub degree: u32,
    /// The interpretation, one `name = poly` line per symbol.
    pub interpretation: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundKind {
    UpperPoly { degree: u32 },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymptoticBound {
    pub bound: BoundKind,
    pub steps: Vec<ProcessorStep>,
    pub timed_out: bool,
}

impl AsymptoticBound {
    pub fn degree(&self) -> Option<u32> {
        match self.bound {
            BoundKind::UpperPoly { degree } => Some(degree),
            BoundKind::Unknown => None,
        }
    }
}

/// Applies the reduction pair processor until `S` is empty or no CPI is found.
pub fn solve(problem: &DtProblem, config: &SolverConfig) -> AsymptoticBound {
    let deadline = config.timeout.map(|d| Instant::now() + d);
    let mut current = problem.clone();
    let mut steps = Vec::new();
    while !current.is_solved() {
        let found = match find_cpi_until(&current, config, deadline) {
            Ok(found) => found,
            Err(Timeout) => {
                return AsymptoticBound {
                    bound: BoundKind::Unknown,
                    steps,
                    timed_out: true,
                }
            }
        };
        let Some((cpi, oriented)) = found else {
            return AsymptoticBound {
                bound: BoundKind::Unknown,
                steps,
                timed_out: false,
            };
        };
        let (next, degree) =
            reduction_pair_step(&current, &cpi, &oriented).expect("search output satisfies the premises");
        steps.push(ProcessorStep {
            removed: oriented.into_iter().collect(),
            degree,
            interpretation: cpi.display(current.signature()),
        });
        current = next;
    }
    AsymptoticBound {
        bound: BoundKind::UpperPoly {
            degree: steps.iter().map(|s| s.degree).max().unwrap_or(0),
        },
        steps,
        timed_out: false,
    }
}
