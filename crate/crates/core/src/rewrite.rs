//! Innermost, parallel-innermost and relative-innermost rewriting, plus exact
//! derivation-height search.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::term::{match_term, Position, Signature, Term};
use crate::trs::{enumerate_basic_terms, RelativeTrs, Trs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Innermost,
    ParallelInnermost,
}

/// Root contracta of `t`, tagged with the index of the rule used.
pub fn root_contracta(t: &Term, trs: &Trs) -> Vec<(Term, usize)> {
    let Some(f) = t.root() else { return Vec::new() };
    trs.rules_for(f)
        .iter()
        .filter_map(|&i| {
            let rule = &trs.rules()[i];
            match_term(&rule.lhs, t).map(|sigma| (rule.rhs.apply(&sigma), i))
        })
        .collect()
}

pub fn is_redex(t: &Term, trs: &Trs) -> bool {
    let Some(f) = t.root() else { return false };
    trs.rules_for(f)
        .iter()
        .any(|&i| match_term(&trs.rules()[i].lhs, t).is_some())
}

pub fn is_normal_form(t: &Term, trs: &Trs) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(_, args) => args.iter().all(|a| is_normal_form(a, trs)) && !is_redex(t, trs),
    }
}

/// Positions of innermost redexes, left to right. They are pairwise parallel.
pub fn innermost_redexes(t: &Term, trs: &Trs) -> Vec<Position> {
    fn walk(t: &Term, trs: &Trs, path: &mut Vec<u32>, out: &mut Vec<Position>) -> bool {
        let Term::App(_, args) = t else { return true };
        let mut args_nf = true;
        for (i, a) in args.iter().enumerate() {
            path.push(i as u32 + 1);
            args_nf &= walk(a, trs, path, out);
            path.pop();
        }
        if !args_nf {
            return false;
        }
        if is_redex(t, trs) {
            out.push(Position(path.clone()));
            return false;
        }
        true
    }
    let mut out = Vec::new();
    walk(t, trs, &mut Vec::new(), &mut out);
    out
}

/// One-step innermost successors tagged with the rule index, or `None` if `t`
/// is a normal form.
fn innermost_tagged(t: &Term, trs: &Trs) -> Option<Vec<(Term, usize)>> {
    let Term::App(f, args) = t else { return None };
    let mut out = Vec::new();
    let mut args_nf = true;
    for (i, a) in args.iter().enumerate() {
        if let Some(succ) = innermost_tagged(a, trs) {
            args_nf = false;
            for (s, rule) in succ {
                let mut new_args = Vec::with_capacity(args.len());
                new_args.extend_from_slice(&args[..i]);
                new_args.push(s);
                new_args.extend_from_slice(&args[i + 1..]);
                out.push((Term::App(*f, new_args), rule));
            }
        }
    }
    if args_nf {
        let c = root_contracta(t, trs);
        return if c.is_empty() { None } else { Some(c) };
    }
    Some(out)
}

fn dedup<T: Clone + Eq + std::hash::Hash>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

/// All one-step innermost successors. Empty iff `t` is a normal form.
pub fn step_innermost(t: &Term, trs: &Trs) -> Vec<Term> {
    dedup(innermost_tagged(t, trs).unwrap_or_default().into_iter().map(|(s, _)| s))
}

/// All results of contracting every innermost redex at once, one rule choice
/// per redex.
pub fn step_parallel_innermost(t: &Term, trs: &Trs) -> Vec<Term> {
    fn go(t: &Term, trs: &Trs) -> Option<Vec<Term>> {
        let Term::App(f, args) = t else { return None };
        let child: Vec<Option<Vec<Term>>> = args.iter().map(|a| go(a, trs)).collect();
        if child.iter().all(Option::is_none) {
            let c = root_contracta(t, trs);
            return if c.is_empty() {
                None
            } else {
                Some(dedup(c.into_iter().map(|(s, _)| s)))
            };
        }
        let mut acc: Vec<Vec<Term>> = vec![Vec::with_capacity(args.len())];
        for (a, succ) in args.iter().zip(child) {
            let options = succ.unwrap_or_else(|| vec![a.clone()]);
            acc = acc
                .into_iter()
                .flat_map(|prefix| {
                    options.iter().map(move |o| {
                        let mut p = prefix.clone();
                        p.push(o.clone());
                        p
                    })
                })
                .collect();
        }
        Some(dedup(acc.into_iter().map(|a| Term::App(*f, a))))
    }
    go(t, trs).unwrap_or_default()
}

/// Innermost steps over `S ∪ W`, with cost 1 for strict and 0 for weak rules.
pub fn step_relative_innermost(t: &Term, rel: &RelativeTrs) -> Vec<(Term, u8)> {
    dedup(
        innermost_tagged(t, rel.union())
            .unwrap_or_default()
            .into_iter()
            .map(|(s, i)| (s, u8::from(rel.is_strict_rule(i)))),
    )
}

pub fn successors(t: &Term, strategy: Strategy, trs: &Trs) -> Vec<Term> {
    match strategy {
        Strategy::Innermost => step_innermost(t, trs),
        Strategy::ParallelInnermost => step_parallel_innermost(t, trs),
    }
}

/// The first element of [`successors`], without building the others.
pub fn first_successor(t: &Term, strategy: Strategy, trs: &Trs) -> Option<Term> {
    fn innermost(t: &Term, trs: &Trs) -> Option<Term> {
        let Term::App(f, args) = t else { return None };
        for (i, a) in args.iter().enumerate() {
            if let Some(s) = innermost(a, trs) {
                let mut new_args = args.clone();
                new_args[i] = s;
                return Some(Term::App(*f, new_args));
            }
        }
        root_contracta(t, trs).into_iter().next().map(|(s, _)| s)
    }
    fn parallel(t: &Term, trs: &Trs) -> Option<Term> {
        let Term::App(f, args) = t else { return None };
        let child: Vec<Option<Term>> = args.iter().map(|a| parallel(a, trs)).collect();
        if child.iter().all(Option::is_none) {
            return root_contracta(t, trs).into_iter().next().map(|(s, _)| s);
        }
        let new_args = args
            .iter()
            .zip(child)
            .map(|(a, c)| c.unwrap_or_else(|| a.clone()))
            .collect();
        Some(Term::App(*f, new_args))
    }
    match strategy {
        Strategy::Innermost => innermost(t, trs),
        Strategy::ParallelInnermost => parallel(t, trs),
    }
}

/// Length of a longest derivation: exact, infinite, or a lower bound when the
/// search budget ran out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DerivationHeight {
    Finite(u64),
    Omega,
    AtLeast(u64),
}

impl DerivationHeight {
    pub fn finite(self) -> Option<u64> {
        match self {
            DerivationHeight::Finite(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, DerivationHeight::AtLeast(_))
    }

    /// Least upper bound of two heights. A truncated operand makes the result
    /// truncated unless the other is `Omega`.
    pub fn sup(self, other: DerivationHeight) -> DerivationHeight {
        use DerivationHeight::*;
        match (self, other) {
            (Omega, _) | (_, Omega) => Omega,
            (Finite(a), Finite(b)) => Finite(a.max(b)),
            (Finite(a) | AtLeast(a), Finite(b) | AtLeast(b)) => AtLeast(a.max(b)),
        }
    }

    /// The known lower bound (`u64::MAX` for `Omega`).
    pub fn lower(self) -> u64 {
        match self {
            DerivationHeight::Finite(n) | DerivationHeight::AtLeast(n) => n,
            DerivationHeight::Omega => u64::MAX,
        }
    }
}

impl fmt::Display for DerivationHeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationHeight::Finite(n) => write!(f, "{n}"),
            DerivationHeight::Omega => write!(f, "ω"),
            DerivationHeight::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

enum Relation<'a> {
    Plain(&'a Trs, Strategy),
    Relative(&'a RelativeTrs),
}

impl Relation<'_> {
    fn successors(&self, t: &Term) -> Vec<(Term, u8)> {
        match *self {
            Relation::Plain(trs, s) => successors(t, s, trs).into_iter().map(|u| (u, 1)).collect(),
            Relation::Relative(rel) => step_relative_innermost(t, rel),
        }
    }
}

/// Average term size per unit of search budget; see [`DhOracle::dh`].
pub const WORK_PER_TERM: usize = 64;

/// Exhaustive derivation-height search with a cache of exact values that
/// persists across calls on the same relation.
pub struct DhOracle<'a> {
    relation: Relation<'a>,
    known: HashMap<Term, u64>,
}

impl<'a> DhOracle<'a> {
    pub fn new(trs: &'a Trs, strategy: Strategy) -> Self {
        DhOracle {
            relation: Relation::Plain(trs, strategy),
            known: HashMap::new(),
        }
    }

    pub fn relative(rel: &'a RelativeTrs) -> Self {
        DhOracle {
            relation: Relation::Relative(rel),
            known: HashMap::new(),
        }
    }

    /// Longest path from `t` in the successor graph. `budget` bounds the
    /// number of distinct terms expanded in this call; the search also stops
    /// once the expanded terms have total size `WORK_PER_TERM * budget`, so
    /// that ever-growing derivations end in reasonable time.
    pub fn dh(&mut self, t: &Term, budget: usize) -> DerivationHeight {
        if let Some(&n) = self.known.get(t) {
            return DerivationHeight::Finite(n);
        }
        let mut graph: DiGraph<(), u8> = DiGraph::new();
        let mut ids: HashMap<Term, NodeIndex> = HashMap::new();
        let mut terms: Vec<Term> = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        let start = graph.add_node(());
        ids.insert(t.clone(), start);
        terms.push(t.clone());
        queue.push_back(start);
        let mut expanded = 0usize;
        let mut work = 0usize;
        let mut truncated = false;
        while let Some(n) = queue.pop_front() {
            let term = terms[n.index()].clone();
            if self.known.contains_key(&term) {
                continue;
            }
            if expanded == budget || work >= budget.saturating_mul(WORK_PER_TERM) {
                truncated = true;
                break;
            }
            expanded += 1;
            work += term.size();
            for (succ, cost) in self.relation.successors(&term) {
                let m = match ids.get(&succ) {
                    Some(&m) => m,
                    None => {
                        let m = graph.add_node(());
                        ids.insert(succ.clone(), m);
                        terms.push(succ);
                        queue.push_back(m);
                        m
                    }
                };
                graph.add_edge(n, m, cost);
            }
        }

        // tarjan_scc yields components in reverse topological order
        let sccs = tarjan_scc(&graph);
        let mut comp = vec![0usize; graph.node_count()];
        for (c, members) in sccs.iter().enumerate() {
            for &m in members {
                comp[m.index()] = c;
            }
        }
        let mut value: Vec<Option<u64>> = vec![Some(0); sccs.len()];
        for (c, members) in sccs.iter().enumerate() {
            let mut best = Some(0u64);
            for &m in members {
                if let Some(&k) = self.known.get(&terms[m.index()]) {
                    best = best.map(|b| b.max(k));
                }
                for e in graph.edges(m) {
                    use petgraph::visit::EdgeRef;
                    let d = comp[e.target().index()];
                    let w = u64::from(*e.weight());
                    let via = if d == c {
                        if w > 0 {
                            None
                        } else {
                            continue;
                        }
                    } else {
                        value[d].map(|v| v + w)
                    };
                    best = match (best, via) {
                        (Some(b), Some(v)) => Some(b.max(v)),
                        _ => None,
                    };
                }
            }
            value[c] = best;
        }
        match value[comp[start.index()]] {
            None => DerivationHeight::Omega,
            Some(n) if truncated => DerivationHeight::AtLeast(n),
            Some(n) => {
                for (i, term) in terms.into_iter().enumerate() {
                    if let Some(v) = value[comp[i]] {
                        self.known.entry(term).or_insert(v);
                    }
                }
                DerivationHeight::Finite(n)
            }
        }
    }

    /// A longest derivation from `t`, when its height is finite and was found
    /// within budget.
    pub fn longest_derivation(&mut self, t: &Term, budget: usize) -> Option<Vec<Term>> {
        let mut left = self.dh(t, budget).finite()?;
        let mut trace = vec![t.clone()];
        let mut cur = t.clone();
        while left > 0 {
            let (next, cost) = self
                .relation
                .successors(&cur)
                .into_iter()
                .find(|(s, c)| self.known.get(s).is_some_and(|&v| v + u64::from(*c) == left))?;
            left -= u64::from(cost);
            trace.push(next.clone());
            cur = next;
        }
        Some(trace)
    }
}

pub fn dh(t: &Term, strategy: Strategy, trs: &Trs, budget: usize) -> DerivationHeight {
    DhOracle::new(trs, strategy).dh(t, budget)
}

pub fn dh_relative(t: &Term, rel: &RelativeTrs, budget: usize) -> DerivationHeight {
    DhOracle::relative(rel).dh(t, budget)
}

/// Follows one arbitrary maximal derivation. This equals the derivation height
/// only when all maximal derivations from `t` have the same length, e.g. when
/// the relation is uniformly confluent.
pub fn dh_by_descent(t: &Term, strategy: Strategy, trs: &Trs, max_steps: u64) -> DerivationHeight {
    let mut cur = t.clone();
    for n in 0..max_steps {
        match first_successor(&cur, strategy, trs) {
            Some(next) => cur = next,
            None => return DerivationHeight::Finite(n),
        }
    }
    if first_successor(&cur, strategy, trs).is_none() {
        DerivationHeight::Finite(max_steps)
    } else {
        DerivationHeight::AtLeast(max_steps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExceeded;

/// Memoized sets of innermost-reachable normal forms.
///
/// Arguments of a term are normalised independently, so the normal forms of
/// `f(a1,...,an)` are those of `f(n1,...,nn)` over all choices of normal forms
/// `ni` of `ai`. Cyclic reductions fall back to exploring the reachable set.
pub struct NormalForms<'a> {
    trs: &'a Trs,
    budget: usize,
    memo: HashMap<Term, Vec<Term>>,
    active: HashSet<Term>,
}

enum NfError {
    Cycle,
    Budget,
}

impl<'a> NormalForms<'a> {
    /// `budget` bounds the number of terms explored per fallback search.
    pub fn new(trs: &'a Trs, budget: usize) -> Self {
        NormalForms {
            trs,
            budget,
            memo: HashMap::new(),
            active: HashSet::new(),
        }
    }

    pub fn trs(&self) -> &'a Trs {
        self.trs
    }

    /// All normal forms `u` with `t →i* u`, sorted.
    pub fn of(&mut self, t: &Term) -> Result<Vec<Term>, BudgetExceeded> {
        match self.recursive(t) {
            Ok(v) => Ok(v),
            Err(NfError::Budget) => Err(BudgetExceeded),
            Err(NfError::Cycle) => {
                self.active.clear();
                let v = self.explore(t)?;
                self.memo.insert(t.clone(), v.clone());
                Ok(v)
            }
        }
    }

    fn recursive(&mut self, t: &Term) -> Result<Vec<Term>, NfError> {
        if let Some(v) = self.memo.get(t) {
            return Ok(v.clone());
        }
        let Term::App(f, args) = t else {
            return Ok(vec![t.clone()]);
        };
        if !self.active.insert(t.clone()) {
            return Err(NfError::Cycle);
        }
        let result = self.recursive_inner(*f, args);
        self.active.remove(t);
        let v = result?;
        self.memo.insert(t.clone(), v.clone());
        Ok(v)
    }

    fn recursive_inner(&mut self, f: crate::term::SymId, args: &[Term]) -> Result<Vec<Term>, NfError> {
        let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
        for a in args {
            let nfs = self.recursive(a)?;
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    nfs.iter().map(move |n| {
                        let mut c = c.clone();
                        c.push(n.clone());
                        c
                    })
                })
                .collect();
            if combos.len() > self.budget {
                return Err(NfError::Budget);
            }
        }
        let mut out = std::collections::BTreeSet::new();
        for c in combos {
            let top = Term::App(f, c);
            let contracta = root_contracta(&top, self.trs);
            if contracta.is_empty() {
                out.insert(top);
            } else {
                for (r, _) in contracta {
                    out.extend(self.recursive(&r)?);
                }
            }
            if out.len() > self.budget {
                return Err(NfError::Budget);
            }
        }
        Ok(out.into_iter().collect())
    }

    fn explore(&self, t: &Term) -> Result<Vec<Term>, BudgetExceeded> {
        let mut seen: HashSet<Term> = HashSet::from([t.clone()]);
        let mut stack = vec![t.clone()];
        let mut out = std::collections::BTreeSet::new();
        while let Some(u) = stack.pop() {
            let succ = step_innermost(&u, self.trs);
            if succ.is_empty() {
                out.insert(u);
                continue;
            }
            for s in succ {
                if seen.insert(s.clone()) {
                    if seen.len() > self.budget {
                        return Err(BudgetExceeded);
                    }
                    stack.push(s);
                }
            }
        }
        Ok(out.into_iter().collect())
    }
}

/// Map from size bound `n` to the supremum of heights over start terms of size
/// at most `n`.
pub type Curve = BTreeMap<usize, DerivationHeight>;

/// Builds a curve from start terms and a height function. Start terms larger
/// than `max_size` are ignored.
pub fn curve_over(
    starts: impl IntoIterator<Item = Term>,
    max_size: usize,
    mut height: impl FnMut(&Term) -> DerivationHeight,
) -> Curve {
    let mut per_size = vec![DerivationHeight::Finite(0); max_size + 1];
    for t in starts {
        let s = t.size();
        if s <= max_size {
            per_size[s] = per_size[s].sup(height(&t));
        }
    }
    let mut acc = DerivationHeight::Finite(0);
    (1..=max_size)
        .map(|n| {
            acc = acc.sup(per_size[n]);
            (n, acc)
        })
        .collect()
}

/// Empirical (parallel-)innermost runtime complexity over all ground basic
/// terms up to `max_size`.
pub fn irc_curve(trs: &Trs, strategy: Strategy, max_size: usize, budget: usize) -> Curve {
    let mut oracle = DhOracle::new(trs, strategy);
    curve_over(enumerate_basic_terms(trs, max_size), max_size, |t| oracle.dh(t, budget))
}

/// Relative innermost runtime complexity over ground basic terms of `S ∪ W`.
pub fn irc_curve_relative(rel: &RelativeTrs, max_size: usize, budget: usize) -> Curve {
    let mut oracle = DhOracle::relative(rel);
    curve_over(enumerate_basic_terms(rel.union(), max_size), max_size, |t| {
        oracle.dh(t, budget)
    })
}

/// Prints a derivation one term per line, with the innermost redexes of each
/// term that is rewritten further enclosed in `[ ]`.
pub fn format_trace(trace: &[Term], trs: &Trs, arrow: &str) -> String {
    let sig = trs.signature();
    let mut out = String::new();
    for (i, t) in trace.iter().enumerate() {
        let marked = if i + 1 < trace.len() {
            innermost_redexes(t, trs)
        } else {
            Vec::new()
        };
        let lead = if i == 0 {
            " ".repeat(arrow.chars().count())
        } else {
            arrow.to_string()
        };
        out.push_str(&lead);
        out.push(' ');
        write_marked(&mut out, sig, t, &marked, &mut Vec::new());
        out.push('\n');
    }
    out
}

fn write_marked(out: &mut String, sig: &Signature, t: &Term, marked: &[Position], path: &mut Vec<u32>) {
    if marked.iter().any(|p| p.0 == *path) {
        out.push('[');
        out.push_str(&sig.display(t).to_string());
        out.push(']');
        return;
    }
    match t {
        Term::Var(_) => out.push_str(&sig.display(t).to_string()),
        Term::App(f, args) => {
            out.push_str(sig.name(*f));
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    path.push(i as u32 + 1);
                    write_marked(out, sig, a, marked, path);
                    path.pop();
                }
                out.push(')');
            }
        }
    }
}
