//! Many-sorted typing of a TRS and sorted enumeration of basic terms.
//!
//! Every argument and result position of every symbol gets a sort slot; the
//! rules identify slots with each other. Unsorted enumeration quickly blows
//! up (e.g. `doubles(Cons(..))`), sorted enumeration keeps curves feasible
//! at larger sizes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;

use crate::rewrite::{curve_over, dh_by_descent, Curve, DerivationHeight, DhOracle, Strategy};
use crate::term::{SymId, Term, Var};
use crate::trs::Trs;

pub type SortId = usize;

#[derive(Clone, Debug)]
pub struct SortInference {
    /// Sort of `(f, i)`: argument `i < arity`, or the result for `i == arity`.
    slots: HashMap<(SymId, usize), SortId>,
}

impl SortInference {
    pub fn infer(trs: &Trs) -> SortInference {
        let sig = trs.signature();
        let mut index: HashMap<(SymId, usize), usize> = HashMap::new();
        for f in sig.symbol_ids() {
            for i in 0..=sig.arity(f) {
                let n = index.len();
                index.insert((f, i), n);
            }
        }
        let fixed = index.len();
        let var_slots: usize = trs.rules().iter().map(|r| r.vars_ordered().len()).sum();
        let mut uf = UnionFind::<usize>::new(fixed + var_slots);
        let mut next_var = fixed;
        for rule in trs.rules() {
            let mut vars: HashMap<Var, usize> = HashMap::new();
            for v in rule.vars_ordered() {
                vars.insert(v, next_var);
                next_var += 1;
            }
            let root = slot_of(&rule.lhs, &index, &vars, &mut uf);
            let rhs = slot_of(&rule.rhs, &index, &vars, &mut uf);
            uf.union(root, rhs);
        }
        let mut canon: BTreeMap<usize, SortId> = BTreeMap::new();
        let mut slots = HashMap::new();
        let mut keys: Vec<_> = index.into_iter().collect();
        keys.sort();
        for (key, i) in keys {
            let rep = uf.find(i);
            let n = canon.len();
            slots.insert(key, *canon.entry(rep).or_insert(n));
        }
        SortInference { slots }
    }

    pub fn result_sort(&self, f: SymId) -> SortId {
        let arity = self.slots.keys().filter(|(g, _)| *g == f).count() - 1;
        self.slots[&(f, arity)]
    }

    pub fn arg_sort(&self, f: SymId, i: usize) -> SortId {
        self.slots[&(f, i)]
    }
}

fn slot_of(
    t: &Term,
    index: &HashMap<(SymId, usize), usize>,
    vars: &HashMap<Var, usize>,
    uf: &mut UnionFind<usize>,
) -> usize {
    match t {
        Term::Var(v) => vars[v],
        Term::App(f, args) => {
            for (i, a) in args.iter().enumerate() {
                let s = slot_of(a, index, vars, uf);
                uf.union(s, index[&(*f, i)]);
            }
            index[&(*f, args.len())]
        }
    }
}

/// All well-sorted basic terms of size at most `max_size`, by size. Terms are
/// ground except for one variable per sort that has no constant.
pub fn sorted_basic_terms(trs: &Trs, max_size: usize) -> Vec<Term> {
    let sig = trs.signature();
    let sorts = SortInference::infer(trs);
    let constructors: Vec<SymId> = trs.constructors().into_iter().collect();
    // sorts needed as arguments of defined symbols, closed under constructor arguments
    let mut needed: BTreeSet<SortId> = BTreeSet::new();
    let mut stack: Vec<SortId> = trs
        .defined()
        .iter()
        .flat_map(|&f| (0..sig.arity(f)).map(move |i| (f, i)))
        .map(|(f, i)| sorts.arg_sort(f, i))
        .collect();
    while let Some(s) = stack.pop() {
        if needed.insert(s) {
            for &c in &constructors {
                if sorts.result_sort(c) == s {
                    stack.extend((0..sig.arity(c)).map(|i| sorts.arg_sort(c, i)));
                }
            }
        }
    }
    let mut table: BTreeMap<SortId, Vec<Vec<Term>>> = needed.iter().map(|&s| (s, vec![Vec::new(); max_size])).collect();
    // a sort without constants (e.g. only `s/1`) has no ground terms; a
    // variable stands in for an arbitrary normal-form value of that sort
    let base = sig.declared_vars().next().map_or(0, |v| v.name);
    for &s in &needed {
        let has_constant = constructors
            .iter()
            .any(|&c| sig.arity(c) == 0 && sorts.result_sort(c) == s);
        if !has_constant && max_size > 1 {
            table.get_mut(&s).unwrap()[1].push(Term::Var(Var {
                name: base,
                tag: s as u32 + 1,
            }));
        }
    }
    for size in 1..max_size {
        for &c in &constructors {
            let s = sorts.result_sort(c);
            if !needed.contains(&s) {
                continue;
            }
            let arg_sorts: Vec<SortId> = (0..sig.arity(c)).map(|i| sorts.arg_sort(c, i)).collect();
            let terms: Vec<Term> = sorted_tuples(&table, &arg_sorts, size - 1)
                .into_iter()
                .map(|args| Term::App(c, args))
                .collect();
            table.get_mut(&s).unwrap()[size].extend(terms);
        }
    }
    let mut out = Vec::new();
    for size in 1..=max_size {
        for &f in trs.defined() {
            let arg_sorts: Vec<SortId> = (0..sig.arity(f)).map(|i| sorts.arg_sort(f, i)).collect();
            out.extend(
                sorted_tuples(&table, &arg_sorts, size - 1)
                    .into_iter()
                    .map(|args| Term::App(f, args)),
            );
        }
    }
    out
}

fn sorted_tuples(table: &BTreeMap<SortId, Vec<Vec<Term>>>, sorts: &[SortId], total: usize) -> Vec<Vec<Term>> {
    fn go(
        table: &BTreeMap<SortId, Vec<Vec<Term>>>,
        sorts: &[SortId],
        remaining: usize,
        cur: &mut Vec<Term>,
        out: &mut Vec<Vec<Term>>,
    ) {
        let Some((&s, rest)) = sorts.split_first() else {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        };
        let by_size = &table[&s];
        let max_here = remaining
            .saturating_sub(rest.len())
            .min(by_size.len().saturating_sub(1));
        for (size, terms) in by_size.iter().enumerate().take(max_here + 1).skip(1) {
            for t in terms {
                cur.push(t.clone());
                go(table, rest, remaining - size, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(table, sorts, total, &mut Vec::new(), &mut out);
    out
}

/// How derivation heights are measured for a curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightMethod {
    /// Exhaustive longest-path search with a budget on expanded terms.
    Exhaustive { budget: usize },
    /// Length of one maximal derivation; exact only for uniformly confluent
    /// relations (e.g. non-overlapping systems).
    Descent { max_steps: u64 },
}

/// (Parallel-)innermost runtime complexity over well-sorted ground basic terms.
pub fn sorted_irc_curve(trs: &Trs, strategy: Strategy, max_size: usize, method: HeightMethod) -> Curve {
    let starts = sorted_basic_terms(trs, max_size);
    match method {
        HeightMethod::Exhaustive { budget } => {
            let mut oracle = DhOracle::new(trs, strategy);
            curve_over(starts, max_size, |t| oracle.dh(t, budget))
        }
        HeightMethod::Descent { max_steps } => {
            curve_over(starts, max_size, |t| dh_by_descent(t, strategy, trs, max_steps))
        }
    }
}

/// Least-squares slope of `log value` against `log n` over the given sizes.
/// `None` if a value is not a positive finite height.
pub fn log_log_slope(curve: &Curve, sizes: &[usize]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = sizes
        .iter()
        .map(|n| match curve.get(n)? {
            DerivationHeight::Finite(v) if *v > 0 => Some(((*n as f64).ln(), (*v as f64).ln())),
            _ => None,
        })
        .collect::<Option<_>>()?;
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (den > 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rewrite::irc_curve;
    use crate::trs::enumerate_basic_terms;

    #[test]
    fn doubles_sorts() {
        let trs = fixtures::doubles();
        let sig = trs.signature();
        let s = SortInference::infer(&trs);
        let id = |n| sig.lookup(n).unwrap();
        let nat = s.result_sort(id("Zero"));
        let list = s.result_sort(id("Nil"));
        assert_ne!(nat, list);
        assert_eq!(s.result_sort(id("S")), nat);
        assert_eq!(s.result_sort(id("Cons")), list);
        assert_eq!(s.arg_sort(id("Cons"), 0), nat);
        assert_eq!(s.arg_sort(id("Cons"), 1), list);
        assert_eq!(s.arg_sort(id("doubles"), 0), nat);
        assert_eq!(s.result_sort(id("doubles")), list);
        assert_eq!(s.result_sort(id("d")), nat);
    }

    #[test]
    fn sorted_terms_are_a_subset() {
        for (_, trs) in fixtures::all() {
            let all: BTreeSet<Term> = enumerate_basic_terms(&trs, 6).collect();
            let sorted = sorted_basic_terms(&trs, 6);
            assert!(sorted.iter().filter(|t| t.is_ground()).all(|t| all.contains(t)));
        }
        // doubles(x) and d(x) with x = S^k(Zero)
        assert_eq!(sorted_basic_terms(&fixtures::doubles(), 6).len(), 10);
    }

    #[test]
    fn variable_for_sort_without_constants() {
        let trs = fixtures::recursion(1);
        let terms = sorted_basic_terms(&trs, 4);
        let sig = trs.signature();
        let shown: Vec<String> = terms.iter().map(|t| sig.display(t).to_string()).collect();
        assert!(shown.contains(&"f1(s(x0))".to_string()), "{shown:?}");
        assert!(terms.iter().all(|t| t.vars().len() <= 1));
        // f1(s^6(x)) -> g1(..) then six g1 steps and six f0 steps
        let curve = sorted_irc_curve(&trs, Strategy::Innermost, 8, HeightMethod::Descent { max_steps: 1000 });
        assert_eq!(curve[&8], DerivationHeight::Finite(13));
    }

    #[test]
    fn descent_matches_exhaustive_on_doubles() {
        let trs = fixtures::doubles();
        for strategy in [Strategy::Innermost, Strategy::ParallelInnermost] {
            let a = sorted_irc_curve(&trs, strategy, 8, HeightMethod::Exhaustive { budget: 100_000 });
            let b = sorted_irc_curve(&trs, strategy, 8, HeightMethod::Descent { max_steps: 10_000 });
            assert_eq!(a, b);
            // sorted terms realise the unsorted supremum here
            let unsorted = irc_curve(&trs, strategy, 7, 100_000);
            assert!(unsorted.iter().all(|(n, h)| a[n] == *h));
        }
    }

    #[test]
    fn doubles_curve_values() {
        let trs = fixtures::doubles();
        let m = HeightMethod::Descent { max_steps: 100_000 };
        let irc = sorted_irc_curve(&trs, Strategy::Innermost, 16, m);
        let pirc = sorted_irc_curve(&trs, Strategy::ParallelInnermost, 16, m);
        // doubles(S^k(Zero)) has size k + 2
        for (n, expected) in [(4, 8), (8, 34), (16, 134)] {
            assert_eq!(irc[&n], DerivationHeight::Finite(expected));
            assert_eq!(pirc[&n], DerivationHeight::Finite(n as u64));
        }
    }

    #[test]
    fn slopes() {
        let c: Curve = (1..=8).map(|n| (n, DerivationHeight::Finite((n * n) as u64))).collect();
        assert!((log_log_slope(&c, &[2, 4, 8]).unwrap() - 2.0).abs() < 1e-9);
        let mut c2 = c.clone();
        c2.insert(4, DerivationHeight::Omega);
        assert_eq!(log_log_slope(&c2, &[2, 4, 8]), None);
    }
}
