//! Dependency tuples, parallel dependency tuples and DT problems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::term::{Position, Signature, SymId, SymbolKind, Term};
use crate::trs::{RelativeTrs, Rule, Trs};

/// The signature of a TRS extended with `f#` for every defined `f` and the
/// compound symbols `Com_k`.
#[derive(Clone, Debug)]
pub struct DtSignature {
    sig: Signature,
    sharp: BTreeMap<SymId, SymId>,
    com: BTreeMap<usize, SymId>,
}

impl DtSignature {
    pub fn new(trs: &Trs) -> DtSignature {
        let mut sig = trs.signature().clone();
        let sharp = trs
            .defined()
            .iter()
            .map(|&f| {
                let name = format!("{}#", sig.name(f));
                let arity = sig.arity(f);
                (f, sig.fresh_symbol(&name, arity, SymbolKind::Sharp(f)))
            })
            .collect();
        DtSignature {
            sig,
            sharp,
            com: BTreeMap::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn sharp_of(&self, f: SymId) -> Option<SymId> {
        self.sharp.get(&f).copied()
    }

    pub fn sharp_symbols(&self) -> impl Iterator<Item = (SymId, SymId)> + '_ {
        self.sharp.iter().map(|(&f, &s)| (f, s))
    }

    pub fn is_sharp(&self, s: SymId) -> bool {
        matches!(self.sig.kind(s), SymbolKind::Sharp(_))
    }

    pub fn com(&mut self, k: usize) -> SymId {
        if let Some(&c) = self.com.get(&k) {
            return c;
        }
        let c = self.sig.fresh_symbol(&format!("Com_{k}"), k, SymbolKind::Compound);
        self.com.insert(k, c);
        c
    }

    pub fn com_symbols(&self) -> impl Iterator<Item = (usize, SymId)> + '_ {
        self.com.iter().map(|(&k, &c)| (k, c))
    }

    pub fn is_com(&self, s: SymId) -> bool {
        self.com.values().any(|&c| c == s)
    }

    /// `t♯`: the root replaced by its sharp twin if it is defined.
    pub fn sharp(&self, t: &Term) -> Term {
        match t {
            Term::App(f, args) => match self.sharp.get(f) {
                Some(&s) => Term::App(s, args.clone()),
                None => t.clone(),
            },
            Term::Var(_) => t.clone(),
        }
    }
}

/// `lhs → Com_k(rhs[0], ..., rhs[k-1])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DependencyTuple {
    pub lhs: Term,
    pub rhs: Vec<Term>,
    /// Index of the originating rule.
    pub origin: usize,
}

impl DependencyTuple {
    pub fn to_rule(&self, sig: &mut DtSignature) -> Rule {
        let com = sig.com(self.rhs.len());
        Rule::new_unchecked(self.lhs.clone(), Term::App(com, self.rhs.clone()))
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DtDisplay { dt: self, sig }
    }
}

struct DtDisplay<'a> {
    dt: &'a DependencyTuple,
    sig: &'a Signature,
}

impl fmt::Display for DtDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.dt.rhs.len();
        let com = self
            .sig
            .lookup(&format!("Com_{k}"))
            .map(|c| self.sig.name(c).to_string())
            .unwrap_or_else(|| format!("Com_{k}"));
        write!(f, "{} -> {}", self.sig.display(&self.dt.lhs), com)?;
        if k > 0 {
            write!(f, "(")?;
            for (i, t) in self.dt.rhs.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.sig.display(t))?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Maximal structural dependency chains of `t`: one chain per defined
/// position without defined positions below it, listing that position and
/// then its defined ancestors, deepest first. Chains are ordered by their
/// first position. `[[]]` if `t` has no defined position.
pub fn msdc(t: &Term, trs: &Trs) -> Vec<Vec<Position>> {
    let defs = trs.pos_def(t);
    if defs.is_empty() {
        return vec![Vec::new()];
    }
    let mut leaves: Vec<&Position> = defs.iter().filter(|p| !defs.iter().any(|q| q.is_below(p))).collect();
    leaves.sort();
    leaves
        .into_iter()
        .map(|leaf| {
            let mut chain: Vec<Position> = defs
                .iter()
                .filter(|q| *q == leaf || leaf.is_below(q))
                .cloned()
                .collect();
            chain.sort_by_key(|p| std::cmp::Reverse(p.len()));
            chain
        })
        .collect()
}

fn tuple_for(rule: &Rule, origin: usize, positions: &[Position], sig: &DtSignature) -> DependencyTuple {
    DependencyTuple {
        lhs: sig.sharp(&rule.lhs),
        rhs: positions
            .iter()
            .map(|p| sig.sharp(rule.rhs.subterm_at(p).expect("position from rhs")))
            .collect(),
        origin,
    }
}

/// The dependency tuple of a rule; children follow the deepest-first total
/// order on positions.
pub fn dt_of_rule(rule: &Rule, origin: usize, trs: &Trs, sig: &DtSignature) -> DependencyTuple {
    let mut defs = trs.pos_def(&rule.rhs);
    defs.sort_by(Position::dt_order);
    tuple_for(rule, origin, &defs, sig)
}

/// One parallel dependency tuple per maximal structural dependency chain.
pub fn pdts_of_rule(rule: &Rule, origin: usize, trs: &Trs, sig: &DtSignature) -> Vec<DependencyTuple> {
    msdc(&rule.rhs, trs)
        .iter()
        .map(|chain| tuple_for(rule, origin, chain, sig))
        .collect()
}

/// True iff every right-hand side has exactly one maximal chain.
pub fn no_parallelism(trs: &Trs) -> bool {
    trs.rules().iter().all(|r| msdc(&r.rhs, trs).len() == 1)
}

/// A DT problem `⟨D, S, R⟩`, with `S` given as indices into `D`.
#[derive(Clone, Debug)]
pub struct DtProblem {
    sig: DtSignature,
    trs: Trs,
    dts: Vec<DependencyTuple>,
    strict: BTreeSet<usize>,
}

impl DtProblem {
    pub fn new(trs: &Trs, sig: DtSignature, dts: Vec<DependencyTuple>, strict: BTreeSet<usize>) -> DtProblem {
        assert!(strict.iter().all(|&i| i < dts.len()), "S must be a subset of D");
        let mut sig = sig;
        for dt in &dts {
            sig.com(dt.rhs.len());
        }
        DtProblem {
            sig,
            trs: trs.clone(),
            dts,
            strict,
        }
    }

    pub fn dt_signature(&self) -> &DtSignature {
        &self.sig
    }

    pub fn signature(&self) -> &Signature {
        &self.sig.sig
    }

    pub fn trs(&self) -> &Trs {
        &self.trs
    }

    pub fn dts(&self) -> &[DependencyTuple] {
        &self.dts
    }

    pub fn strict(&self) -> &BTreeSet<usize> {
        &self.strict
    }

    pub fn is_strict(&self, i: usize) -> bool {
        self.strict.contains(&i)
    }

    pub fn is_solved(&self) -> bool {
        self.strict.is_empty()
    }

    pub fn with_strict(&self, strict: BTreeSet<usize>) -> DtProblem {
        assert!(strict.iter().all(|&i| i < self.dts.len()));
        DtProblem { strict, ..self.clone() }
    }

    /// `D` as rewrite rules over the extended signature.
    pub fn dt_rules(&self) -> Vec<Rule> {
        let mut sig = self.sig.clone();
        self.dts.iter().map(|d| d.to_rule(&mut sig)).collect()
    }

    /// `D ∪ R` as one system over the extended signature, DTs first.
    pub fn union_trs(&self) -> Trs {
        let mut rules = self.dt_rules();
        rules.extend(self.trs.rules().iter().cloned());
        Trs::new(self.sig.sig.clone(), rules)
    }

    /// Prints `D` with counted tuples first marked `S`.
    pub fn display(&self) -> String {
        let mut out = String::new();
        for (i, dt) in self.dts.iter().enumerate() {
            let mark = if self.is_strict(i) { "S" } else { " " };
            out.push_str(&format!("{mark} {}\n", dt.display(self.signature())));
        }
        out
    }
}

/// `⟨DT(R), DT(R), R⟩`.
pub fn canonical_problem(trs: &Trs) -> DtProblem {
    let sig = DtSignature::new(trs);
    let dts: Vec<_> = trs
        .rules()
        .iter()
        .enumerate()
        .map(|(i, r)| dt_of_rule(r, i, trs, &sig))
        .collect();
    let all = (0..dts.len()).collect();
    DtProblem::new(trs, sig, dts, all)
}

/// `⟨DT∥(R), DT∥(R), R⟩`.
pub fn canonical_parallel_problem(trs: &Trs) -> DtProblem {
    let sig = DtSignature::new(trs);
    let dts: Vec<_> = trs
        .rules()
        .iter()
        .enumerate()
        .flat_map(|(i, r)| pdts_of_rule(r, i, trs, &sig))
        .collect();
    let all = (0..dts.len()).collect();
    DtProblem::new(trs, sig, dts, all)
}

/// The relative system `S / ((D \ S) ∪ R)`.
pub fn detup(p: &DtProblem) -> RelativeTrs {
    let rules = p.dt_rules();
    let mut strict = Vec::new();
    let mut weak = Vec::new();
    for (i, r) in rules.into_iter().enumerate() {
        if p.is_strict(i) {
            strict.push(r);
        } else {
            weak.push(r);
        }
    }
    weak.extend(p.trs().rules().iter().cloned());
    RelativeTrs::new(p.signature().clone(), strict, weak)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sort {
    Base,
    Dt,
}

/// The two-sort typing of the extended signature: plain symbols are
/// `base × ... × base → base`, sharp symbols `base × ... × base → dt` and
/// `Com_k` is `dt × ... × dt → dt`.
#[derive(Clone, Debug)]
pub struct SortAssignment {
    sig: Signature,
}

impl SortAssignment {
    pub fn for_problem(p: &DtProblem) -> SortAssignment {
        SortAssignment {
            sig: p.signature().clone(),
        }
    }

    /// `(argument sort, result sort)` of a symbol.
    pub fn profile(&self, f: SymId) -> (Sort, Sort) {
        match self.sig.kind(f) {
            SymbolKind::Plain => (Sort::Base, Sort::Base),
            SymbolKind::Sharp(_) => (Sort::Base, Sort::Dt),
            SymbolKind::Compound => (Sort::Dt, Sort::Dt),
        }
    }

    /// The sort of `t` if it is well typed. Variables are of sort `base`.
    pub fn sort_of(&self, t: &Term) -> Option<Sort> {
        match t {
            Term::Var(_) => Some(Sort::Base),
            Term::App(f, args) => {
                let (arg, res) = self.profile(*f);
                args.iter().all(|a| self.sort_of(a) == Some(arg)).then_some(res)
            }
        }
    }

    pub fn is_well_typed(&self, t: &Term) -> bool {
        self.sort_of(t).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tpdb::{parse_term, parse_trs};

    fn show_dts(p: &DtProblem) -> Vec<String> {
        p.dts().iter().map(|d| d.display(p.signature()).to_string()).collect()
    }

    #[test]
    fn sharp_terms() {
        let trs = fixtures::size();
        let sig = DtSignature::new(&trs);
        let t = parse_term("size(Nil)", trs.signature()).unwrap();
        assert_eq!(sig.signature().display(&sig.sharp(&t)).to_string(), "size#(Nil)");
        let z = parse_term("Zero", trs.signature()).unwrap();
        assert_eq!(sig.sharp(&z), z);
        let x = parse_term("x", trs.signature()).unwrap();
        assert_eq!(sig.sharp(&x), x);
    }

    #[test]
    fn msdc_examples() {
        let trs = fixtures::size();
        let show = |t: &str| -> Vec<Vec<String>> {
            let t = parse_term(t, trs.signature()).unwrap();
            msdc(&t, &trs)
                .into_iter()
                .map(|c| c.iter().map(|p| p.to_string()).collect())
                .collect()
        };
        assert_eq!(
            show("S(plus(size(Nil),plus(size(x),Zero)))"),
            vec![vec!["11", "1"], vec!["121", "12", "1"]]
        );
        assert_eq!(show("Zero"), vec![Vec::<String>::new()]);
        assert_eq!(show("S(plus(size(l),size(r)))"), vec![vec!["11", "1"], vec!["12", "1"]]);
        let t = parse_term("S(plus(size(Nil),plus(size(x),Zero)))", trs.signature()).unwrap();
        let defs: Vec<String> = trs.pos_def(&t).iter().map(|p| p.to_string()).collect();
        assert_eq!(defs, vec!["1", "11", "12", "121"]);
    }

    #[test]
    fn size_tuples() {
        let trs = fixtures::size();
        assert_eq!(
            show_dts(&canonical_problem(&trs)),
            vec![
                "plus#(Zero,y) -> Com_0",
                "plus#(S(x),y) -> Com_1(plus#(x,y))",
                "size#(Nil) -> Com_0",
                "size#(Tree(v,l,r)) -> Com_3(size#(l),size#(r),plus#(size(l),size(r)))",
            ]
        );
        assert_eq!(
            show_dts(&canonical_parallel_problem(&trs)),
            vec![
                "plus#(Zero,y) -> Com_0",
                "plus#(S(x),y) -> Com_1(plus#(x,y))",
                "size#(Nil) -> Com_0",
                "size#(Tree(v,l,r)) -> Com_2(size#(l),plus#(size(l),size(r)))",
                "size#(Tree(v,l,r)) -> Com_2(size#(r),plus#(size(l),size(r)))",
            ]
        );
        assert!(!no_parallelism(&trs));
    }

    #[test]
    fn doubles_and_mod_tuples() {
        let d = canonical_parallel_problem(&fixtures::doubles());
        assert_eq!(
            show_dts(&d),
            vec![
                "doubles#(Zero) -> Com_0",
                "doubles#(S(x)) -> Com_1(d#(S(x)))",
                "doubles#(S(x)) -> Com_1(doubles#(x))",
                "d#(Zero) -> Com_0",
                "d#(S(x)) -> Com_1(d#(x))",
            ]
        );
        assert!(!no_parallelism(&fixtures::doubles()));
        let m = canonical_parallel_problem(&fixtures::modulo());
        let dts = show_dts(&m);
        assert_eq!(dts.len(), 11);
        assert!(
            dts.contains(&"mod#(s(x),s(y)) -> Com_2(leq#(y,x),if#(leq(y,x),mod(-(s(x),s(y)),s(y)),s(x)))".to_string())
        );
        assert!(dts.contains(
            &"mod#(s(x),s(y)) -> Com_3(-#(s(x),s(y)),mod#(-(s(x),s(y)),s(y)),if#(leq(y,x),mod(-(s(x),s(y)),s(y)),s(x)))"
                .to_string()
        ));
    }

    #[test]
    fn plus_only_has_no_parallelism() {
        assert!(no_parallelism(&fixtures::plus_only()));
        let trs = parse_trs("(VAR)(RULES)").unwrap();
        assert!(no_parallelism(&trs));
        assert_eq!(canonical_parallel_problem(&trs).dts().len(), 0);
    }

    #[test]
    fn detup_partitions() {
        let trs = fixtures::size();
        let p = canonical_parallel_problem(&trs);
        let rel = detup(&p);
        assert_eq!((rel.strict().len(), rel.weak().len()), (5, 4));
        let solved = p.with_strict(BTreeSet::new());
        let rel = detup(&solved);
        assert_eq!((rel.strict().len(), rel.weak().len()), (0, 9));
        let m = detup(&canonical_parallel_problem(&fixtures::modulo()));
        assert_eq!((m.strict().len(), m.weak().len()), (11, 10));
    }

    #[test]
    fn typing() {
        let trs = fixtures::size();
        let p = canonical_parallel_problem(&trs);
        let theta = SortAssignment::for_problem(&p);
        let sig = p.signature();
        let parse = |s: &str| parse_term(s, sig).unwrap();
        assert_eq!(theta.sort_of(&parse("size#(Nil)")), Some(Sort::Dt));
        assert_eq!(theta.sort_of(&parse("Com_1(size(Nil))")), None);
        assert_eq!(theta.sort_of(&parse("size(Nil)")), Some(Sort::Base));
        assert_eq!(
            theta.sort_of(&parse("Com_2(size#(Nil),plus#(Zero,Zero))")),
            Some(Sort::Dt)
        );
        assert_eq!(theta.sort_of(&parse("size(size#(Nil))")), None);
    }

    #[test]
    fn pdt_count_matches_chains() {
        for trs in fixtures::all().into_iter().map(|(_, t)| t) {
            let sig = DtSignature::new(&trs);
            for (i, r) in trs.rules().iter().enumerate() {
                let chains = msdc(&r.rhs, &trs);
                assert_eq!(pdts_of_rule(r, i, &trs, &sig).len(), chains.len());
                let covered: BTreeSet<Position> = chains.into_iter().flatten().collect();
                let defs: BTreeSet<Position> = trs.pos_def(&r.rhs).into_iter().collect();
                assert_eq!(covered, defs);
            }
        }
    }
}
