//! Rewrite rules, term rewrite systems and relative systems.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::term::{match_into, Signature, Substitution, SymId, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("left-hand side `{0}` is a variable")]
    VariableLhs(String),
    #[error("variable `{var}` of the right-hand side does not occur in the left-hand side of `{rule}`")]
    ExtraVariable { var: String, rule: String },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    pub fn new(lhs: Term, rhs: Term, sig: &Signature) -> Result<Rule, RuleError> {
        if lhs.is_var() {
            return Err(RuleError::VariableLhs(sig.display(&lhs).to_string()));
        }
        let lv = lhs.vars();
        if let Some(v) = rhs.vars().into_iter().find(|v| !lv.contains(v)) {
            let rule = Rule { lhs, rhs };
            return Err(RuleError::ExtraVariable {
                var: sig.var_name(v),
                rule: rule.display(sig).to_string(),
            });
        }
        Ok(Rule { lhs, rhs })
    }

    /// Builds a rule without validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(lhs: Term, rhs: Term) -> Rule {
        debug_assert!(!lhs.is_var());
        Rule { lhs, rhs }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> RuleDisplay<'a> {
        RuleDisplay {
            rule: self,
            sig,
            arrow: "->",
        }
    }

    pub fn vars_ordered(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.lhs.vars_ordered(&mut out);
        self.rhs.vars_ordered(&mut out);
        out
    }

    pub fn map_vars(&self, f: &impl Fn(Var) -> Var) -> Rule {
        Rule {
            lhs: self.lhs.map_vars(f),
            rhs: self.rhs.map_vars(f),
        }
    }

    /// True iff the two rules are equal up to a bijective variable renaming.
    pub fn is_variant_of(&self, other: &Rule) -> bool {
        fn one_way(a: &Rule, b: &Rule) -> bool {
            let mut sigma = Substitution::new();
            if !match_into(&a.lhs, &b.lhs, &mut sigma) || !match_into(&a.rhs, &b.rhs, &mut sigma) {
                return false;
            }
            let mut seen = BTreeSet::new();
            let injective = sigma.iter().all(|(_, t)| match t {
                Term::Var(v) => seen.insert(*v),
                Term::App(..) => false,
            });
            injective
        }
        one_way(self, other) && one_way(other, self)
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a Rule,
    sig: &'a Signature,
    arrow: &'static str,
}

impl RuleDisplay<'_> {
    pub fn weak(mut self) -> Self {
        self.arrow = "->=";
        self
    }
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.sig.display(&self.rule.lhs),
            self.arrow,
            self.sig.display(&self.rule.rhs)
        )
    }
}

/// Renames two rules apart: the first gets odd variable tags, the second even
/// ones, so `x` becomes `x0` in the first rule and `x1` in the second.
pub fn rename_apart(r1: &Rule, r2: &Rule) -> (Rule, Rule) {
    (rename_with_parity(r1, 1), rename_with_parity(r2, 2))
}

fn rename_with_parity(rule: &Rule, start: u32) -> Rule {
    let mut map: HashMap<Var, Var> = HashMap::new();
    let mut used: BTreeSet<Var> = BTreeSet::new();
    for v in rule.vars_ordered() {
        let mut cand = v.with_tag(start);
        while used.contains(&cand) {
            cand = cand.with_tag(cand.tag + 2);
        }
        used.insert(cand);
        map.insert(v, cand);
    }
    rule.map_vars(&|v| map[&v])
}

/// A term rewrite system over a signature.
///
/// `defined` holds the root symbols of left-hand sides; every other symbol of
/// the signature is a constructor.
#[derive(Clone, Debug)]
pub struct Trs {
    signature: Signature,
    rules: Vec<Rule>,
    defined: BTreeSet<SymId>,
    by_root: HashMap<SymId, Vec<usize>>,
    innermost: bool,
}

impl Trs {
    pub fn new(signature: Signature, rules: Vec<Rule>) -> Trs {
        let mut defined = BTreeSet::new();
        let mut by_root: HashMap<SymId, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            let f = r.lhs.root().expect("rule lhs is never a variable");
            defined.insert(f);
            by_root.entry(f).or_default().push(i);
        }
        Trs {
            signature,
            rules,
            defined,
            by_root,
            innermost: false,
        }
    }

    pub fn with_innermost_strategy(mut self, innermost: bool) -> Trs {
        self.innermost = innermost;
        self
    }

    /// Whether the input declared `(STRATEGY INNERMOST)`.
    pub fn innermost_strategy(&self) -> bool {
        self.innermost
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn defined(&self) -> &BTreeSet<SymId> {
        &self.defined
    }

    pub fn is_defined(&self, f: SymId) -> bool {
        self.defined.contains(&f)
    }

    pub fn constructors(&self) -> BTreeSet<SymId> {
        self.signature
            .symbol_ids()
            .filter(|f| !self.defined.contains(f))
            .collect()
    }

    /// Indices of rules whose left-hand side has root `f`.
    pub fn rules_for(&self, f: SymId) -> &[usize] {
        self.by_root.get(&f).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_constructor_term(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, args) => !self.is_defined(*f) && args.iter().all(|a| self.is_constructor_term(a)),
        }
    }

    /// `f(t1,...,tk)` with `f` defined and all `ti` constructor terms.
    pub fn is_basic(&self, t: &Term) -> bool {
        match t {
            Term::App(f, args) => self.is_defined(*f) && args.iter().all(|a| self.is_constructor_term(a)),
            Term::Var(_) => false,
        }
    }

    /// Positions of `t` whose root symbol is defined.
    pub fn pos_def(&self, t: &Term) -> Vec<crate::term::Position> {
        t.subterms()
            .into_iter()
            .filter(|(_, s)| s.root().is_some_and(|f| self.is_defined(f)))
            .map(|(p, _)| p)
            .collect()
    }

    /// Structural comparison by symbol and variable names, independent of
    /// interning order.
    pub fn same_rules_as(&self, other: &Trs) -> bool {
        let a: Vec<String> = self
            .rules
            .iter()
            .map(|r| r.display(&self.signature).to_string())
            .collect();
        let b: Vec<String> = other
            .rules
            .iter()
            .map(|r| r.display(&other.signature).to_string())
            .collect();
        a == b
    }
}

/// A relative system `S/W`: only steps with strict rules are counted.
#[derive(Clone, Debug)]
pub struct RelativeTrs {
    union: Trs,
    strict_len: usize,
}

impl RelativeTrs {
    pub fn new(signature: Signature, strict: Vec<Rule>, weak: Vec<Rule>) -> RelativeTrs {
        let strict_len = strict.len();
        let mut rules = strict;
        rules.extend(weak);
        RelativeTrs {
            union: Trs::new(signature, rules).with_innermost_strategy(true),
            strict_len,
        }
    }

    /// The union system `S ∪ W`; its first `strict().len()` rules are strict.
    pub fn union(&self) -> &Trs {
        &self.union
    }

    pub fn signature(&self) -> &Signature {
        self.union.signature()
    }

    pub fn strict(&self) -> &[Rule] {
        &self.union.rules()[..self.strict_len]
    }

    pub fn weak(&self) -> &[Rule] {
        &self.union.rules()[self.strict_len..]
    }

    pub fn is_strict_rule(&self, idx: usize) -> bool {
        idx < self.strict_len
    }

    pub fn same_rules_as(&self, other: &RelativeTrs) -> bool {
        self.strict_len == other.strict_len && self.union.same_rules_as(&other.union)
    }
}

/// Ground constructor terms grouped by size, built bottom-up.
pub(crate) fn constructor_terms_by_size(constructors: &[(SymId, usize)], max_size: usize) -> Vec<Vec<Term>> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max_size + 1];
    for s in 1..=max_size {
        let mut level = Vec::new();
        for &(c, arity) in constructors {
            for args in arg_tuples(&by_size, arity, s - 1) {
                level.push(Term::App(c, args));
            }
        }
        by_size[s] = level;
    }
    by_size
}

/// All argument tuples of `arity` terms whose sizes sum to exactly `total`.
pub(crate) fn arg_tuples(by_size: &[Vec<Term>], arity: usize, total: usize) -> Vec<Vec<Term>> {
    if arity == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(arity);
    fn go(
        by_size: &[Vec<Term>],
        remaining_args: usize,
        remaining_size: usize,
        cur: &mut Vec<Term>,
        out: &mut Vec<Vec<Term>>,
    ) {
        if remaining_args == 0 {
            if remaining_size == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // every later argument needs at least size 1
        let max_here = remaining_size.saturating_sub(remaining_args - 1);
        for s in 1..=max_here.min(by_size.len().saturating_sub(1)) {
            for t in &by_size[s] {
                cur.push(t.clone());
                go(by_size, remaining_args - 1, remaining_size - s, cur, out);
                cur.pop();
            }
        }
    }
    go(by_size, arity, total, &mut cur, &mut out);
    out
}

/// Every ground basic term of size at most `max_size`, each exactly once, in
/// nondecreasing size order.
pub fn enumerate_basic_terms(trs: &Trs, max_size: usize) -> impl Iterator<Item = Term> {
    let sig = trs.signature();
    let constructors: Vec<(SymId, usize)> = trs.constructors().into_iter().map(|c| (c, sig.arity(c))).collect();
    let defined: Vec<(SymId, usize)> = trs.defined().iter().map(|&f| (f, sig.arity(f))).collect();
    let by_size = constructor_terms_by_size(&constructors, max_size.saturating_sub(1));
    (1..=max_size).flat_map(move |s| {
        let mut level = Vec::new();
        for &(f, arity) in &defined {
            for args in arg_tuples(&by_size, arity, s - 1) {
                level.push(Term::App(f, args));
            }
        }
        level
    })
}
