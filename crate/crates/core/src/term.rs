//! Terms, positions, substitutions, matching and unification.
//!
//! Symbols and variables are interned in a [`Signature`]; a [`Term`] only
//! carries the small integer ids, so equality and hashing never touch strings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SymId(pub u32);

/// A variable: an interned base name plus a renaming tag.
///
/// Variables read from input files have tag 0. Renaming apart bumps the tag,
/// so no signature mutation is needed to produce fresh variables.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub name: u32,
    pub tag: u32,
}

impl Var {
    pub fn with_tag(self, tag: u32) -> Var {
        Var { name: self.name, tag }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum SymbolKind {
    Plain,
    /// `f#` for a defined symbol `f`.
    Sharp(SymId),
    /// `Com_k`, interpreted as the sum of its arguments.
    Compound,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
    pub kind: SymbolKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{name}` used with arity {found} but previously with arity {expected}")]
    ArityConflict {
        name: String,
        expected: usize,
        found: usize,
    },
}

/// Symbol and variable name tables.
#[derive(Clone, Default, Debug)]
pub struct Signature {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymId>,
    var_names: Vec<String>,
    var_by_name: HashMap<String, u32>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern_symbol(&mut self, name: &str, arity: usize, kind: SymbolKind) -> Result<SymId, SignatureError> {
        if let Some(&id) = self.by_name.get(name) {
            let expected = self.symbols[id.0 as usize].arity;
            if expected != arity {
                return Err(SignatureError::ArityConflict {
                    name: name.to_string(),
                    expected,
                    found: arity,
                });
            }
            return Ok(id);
        }
        let id = SymId(self.symbols.len() as u32);
        self.symbols.push(Symbol {
            name: name.to_string(),
            arity,
            kind,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    /// Picks `base`, or `base'`, `base''`, ... if the name is taken.
    pub fn fresh_symbol(&mut self, base: &str, arity: usize, kind: SymbolKind) -> SymId {
        let mut name = base.to_string();
        while self.by_name.contains_key(&name) {
            name.push('\'');
        }
        self.intern_symbol(&name, arity, kind)
            .expect("fresh name cannot conflict")
    }

    pub fn lookup(&self, name: &str) -> Option<SymId> {
        self.by_name.get(name).copied()
    }

    pub fn symbol(&self, id: SymId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    pub fn name(&self, id: SymId) -> &str {
        &self.symbols[id.0 as usize].name
    }

    pub fn arity(&self, id: SymId) -> usize {
        self.symbols[id.0 as usize].arity
    }

    pub fn kind(&self, id: SymId) -> SymbolKind {
        self.symbols[id.0 as usize].kind
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol_ids(&self) -> impl Iterator<Item = SymId> + '_ {
        (0..self.symbols.len() as u32).map(SymId)
    }

    pub fn intern_var(&mut self, name: &str) -> Var {
        let idx = match self.var_by_name.get(name) {
            Some(&i) => i,
            None => {
                let i = self.var_names.len() as u32;
                self.var_names.push(name.to_string());
                self.var_by_name.insert(name.to_string(), i);
                i
            }
        };
        Var { name: idx, tag: 0 }
    }

    pub fn lookup_var(&self, name: &str) -> Option<Var> {
        self.var_by_name.get(name).map(|&name| Var { name, tag: 0 })
    }

    /// Declared variables, in declaration order.
    pub fn declared_vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.var_names.len() as u32).map(|name| Var { name, tag: 0 })
    }

    pub fn var_name(&self, v: Var) -> String {
        let base = self.var_names.get(v.name as usize).map(String::as_str).unwrap_or("_");
        if v.tag == 0 {
            base.to_string()
        } else {
            format!("{}{}", base, v.tag - 1)
        }
    }

    pub fn display<'a>(&'a self, term: &'a Term) -> TermDisplay<'a> {
        TermDisplay { sig: self, term }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    App(SymId, Vec<Term>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("position {0} does not exist in term")]
    InvalidPosition(Position),
}

impl Term {
    pub fn app(f: SymId, args: Vec<Term>) -> Term {
        Term::App(f, args)
    }

    pub fn constant(f: SymId) -> Term {
        Term::App(f, Vec::new())
    }

    pub fn root(&self) -> Option<SymId> {
        match self {
            Term::App(f, _) => Some(*f),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// All positions in pre-order (root first, children left to right).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn go(t: &Term, path: &mut Vec<u32>, out: &mut Vec<Position>) {
            out.push(Position(path.clone()));
            for (i, a) in t.args().iter().enumerate() {
                path.push(i as u32 + 1);
                go(a, path, out);
                path.pop();
            }
        }
        go(self, &mut path, &mut out);
        out
    }

    /// Pre-order traversal yielding every subterm with its position.
    pub fn subterms(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn go<'a>(t: &'a Term, path: &mut Vec<u32>, out: &mut Vec<(Position, &'a Term)>) {
            out.push((Position(path.clone()), t));
            for (i, a) in t.args().iter().enumerate() {
                path.push(i as u32 + 1);
                go(a, path, out);
                path.pop();
            }
        }
        go(self, &mut path, &mut out);
        out
    }

    pub fn subterm_at(&self, pos: &Position) -> Result<&Term, TermError> {
        let mut t = self;
        for &i in &pos.0 {
            t = t
                .args()
                .get((i as usize).wrapping_sub(1))
                .ok_or_else(|| TermError::InvalidPosition(pos.clone()))?;
        }
        Ok(t)
    }

    pub fn replace_at(&self, pos: &Position, s: Term) -> Result<Term, TermError> {
        fn go(t: &Term, path: &[u32], s: Term) -> Option<Term> {
            match path.split_first() {
                None => Some(s),
                Some((&i, rest)) => match t {
                    Term::App(f, args) => {
                        let k = (i as usize).checked_sub(1)?;
                        let child = args.get(k)?;
                        let mut new_args = args.clone();
                        new_args[k] = go(child, rest, s)?;
                        Some(Term::App(*f, new_args))
                    }
                    Term::Var(_) => None,
                },
            }
        }
        go(self, &pos.0, s).ok_or_else(|| TermError::InvalidPosition(pos.clone()))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars_ordered(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_ordered(out)),
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn apply(&self, sigma: &Substitution) -> Term {
        match self {
            Term::Var(v) => sigma.get(*v).cloned().unwrap_or(Term::Var(*v)),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| a.apply(sigma)).collect()),
        }
    }

    pub fn map_vars(&self, f: &impl Fn(Var) -> Var) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(*v)),
            Term::App(g, args) => Term::App(*g, args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    pub fn symbols(&self, out: &mut BTreeSet<SymId>) {
        if let Term::App(f, args) = self {
            out.insert(*f);
            args.iter().for_each(|a| a.symbols(out));
        }
    }
}

pub struct TermDisplay<'a> {
    sig: &'a Signature,
    term: &'a Term,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(v) => write!(f, "{}", self.sig.var_name(*v)),
            Term::App(g, args) => {
                write!(f, "{}", self.sig.name(*g))?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", self.sig.display(a))?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// A position: a path of 1-based child indices, empty for the root.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Position(pub Vec<u32>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: u32) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut p = self.0.clone();
        p.extend_from_slice(&other.0);
        Position(p)
    }

    /// Strict prefix order: `self > other` iff `self` strictly extends `other`.
    pub fn is_below(&self, other: &Position) -> bool {
        self.0.len() > other.0.len() && self.0.starts_with(&other.0)
    }

    pub fn is_parallel(&self, other: &Position) -> bool {
        self != other && !self.is_below(other) && !other.is_below(self)
    }

    /// Total order used to list defined positions: deeper positions first,
    /// ties broken lexicographically.
    pub fn dt_order(a: &Position, b: &Position) -> std::cmp::Ordering {
        b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let sep = if self.0.iter().any(|&i| i > 9) { "." } else { "" };
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(sep))
    }
}

impl std::str::FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" || s.is_empty() {
            return Ok(Position::root());
        }
        let parse = |p: &str| p.parse::<u32>().map_err(|e| e.to_string());
        let path = if s.contains('.') {
            s.split('.').map(parse).collect::<Result<Vec<_>, _>>()?
        } else {
            s.chars()
                .map(|c| parse(&c.to_string()))
                .collect::<Result<Vec<_>, _>>()?
        };
        if path.contains(&0) {
            return Err("positions are 1-based".into());
        }
        Ok(Position(path))
    }
}

/// Finite map from variables to terms.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.0.get(&v)
    }

    pub fn insert(&mut self, v: Var, t: Term) -> Option<Term> {
        self.0.insert(v, t)
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

/// Syntactic matching: the unique `σ` with `pattern σ = subject`, if any.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    if match_into(pattern, subject, &mut sigma) {
        Some(sigma)
    } else {
        None
    }
}

/// Extends `sigma` so that `pattern sigma = subject`; `false` on clash.
pub fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    let mut stack = vec![(pattern, subject)];
    while let Some((p, s)) = stack.pop() {
        match (p, s) {
            (Term::Var(v), _) => match sigma.get(*v) {
                Some(bound) if bound != s => return false,
                Some(_) => {}
                None => {
                    sigma.insert(*v, s.clone());
                }
            },
            (Term::App(f, ps), Term::App(g, ss)) => {
                if f != g || ps.len() != ss.len() {
                    return false;
                }
                stack.extend(ps.iter().zip(ss.iter()));
            }
            (Term::App(..), Term::Var(_)) => return false,
        }
    }
    true
}

/// Most general unifier with occurs check. The result is idempotent.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    let mut bindings: BTreeMap<Var, Term> = BTreeMap::new();

    fn walk<'a>(t: &'a Term, b: &'a BTreeMap<Var, Term>) -> &'a Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match b.get(v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur
    }

    fn occurs(v: Var, t: &Term, b: &BTreeMap<Var, Term>) -> bool {
        match walk(t, b) {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| occurs(v, a, b)),
        }
    }

    let mut stack = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = stack.pop() {
        let a = walk(&a, &bindings).clone();
        let b = walk(&b, &bindings).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if occurs(*x, other, &bindings) {
                    return None;
                }
                bindings.insert(*x, other.clone());
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
        }
    }

    fn resolve(t: &Term, b: &BTreeMap<Var, Term>) -> Term {
        match walk(t, b) {
            Term::Var(v) => Term::Var(*v),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| resolve(a, b)).collect()),
        }
    }

    Some(
        bindings
            .keys()
            .map(|&v| (v, resolve(&Term::Var(v), &bindings)))
            .filter(|(v, t)| *t != Term::Var(*v))
            .collect(),
    )
}
