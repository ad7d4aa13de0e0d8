//! Complexity polynomial interpretations (CPIs) and orientation checks.
//!
//! `Com_k` is always the sum of its arguments. Constructors must be of the
//! form `a1*x1 + ... + an*xn + b` with every `ai` in `{0, 1}`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dt::DtProblem;
use crate::poly::{Coeff, Poly};
use crate::term::{Signature, SymId, SymbolKind, Term, Var};

/// Polynomial over argument positions `0..arity` (printed `x1..xn`).
pub type SymbolPoly = Poly<usize, i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CpiError {
    #[error("no interpretation for symbol `{0}`")]
    Missing(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Cpi {
    polys: BTreeMap<SymId, SymbolPoly>,
}

impl Cpi {
    pub fn new() -> Cpi {
        Cpi::default()
    }

    pub fn set(&mut self, f: SymId, p: SymbolPoly) {
        self.polys.insert(f, p);
    }

    pub fn get(&self, f: SymId) -> Option<&SymbolPoly> {
        self.polys.get(&f)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymId, &SymbolPoly)> {
        self.polys.iter().map(|(&f, p)| (f, p))
    }

    /// Maximal degree of the interpretations of sharp symbols.
    pub fn sharp_degree(&self, sig: &Signature) -> u32 {
        self.polys
            .iter()
            .filter(|(&f, _)| matches!(sig.kind(f), SymbolKind::Sharp(_)))
            .map(|(_, p)| p.degree())
            .max()
            .unwrap_or(0)
    }

    /// One `name = poly` line per symbol, in signature order.
    pub fn display(&self, sig: &Signature) -> String {
        self.polys
            .iter()
            .map(|(&f, p)| format!("{} = {}\n", sig.name(f), p.display_with(|i| format!("x{}", i + 1))))
            .collect()
    }

    /// Constructor and compound symbols that violate the CPI shape.
    pub fn shape_violations(&self, sig: &Signature, constructors: &[SymId]) -> Vec<String> {
        let mut out = Vec::new();
        for (&f, p) in &self.polys {
            if !p.is_nonnegative() {
                out.push(format!("{}: negative coefficient", sig.name(f)));
            }
            if matches!(sig.kind(f), SymbolKind::Compound) && *p != sum_poly(sig.arity(f)) {
                out.push(format!("{}: must be the sum of its arguments", sig.name(f)));
            }
            if constructors.contains(&f) {
                let ok = p
                    .terms()
                    .all(|(m, &c)| m.is_empty() || (m.len() == 1 && m[0].1 == 1 && c == 1));
                if !ok {
                    out.push(format!(
                        "{}: constructor must be a 0/1 sum of arguments plus a constant",
                        sig.name(f)
                    ));
                }
            }
        }
        out
    }
}

pub(crate) fn sum_poly<C: Coeff>(k: usize) -> Poly<usize, C> {
    (0..k).fold(Poly::zero(), |acc, i| acc.add(&Poly::var(i)))
}

/// `Pol(t)` for an interpretation given by `lookup`; compound symbols are
/// interpreted as sums.
pub fn interpret_with<'p, C: Coeff + 'p>(
    t: &Term,
    sig: &Signature,
    lookup: &impl Fn(SymId) -> Option<&'p Poly<usize, C>>,
) -> Result<Poly<Var, C>, CpiError> {
    match t {
        Term::Var(v) => Ok(Poly::var(*v)),
        Term::App(f, args) => {
            let inner: Vec<Poly<Var, C>> = args
                .iter()
                .map(|a| interpret_with(a, sig, lookup))
                .collect::<Result<_, _>>()?;
            if matches!(sig.kind(*f), SymbolKind::Compound) {
                return Ok(inner.iter().fold(Poly::zero(), |acc, p| acc.add(p)));
            }
            let p = lookup(*f).ok_or_else(|| CpiError::Missing(sig.name(*f).to_string()))?;
            Ok(p.compose(|&i| inner[i].clone()))
        }
    }
}

pub fn interpret(t: &Term, cpi: &Cpi, sig: &Signature) -> Result<Poly<Var, i128>, CpiError> {
    interpret_with(t, sig, &|f| cpi.get(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strict,
    Weak,
}

/// Absolute-positiveness check of `Pol(lhs) > Pol(rhs)` (strict) or
/// `Pol(lhs) >= Pol(rhs)` (weak) over the naturals.
pub fn orients(cpi: &Cpi, sig: &Signature, lhs: &Term, rhs: &Term, mode: Mode) -> Result<bool, CpiError> {
    let diff = interpret(lhs, cpi, sig)?.sub(&interpret(rhs, cpi, sig)?);
    Ok(diff.is_nonnegative() && (mode == Mode::Weak || diff.constant_term() >= 1))
}

/// Reads `name = poly` entries, one per line or separated by `;`. Several
/// names may share a polynomial: `plus# = size = x1`. Lines starting with
/// `//` are comments. Compound symbols get their fixed sum interpretation.
pub fn parse_cpi(text: &str, sig: &Signature) -> Result<Cpi, CpiError> {
    let mut cpi = Cpi::new();
    for f in sig.symbol_ids() {
        if matches!(sig.kind(f), SymbolKind::Compound) {
            cpi.set(f, sum_poly(sig.arity(f)));
        }
    }
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |msg: String| CpiError::Syntax { line: line_no, msg };
        if line.trim_start().starts_with("//") {
            continue;
        }
        for entry in line.split(';') {
            if entry.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = entry.split('=').map(str::trim).collect();
            if parts.len() < 2 {
                return Err(err(format!("expected `name = polynomial`, got `{}`", entry.trim())));
            }
            let (names, poly) = parts.split_at(parts.len() - 1);
            let poly = parse_poly(poly[0]).map_err(err)?;
            for name in names {
                let f = sig
                    .lookup(name)
                    .ok_or_else(|| err(format!("unknown symbol `{name}`")))?;
                if let Some((m, _)) = poly.terms().find(|(m, _)| m.iter().any(|(i, _)| *i >= sig.arity(f))) {
                    let i = m.iter().map(|(i, _)| i).max().unwrap();
                    return Err(err(format!("`{name}` has arity {} but uses x{}", sig.arity(f), i + 1)));
                }
                cpi.set(f, poly.clone());
            }
        }
    }
    Ok(cpi)
}

fn parse_poly(text: &str) -> Result<SymbolPoly, String> {
    let mut total = SymbolPoly::zero();
    for summand in text.split('+') {
        let summand = summand.trim();
        if summand.is_empty() {
            return Err(format!("empty summand in `{text}`"));
        }
        let mut prod = SymbolPoly::constant(1);
        for factor in summand.split('*') {
            let factor = factor.trim();
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (
                    b.trim(),
                    e.trim()
                        .parse::<u32>()
                        .map_err(|_| format!("bad exponent in `{factor}`"))?,
                ),
                None => (factor, 1),
            };
            let p = if let Some(idx) = base.strip_prefix('x') {
                let i: usize = idx.parse().map_err(|_| format!("bad variable `{base}`"))?;
                if i == 0 {
                    return Err("variables are numbered from x1".into());
                }
                SymbolPoly::var(i - 1)
            } else {
                SymbolPoly::constant(base.parse::<i128>().map_err(|_| format!("bad factor `{base}`"))?)
            };
            prod = prod.mul(&p.pow(exp));
        }
        total = total.add(&prod);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrientationRow {
    pub rule: String,
    /// `true` for tuples of `D`, `false` for rules of `R`.
    pub is_tuple: bool,
    /// Whether the tuple belongs to `S`.
    pub counted: bool,
    pub strict: bool,
    pub weak: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CpiReport {
    pub rows: Vec<OrientationRow>,
    pub degree: u32,
    pub shape_violations: Vec<String>,
    pub missing: Vec<String>,
}

impl CpiReport {
    /// All of `D ∪ R` weakly oriented, all of `S` strictly, and CPI-shaped.
    pub fn solves(&self) -> bool {
        self.missing.is_empty()
            && self.shape_violations.is_empty()
            && self.rows.iter().all(|r| r.weak && (!r.counted || r.strict))
    }
}

/// Orientation table of every tuple and rule of a problem under `cpi`.
pub fn verify_cpi(problem: &DtProblem, cpi: &Cpi) -> CpiReport {
    let sig = problem.signature();
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    let mut row = |rule: &crate::trs::Rule, is_tuple: bool, counted: bool, missing: &mut Vec<String>| {
        let mut check = |mode| match orients(cpi, sig, &rule.lhs, &rule.rhs, mode) {
            Ok(b) => b,
            Err(CpiError::Missing(name)) => {
                if !missing.contains(&name) {
                    missing.push(name);
                }
                false
            }
            Err(e) => unreachable!("{e}"),
        };
        let weak = check(Mode::Weak);
        let strict = check(Mode::Strict);
        rows.push(OrientationRow {
            rule: rule.display(sig).to_string(),
            is_tuple,
            counted,
            strict,
            weak,
        });
    };
    for (i, r) in problem.dt_rules().iter().enumerate() {
        row(r, true, problem.is_strict(i), &mut missing);
    }
    for r in problem.trs().rules() {
        row(r, false, false, &mut missing);
    }
    let constructors: Vec<SymId> = problem.trs().constructors().into_iter().collect();
    CpiReport {
        rows,
        degree: cpi.sharp_degree(sig),
        shape_violations: cpi.shape_violations(sig, &constructors),
        missing,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dt::{canonical_parallel_problem, canonical_problem};
    use crate::fixtures;
    use crate::tpdb::parse_term;

    pub(crate) const SIZE_CPI: &str = "plus# = size = x1\nsize# = 2*x1 + x1^2\nplus = x1 + x2\n\
        Tree = 1 + x2 + x3\nS = 1 + x1\nZero = Nil = 1\n";
    pub(crate) const DOUBLES_CPI: &str = "doubles# = d = 2*x1\nd# = x1\ndoubles = Zero = Cons = Nil = 1\nS = 1 + x1\n";

    #[test]
    fn interpret_examples() {
        let p = canonical_problem(&fixtures::size());
        let sig = p.signature();
        let cpi = parse_cpi(SIZE_CPI, sig).unwrap();
        let t = parse_term("size#(Tree(v,l,r))", sig).unwrap();
        let got = interpret(&t, &cpi, sig).unwrap();
        let l = Poly::var(sig.lookup_var("l").unwrap());
        let r = Poly::var(sig.lookup_var("r").unwrap());
        let base = Poly::constant(1).add(&l).add(&r);
        assert_eq!(got, base.scale(&2).add(&base.pow(2)));
        let x = parse_term("v", sig).unwrap();
        assert_eq!(
            interpret(&x, &cpi, sig).unwrap(),
            Poly::var(sig.lookup_var("v").unwrap())
        );
        let c = parse_term("Com_3(size#(l),size#(r),plus#(l,r))", sig).unwrap();
        let expected = ["size#(l)", "size#(r)", "plus#(l,r)"]
            .iter()
            .map(|s| interpret(&parse_term(s, sig).unwrap(), &cpi, sig).unwrap())
            .fold(Poly::zero(), |a, b| a.add(&b));
        assert_eq!(interpret(&c, &cpi, sig).unwrap(), expected);
    }

    #[test]
    fn example_7_orients_size() {
        for p in [
            canonical_problem(&fixtures::size()),
            canonical_parallel_problem(&fixtures::size()),
        ] {
            let cpi = parse_cpi(SIZE_CPI, p.signature()).unwrap();
            let report = verify_cpi(&p, &cpi);
            assert!(report.solves(), "{report:?}");
            assert!(report.rows.iter().filter(|r| r.is_tuple).all(|r| r.strict));
            assert_eq!(report.degree, 2);
        }
    }

    #[test]
    fn example_15_orients_doubles() {
        let p = canonical_parallel_problem(&fixtures::doubles());
        let cpi = parse_cpi(DOUBLES_CPI, p.signature()).unwrap();
        let report = verify_cpi(&p, &cpi);
        assert!(report.solves(), "{report:?}");
        assert!(report.rows.iter().filter(|r| r.is_tuple).all(|r| r.strict));
        assert_eq!(report.degree, 1);
    }

    #[test]
    fn zero_interpretation_fails() {
        let p = canonical_problem(&fixtures::size());
        let sig = p.signature();
        let text = "plus# = size# = plus = size = Tree = S = Zero = Nil = 0";
        let report = verify_cpi(&p, &parse_cpi(text, sig).unwrap());
        assert!(report.rows.iter().filter(|r| r.is_tuple).all(|r| !r.strict));
        assert!(!report.solves());
    }

    #[test]
    fn strict_needs_a_gap() {
        let p = canonical_problem(&fixtures::size());
        let sig = p.signature();
        let cpi = parse_cpi(SIZE_CPI, sig).unwrap();
        let t = parse_term("size(l)", sig).unwrap();
        assert_eq!(orients(&cpi, sig, &t, &t, Mode::Strict), Ok(false));
        assert_eq!(orients(&cpi, sig, &t, &t, Mode::Weak), Ok(true));
    }

    #[test]
    fn parse_errors_and_shape() {
        let p = canonical_problem(&fixtures::size());
        let sig = p.signature();
        assert!(matches!(
            parse_cpi("nope = 1", sig),
            Err(CpiError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_cpi("// c\nS = x2", sig),
            Err(CpiError::Syntax { line: 2, .. })
        ));
        assert!(matches!(parse_cpi("S = 2 *", sig), Err(CpiError::Syntax { .. })));
        let bad = parse_cpi(&format!("{SIZE_CPI}S = 2*x1 + 1"), sig).unwrap();
        let constructors: Vec<SymId> = p.trs().constructors().into_iter().collect();
        assert_eq!(bad.shape_violations(sig, &constructors).len(), 1);
        let missing = parse_cpi("S = 1 + x1", sig).unwrap();
        let report = verify_cpi(&p, &missing);
        assert!(!report.missing.is_empty());
    }
}
