//! Reading and writing the TPDB `.trs` text format.
//!
//! Accepted blocks: `(VAR ...)`, `(RULES ...)`, `(STRATEGY ...)` and
//! `(COMMENT ...)`. Relative rules use `->=`; a second `RULES` block is also
//! read as weak rules.

use std::fmt::Write as _;

use thiserror::Error;

use crate::term::{Signature, SignatureError, SymbolKind, Term};
use crate::trs::{RelativeTrs, Rule, RuleError, Trs};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("unexpected token `{0}`")]
    Unexpected(String),
    #[error("expected {expected}, found `{found}`")]
    Expected { expected: &'static str, found: String },
    #[error("unsupported block `{0}`")]
    UnsupportedBlock(String),
    #[error("symbol name `{0}` contains the reserved character `#`")]
    ReservedName(String),
    #[error("variable `{0}` applied to arguments")]
    VariableApplied(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("relative rule `->=` in a plain TRS")]
    RelativeRule,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Comma,
    Arrow,
    WeakArrow,
    Ident(String),
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Open => "(".into(),
            Tok::Close => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Arrow => "->".into(),
            Tok::WeakArrow => "->=".into(),
            Tok::Ident(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Spanned> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let starts_arrow = |i: usize| chars.get(i) == Some(&'-') && chars.get(i + 1) == Some(&'>');
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        if starts_arrow(i) {
            let weak = chars.get(i + 2) == Some(&'=');
            let n = if weak { 3 } else { 2 };
            out.push(Spanned {
                tok: if weak { Tok::WeakArrow } else { Tok::Arrow },
                line: l0,
                column: c0,
            });
            i += n;
            col += n;
            continue;
        }
        let mut s = String::new();
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || matches!(c, '(' | ')' | ',') || (!s.is_empty() && starts_arrow(i)) {
                break;
            }
            s.push(c);
            i += 1;
            col += 1;
        }
        out.push(Spanned {
            tok: Tok::Ident(s),
            line: l0,
            column: c0,
        });
    }
    out
}

/// Raw term syntax before symbols are interned.
#[derive(Debug)]
struct RawTerm {
    name: String,
    args: Option<Vec<RawTerm>>,
    line: usize,
    column: usize,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Parser {
        let toks = tokenize(text);
        let lines = text.split('\n').count();
        let last_col = text.rsplit('\n').next().map(|l| l.chars().count() + 1).unwrap_or(1);
        Parser {
            toks,
            pos: 0,
            eof: (lines.max(1), last_col),
        }
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.toks.get(self.pos).map(|t| (t.line, t.column)).unwrap_or(self.eof);
        ParseError { line, column, kind }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Spanned, ParseError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err_here(ParseErrorKind::UnexpectedEof))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let found = t.text();
                Err(self.err_here(ParseErrorKind::Expected { expected, found }))
            }
            None => Err(self.err_here(ParseErrorKind::UnexpectedEof)),
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let t = self.next()?;
                match t.tok {
                    Tok::Ident(s) => Ok((s, t.line, t.column)),
                    _ => unreachable!(),
                }
            }
            Some(t) => {
                let found = t.text();
                Err(self.err_here(ParseErrorKind::Expected {
                    expected: "identifier",
                    found,
                }))
            }
            None => Err(self.err_here(ParseErrorKind::UnexpectedEof)),
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let (name, line, column) = self.ident()?;
        if self.peek() != Some(&Tok::Open) {
            return Ok(RawTerm {
                name,
                args: None,
                line,
                column,
            });
        }
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::Close) {
            self.pos += 1;
        } else {
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::Close) => {
                        self.pos += 1;
                        break;
                    }
                    Some(t) => {
                        let found = t.text();
                        return Err(self.err_here(ParseErrorKind::Expected {
                            expected: "`,` or `)`",
                            found,
                        }));
                    }
                    None => return Err(self.err_here(ParseErrorKind::UnexpectedEof)),
                }
            }
        }
        Ok(RawTerm {
            name,
            args: Some(args),
            line,
            column,
        })
    }

    fn skip_balanced(&mut self) -> Result<(), ParseError> {
        let mut depth = 1usize;
        while depth > 0 {
            match self.next()?.tok {
                Tok::Open => depth += 1,
                Tok::Close => depth -= 1,
                _ => {}
            }
        }
        Ok(())
    }
}

struct RawProblem {
    vars: Vec<String>,
    strict: Vec<(RawTerm, RawTerm)>,
    weak: Vec<(RawTerm, RawTerm)>,
    innermost: bool,
}

fn parse_raw(text: &str) -> Result<RawProblem, ParseError> {
    let mut p = Parser::new(text);
    let mut raw = RawProblem {
        vars: Vec::new(),
        strict: Vec::new(),
        weak: Vec::new(),
        innermost: false,
    };
    let mut rules_blocks = 0;
    while p.peek().is_some() {
        p.expect(Tok::Open, "`(`")?;
        let (kw, line, column) = p.ident()?;
        match kw.as_str() {
            "VAR" => {
                while let Some(Tok::Ident(_)) = p.peek() {
                    let (v, ..) = p.ident()?;
                    raw.vars.push(v);
                }
                p.expect(Tok::Close, "`)`")?;
            }
            "RULES" => {
                rules_blocks += 1;
                while p.peek() != Some(&Tok::Close) {
                    let lhs = p.term()?;
                    let weak = match p.next()?.tok {
                        Tok::Arrow => rules_blocks > 1,
                        Tok::WeakArrow => true,
                        other => {
                            p.pos -= 1;
                            return Err(p.err_here(ParseErrorKind::Expected {
                                expected: "`->` or `->=`",
                                found: other.text(),
                            }));
                        }
                    };
                    let rhs = p.term()?;
                    if weak {
                        raw.weak.push((lhs, rhs));
                    } else {
                        raw.strict.push((lhs, rhs));
                    }
                }
                p.expect(Tok::Close, "`)`")?;
            }
            "STRATEGY" => {
                while let Some(Tok::Ident(_)) = p.peek() {
                    let (s, ..) = p.ident()?;
                    if s == "INNERMOST" {
                        raw.innermost = true;
                    }
                }
                p.expect(Tok::Close, "`)`")?;
            }
            "COMMENT" => p.skip_balanced()?,
            other => {
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::UnsupportedBlock(other.to_string()),
                })
            }
        }
    }
    Ok(raw)
}

fn intern(raw: &RawTerm, sig: &mut Signature, allow_sharp: bool) -> Result<Term, ParseError> {
    let at = |kind| ParseError {
        line: raw.line,
        column: raw.column,
        kind,
    };
    if let Some(v) = sig.lookup_var(&raw.name) {
        if raw.args.as_ref().is_some_and(|a| !a.is_empty()) {
            return Err(at(ParseErrorKind::VariableApplied(raw.name.clone())));
        }
        return Ok(Term::Var(v));
    }
    if !allow_sharp && raw.name.contains('#') {
        return Err(at(ParseErrorKind::ReservedName(raw.name.clone())));
    }
    let args = raw.args.as_deref().unwrap_or(&[]);
    let kind = symbol_kind_for(&raw.name, args.len(), sig);
    let f = sig
        .intern_symbol(&raw.name, args.len(), kind)
        .map_err(|e| at(e.into()))?;
    let args = args
        .iter()
        .map(|a| intern(a, sig, allow_sharp))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Term::App(f, args))
}

fn symbol_kind_for(name: &str, arity: usize, sig: &Signature) -> SymbolKind {
    if let Some(base) = name.strip_suffix('#') {
        if let Some(f) = sig.lookup(base) {
            return SymbolKind::Sharp(f);
        }
    }
    if name.strip_prefix("Com_").and_then(|k| k.parse::<usize>().ok()) == Some(arity) {
        return SymbolKind::Compound;
    }
    SymbolKind::Plain
}

fn build_rules(pairs: &[(RawTerm, RawTerm)], sig: &mut Signature, allow_sharp: bool) -> Result<Vec<Rule>, ParseError> {
    pairs
        .iter()
        .map(|(l, r)| {
            let lhs = intern(l, sig, allow_sharp)?;
            let rhs = intern(r, sig, allow_sharp)?;
            Rule::new(lhs, rhs, sig).map_err(|e| ParseError {
                line: l.line,
                column: l.column,
                kind: e.into(),
            })
        })
        .collect()
}

/// Parses a plain TRS. Symbol names containing `#` are rejected.
pub fn parse_trs(text: &str) -> Result<Trs, ParseError> {
    let raw = parse_raw(text)?;
    if let Some((l, _)) = raw.weak.first() {
        return Err(ParseError {
            line: l.line,
            column: l.column,
            kind: ParseErrorKind::RelativeRule,
        });
    }
    let mut sig = Signature::new();
    for v in &raw.vars {
        sig.intern_var(v);
    }
    let rules = build_rules(&raw.strict, &mut sig, false)?;
    Ok(Trs::new(sig, rules).with_innermost_strategy(raw.innermost))
}

/// Parses a relative TRS. Sharp (`f#`) and `Com_k` symbols are accepted so
/// exported dependency-tuple systems read back in.
pub fn parse_relative(text: &str) -> Result<RelativeTrs, ParseError> {
    let raw = parse_raw(text)?;
    let mut sig = Signature::new();
    for v in &raw.vars {
        sig.intern_var(v);
    }
    let strict = build_rules(&raw.strict, &mut sig, true)?;
    let weak = build_rules(&raw.weak, &mut sig, true)?;
    Ok(RelativeTrs::new(sig, strict, weak))
}

/// Parses a single term against an existing signature (no new symbols).
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut p = Parser::new(text);
    let raw = p.term()?;
    if p.peek().is_some() {
        let found = p.peek().unwrap().text();
        return Err(p.err_here(ParseErrorKind::Unexpected(found)));
    }
    let mut scratch = sig.clone();
    let before = scratch.len();
    let t = intern(&raw, &mut scratch, true)?;
    if scratch.len() != before {
        return Err(ParseError {
            line: raw.line,
            column: raw.column,
            kind: ParseErrorKind::Unexpected(format!("unknown symbol in `{}`", text.trim())),
        });
    }
    Ok(t)
}

fn var_block(sig: &Signature, rules: &[&Rule]) -> String {
    let mut vars: Vec<String> = sig.declared_vars().map(|v| sig.var_name(v)).collect();
    for r in rules {
        for v in r.vars_ordered() {
            if v.tag != 0 {
                let n = sig.var_name(v);
                if !vars.contains(&n) {
                    vars.push(n);
                }
            }
        }
    }
    let mut out = String::from("(VAR");
    for v in vars {
        out.push(' ');
        out.push_str(&v);
    }
    out.push(')');
    out
}

/// Prints a TRS in TPDB syntax.
pub fn print_trs(trs: &Trs) -> String {
    let sig = trs.signature();
    let rules: Vec<&Rule> = trs.rules().iter().collect();
    let mut out = var_block(sig, &rules);
    out.push('\n');
    if trs.innermost_strategy() {
        out.push_str("(STRATEGY INNERMOST)\n");
    }
    out.push_str("(RULES\n");
    for r in trs.rules() {
        let _ = writeln!(out, "  {}", r.display(sig));
    }
    out.push_str(")\n");
    out
}

/// Prints a relative TRS: strict rules with `->`, weak rules with `->=`.
pub fn print_relative(rel: &RelativeTrs) -> String {
    let sig = rel.signature();
    let rules: Vec<&Rule> = rel.union().rules().iter().collect();
    let mut out = var_block(sig, &rules);
    out.push('\n');
    out.push_str("(STRATEGY INNERMOST)\n");
    out.push_str("(RULES\n");
    for r in rel.strict() {
        let _ = writeln!(out, "  {}", r.display(sig));
    }
    for r in rel.weak() {
        let _ = writeln!(out, "  {}", r.display(sig).weak());
    }
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_example() {
        let trs = parse_trs("(VAR x y)(RULES plus(Zero,y) -> y plus(S(x),y) -> S(plus(x,y)))").unwrap();
        let sig = trs.signature();
        assert_eq!(trs.rules().len(), 2);
        let names =
            |s: &std::collections::BTreeSet<_>| -> Vec<String> { s.iter().map(|&f| sig.name(f).to_string()).collect() };
        assert_eq!(names(trs.defined()), vec!["plus"]);
        let mut cons = names(&trs.constructors());
        cons.sort();
        assert_eq!(cons, vec!["S", "Zero"]);
    }

    #[test]
    fn empty_system() {
        let trs = parse_trs("(VAR)(RULES)").unwrap();
        assert!(trs.rules().is_empty());
        assert!(trs.defined().is_empty());
    }

    #[test]
    fn errors() {
        let e = parse_trs("(VAR x)(RULES x -> x)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Rule(RuleError::VariableLhs(_))));
        let e = parse_trs("(VAR x y)(RULES f(x) -> y)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Rule(RuleError::ExtraVariable { .. })));
        let e = parse_trs("(VAR x)(RULES f(x) -> f(x,x))").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Signature(_)));
        let e = parse_trs("(VAR x)\n(RULES f(x) -> \n  g(x,)").unwrap_err();
        assert_eq!((e.line, e.column), (3, 7));
        let e = parse_trs("(VAR x)(RULES f#(x) -> x)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ReservedName(_)));
        let e = parse_trs("(VAR x)(THEORY (AC f))").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnsupportedBlock(_)));
        let e = parse_trs("(VAR x)(RULES f(x) ->= x)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::RelativeRule));
    }

    #[test]
    fn strategy_and_comment() {
        let trs = parse_trs("(VAR x)(STRATEGY INNERMOST)(COMMENT nested (parens) ok -> )(RULES -(x,0) -> x)").unwrap();
        assert!(trs.innermost_strategy());
        assert_eq!(trs.signature().name(trs.rules()[0].lhs.root().unwrap()), "-");
        let printed = print_trs(&trs);
        assert_eq!(printed, "(VAR x)\n(STRATEGY INNERMOST)\n(RULES\n  -(x,0) -> x\n)\n");
        assert_eq!(print_trs(&parse_trs(&printed).unwrap()), printed);
    }

    #[test]
    fn relative_both_syntaxes() {
        let a = parse_relative("(VAR x)(RULES f(x) -> g(x) g(x) ->= x)").unwrap();
        let b = parse_relative("(VAR x)(RULES f(x) -> g(x))(RULES g(x) -> x)").unwrap();
        assert!(a.same_rules_as(&b));
        assert_eq!(a.strict().len(), 1);
        assert_eq!(a.weak().len(), 1);
        let printed = print_relative(&a);
        assert!(printed.contains("g(x) ->= x"));
        assert_eq!(print_relative(&parse_relative(&printed).unwrap()), printed);
    }

    #[test]
    fn arrow_without_spaces() {
        let trs = parse_trs("(VAR x)(RULES f(x)->x a->b)").unwrap();
        assert_eq!(trs.rules().len(), 2);
    }
}
