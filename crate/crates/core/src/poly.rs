//! Multivariate polynomials over a coefficient ring.

use std::collections::BTreeMap;
use std::fmt;

/// Coefficient ring operations needed by [`Poly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Coeff for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// A monomial as sorted `(variable, exponent)` pairs with positive exponents.
pub type Monomial<V> = Vec<(V, u32)>;

fn mono_mul<V: Ord + Clone>(a: &Monomial<V>, b: &Monomial<V>) -> Monomial<V> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly<V: Ord + Clone, C: Coeff> {
    terms: BTreeMap<Monomial<V>, C>,
}

impl<V: Ord + Clone, C: Coeff> Default for Poly<V, C> {
    fn default() -> Self {
        Poly { terms: BTreeMap::new() }
    }
}

impl<V: Ord + Clone + fmt::Debug, C: Coeff> Coeff for Poly<V, C> {
    fn zero() -> Self {
        Poly::default()
    }
    fn one() -> Self {
        Poly::constant(C::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        Poly::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Poly::mul(self, other)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
}

impl<V: Ord + Clone, C: Coeff> Poly<V, C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C) -> Self {
        let mut p = Self::default();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn var(v: V) -> Self {
        let mut p = Self::default();
        p.add_term(vec![(v, 1)], C::one());
        p
    }

    /// `c · m` for a monomial given as variable powers in any order.
    pub fn term(c: C, powers: impl IntoIterator<Item = (V, u32)>) -> Self {
        let mut m: Monomial<V> = Vec::new();
        for (v, e) in powers {
            if e > 0 {
                m = mono_mul(&m, &vec![(v, e)]);
            }
        }
        let mut p = Self::default();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Monomial<V>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial<V>, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial<V>) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Vec::new())
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(mono_mul(m1, m2), c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::default();
        for (m, d) in &self.terms {
            out.add_term(m.clone(), d.mul(c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(C::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Substitutes a polynomial for every variable.
    pub fn compose<W: Ord + Clone>(&self, mut sub: impl FnMut(&V) -> Poly<W, C>) -> Poly<W, C> {
        let mut cache: BTreeMap<V, Poly<W, C>> = BTreeMap::new();
        let mut out = Poly::<W, C>::default();
        for (m, c) in &self.terms {
            let mut prod = Poly::<W, C>::constant(c.clone());
            for (v, e) in m {
                let base = cache.entry(v.clone()).or_insert_with(|| sub(v));
                prod = prod.mul(&base.pow(*e));
            }
            out = out.add(&prod);
        }
        out
    }

    /// Maps coefficients into another ring.
    pub fn map_coeffs<D: Coeff>(&self, mut f: impl FnMut(&C) -> D) -> Poly<V, D> {
        let mut out = Poly::<V, D>::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn eval(&self, mut env: impl FnMut(&V) -> C) -> C {
        let mut total = C::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for (v, e) in m {
                let x = env(v);
                for _ in 0..*e {
                    prod = prod.mul(&x);
                }
            }
            total = total.add(&prod);
        }
        total
    }
}

impl<V: Ord + Clone> Poly<V, i128> {
    /// Every coefficient is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|&c| c >= 0)
    }

    /// Prints with variable names from `name`, highest degree first.
    pub fn display_with(&self, mut name: impl FnMut(&V) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut monos: Vec<(&Monomial<V>, i128)> = self.terms.iter().map(|(m, &c)| (m, c)).collect();
        monos.sort_by(|a, b| {
            let da: u32 = a.0.iter().map(|(_, e)| e).sum();
            let db: u32 = b.0.iter().map(|(_, e)| e).sum();
            db.cmp(&da).then_with(|| lex_desc(a.0, b.0))
        });
        let mut out = String::new();
        for (i, (m, c)) in monos.into_iter().enumerate() {
            let (sign, abs) = if c < 0 { ("-", -c) } else { ("+", c) };
            if i == 0 {
                if sign == "-" {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            let factors: Vec<String> = m
                .iter()
                .map(|(v, e)| if *e == 1 { name(v) } else { format!("{}^{}", name(v), e) })
                .collect();
            if factors.is_empty() {
                out.push_str(&abs.to_string());
            } else {
                if abs != 1 {
                    out.push_str(&format!("{abs}*"));
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

/// Lexicographic order on exponent vectors, larger exponents first.
fn lex_desc<V: Ord>(a: &Monomial<V>, b: &Monomial<V>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.0.cmp(&y.0).then_with(|| y.1.cmp(&x.1));
        if o.is_ne() {
            return o;
        }
    }
    b.len().cmp(&a.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Poly<u32, i128>;

    #[test]
    fn arithmetic() {
        let x = P::var(0);
        let y = P::var(1);
        let one = P::constant(1);
        let sq = x.add(&y).add(&one).pow(2);
        assert_eq!(sq.coeff(&vec![(0, 1), (1, 1)]), 2);
        assert_eq!(sq.coeff(&vec![(0, 2)]), 1);
        assert_eq!(sq.constant_term(), 1);
        assert_eq!(sq.degree(), 2);
        assert!(sq.sub(&sq).is_zero());
        assert_eq!(sq.eval(|&v| if v == 0 { 2 } else { 3 }), 36);
    }

    #[test]
    fn composition() {
        // p(x0) = 2*x0 + x0^2 at x0 = 1 + x1 + x2
        let p = P::term(2, [(0, 1)]).add(&P::term(1, [(0, 2)]));
        let arg = P::constant(1).add(&P::var(1)).add(&P::var(2));
        let q = p.compose(|_| arg.clone());
        let expected = arg.scale(&2).add(&arg.pow(2));
        assert_eq!(q, expected);
        assert_eq!(
            q.display_with(|v| format!("x{v}")),
            "x1^2 + 2*x1*x2 + x2^2 + 4*x1 + 4*x2 + 3"
        );
    }

    #[test]
    fn polynomial_coefficients() {
        // coefficients that are themselves polynomials in unknowns
        type Q = Poly<u32, Poly<u32, i128>>;
        let a = Poly::<u32, i128>::var(7);
        let p = Q::term(a.clone(), [(0, 1)]);
        let sq = p.mul(&p);
        assert_eq!(sq.coeff(&vec![(0, 2)]), a.mul(&a));
        assert!(p.sub(&p).is_zero());
    }
}
