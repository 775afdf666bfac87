//! Sparse multivariate polynomials over the Gaussian rationals.
//!
//! Indeterminates are [`Atom`]s: plain symbols or opaque elementary-function
//! applications. Exact division and a recursive primitive-PRS gcd make the
//! rational-function normal form in [`super::ratfn`] canonical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::Serialize;

use super::coeff::CRat;
use super::ratfn::RatFn;
use super::symbol::Symbol;

/// Closed set of elementary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Arctan,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Arctan, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Arctan => "arctan",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// A polynomial indeterminate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(Symbol),
    Call(Func, Arc<RatFn>),
}

impl Atom {
    pub fn depends_on(&self, s: &Symbol) -> bool {
        match self {
            Atom::Sym(t) => t == s,
            Atom::Call(_, arg) => arg.depends_on(s),
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            Atom::Sym(s) => Some(s),
            Atom::Call(..) => None,
        }
    }
}

/// Power product of atoms, sorted by atom, exponents strictly positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn of(atom: Atom, exp: u32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(atom, exp)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.0.iter().find(|(b, _)| b == a).map_or(0, |(_, e)| *e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        while i < self.0.len() && j < o.0.len() {
            match self.0[i].0.cmp(&o.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(o.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + o.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&o.0[j..]);
        Monomial(out)
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            let d = if j < o.0.len() && &o.0[j].0 == a {
                j += 1;
                o.0[j - 1].1
            } else {
                0
            };
            if d > *e {
                return None;
            }
            if e - d > 0 {
                out.push((a.clone(), e - d));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes `a` and returns its exponent together with the rest.
    pub fn split(&self, a: &Atom) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(b, k)| {
                if b == a {
                    e = *k;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (e, Monomial(rest))
    }

    /// Componentwise minimum (monomial gcd).
    pub fn gcd(&self, o: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(a, e)| {
                    let d = o.degree_in(a).min(*e);
                    (d > 0).then(|| (a.clone(), d))
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, CRat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(CRat::one())
    }

    pub fn constant(c: CRat) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn atom(a: Atom) -> Self {
        Poly::term(Monomial::of(a, 1), CRat::one())
    }

    pub fn symbol(s: &Symbol) -> Self {
        Poly::atom(Atom::Sym(s.clone()))
    }

    pub fn term(m: Monomial, c: CRat) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> CRat {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: CRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// The value when the polynomial is a constant (including zero).
    pub fn as_const(&self) -> Option<CRat> {
        match self.terms.len() {
            0 => Some(CRat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                s.insert(a.clone());
            }
        }
        s
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|(a, _)| a.depends_on(s)))
    }

    pub fn max_atom(&self) -> Option<Atom> {
        self.terms.keys().filter_map(|m| m.0.last().map(|(a, _)| a.clone())).max()
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.terms.keys().map(|m| m.degree_in(a)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    /// Coefficients with respect to `a`: `self = sum_k coeffs[k] * a^k`.
    pub fn coeffs_in(&self, a: &Atom) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(a);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out
    }

    pub fn lead_coeff_in(&self, a: &Atom) -> Poly {
        let d = self.degree_in(a);
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(a);
            if e == d {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &CRat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly { terms: self.terms.iter().map(|(n, c)| (n.mul(m), c.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Coefficient of the greatest monomial in the canonical key order.
    pub fn leading_coeff(&self) -> CRat {
        self.terms.values().next_back().cloned().unwrap_or_default()
    }

    /// Scaled so the greatest monomial has coefficient one.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.leading_coeff();
        if lc.is_one() {
            return self.clone();
        }
        self.scale(&lc.inv().unwrap())
    }

    pub fn conj(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect() }
    }

    /// Real and imaginary coefficient parts (atoms are taken as real).
    pub fn split_re_im(&self) -> (Poly, Poly) {
        let mut re = Poly::zero();
        let mut im = Poly::zero();
        for (m, c) in &self.terms {
            re.add_term(m.clone(), CRat::real(c.re.clone()));
            im.add_term(m.clone(), CRat::real(c.im.clone()));
        }
        (re, im)
    }

    /// Formal partial derivative with respect to an atom.
    pub fn partial_atom(&self, a: &Atom) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(a);
            if e > 0 {
                let nm = rest.mul(&Monomial::of(a.clone(), e - 1));
                out.add_term(nm, c * &CRat::from_int(e as i64));
            }
        }
        out
    }

    /// Exact quotient `self / b`, or `None` when `b` does not divide `self`.
    pub fn exact_div(&self, b: &Poly) -> Option<Poly> {
        if b.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = b.as_const() {
            return Some(self.scale(&c.inv()?));
        }
        if b.terms.len() == 1 {
            let (bm, bc) = b.terms.iter().next().unwrap();
            let inv = bc.inv()?;
            let mut out = Poly::zero();
            for (m, c) in &self.terms {
                out.add_term(m.div(bm)?, c * &inv);
            }
            return Some(out);
        }
        let v = self.max_atom().into_iter().chain(b.max_atom()).max()?;
        let db = b.degree_in(&v);
        if db == 0 {
            let mut out = Poly::zero();
            for (k, c) in self.coeffs_in(&v) {
                let q = c.exact_div(b)?;
                out = &out + &q.mul_monomial(&Monomial::of(v.clone(), k));
            }
            return Some(out);
        }
        let lb = b.lead_coeff_in(&v);
        let mut q = Poly::zero();
        let mut r = self.clone();
        while !r.is_zero() {
            let dr = r.degree_in(&v);
            if dr < db {
                return None;
            }
            let lr = r.lead_coeff_in(&v);
            let t = lr.exact_div(&lb)?.mul_monomial(&Monomial::of(v.clone(), dr - db));
            r = &r - &(&t * b);
            q = &q + &t;
        }
        Some(q)
    }

    fn prem(a: &Poly, b: &Poly, v: &Atom) -> Poly {
        let db = b.degree_in(v);
        let lb = b.lead_coeff_in(v);
        let mut r = a.clone();
        while !r.is_zero() {
            let dr = r.degree_in(v);
            if dr < db {
                break;
            }
            let lr = r.lead_coeff_in(v);
            let shifted = b.mul_monomial(&Monomial::of(v.clone(), dr - db));
            r = &(&r * &lb) - &(&lr * &shifted);
        }
        r
    }

    /// Content with respect to `v`: gcd of the coefficients in `v`.
    fn content_in(&self, v: &Atom) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(v).into_values() {
            g = Poly::gcd(&g, &c);
            if g.as_const().is_some() && !g.is_zero() {
                return Poly::one();
            }
        }
        g
    }

    fn primitive_part_in(&self, v: &Atom) -> Poly {
        let c = self.content_in(v);
        if c.as_const().is_some() {
            return self.monic();
        }
        self.exact_div(&c).expect("content divides polynomial")
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() || a == b {
            return a.monic();
        }
        if a.as_const().is_some() || b.as_const().is_some() {
            return Poly::one();
        }
        if a.terms.len() == 1 || b.terms.len() == 1 {
            let (single, other) = if a.terms.len() == 1 { (a, b) } else { (b, a) };
            let mut m = single.terms.keys().next().unwrap().clone();
            for k in other.terms.keys() {
                m = m.gcd(k);
                if m.is_one() {
                    break;
                }
            }
            return Poly::term(m, CRat::one());
        }
        let v = a.max_atom().into_iter().chain(b.max_atom()).max().unwrap();
        let (da, db) = (a.degree_in(&v), b.degree_in(&v));
        if da == 0 {
            return Poly::gcd(a, &b.content_in(&v));
        }
        if db == 0 {
            return Poly::gcd(&a.content_in(&v), b);
        }
        let ca = a.content_in(&v);
        let cb = b.content_in(&v);
        let c = Poly::gcd(&ca, &cb);
        let mut p = a.exact_div(&ca).expect("content divides");
        let mut q = b.exact_div(&cb).expect("content divides");
        if p.degree_in(&v) < q.degree_in(&v) {
            std::mem::swap(&mut p, &mut q);
        }
        let g = loop {
            let r = Poly::prem(&p, &q, &v);
            if r.is_zero() {
                break q;
            }
            if r.degree_in(&v) == 0 {
                break Poly::one();
            }
            p = q;
            q = r.primitive_part_in(&v);
        };
        let g = if g.as_const().is_some() { Poly::one() } else { g.primitive_part_in(&v) };
        (&c * &g).monic()
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= o.terms.len() { (self, o) } else { (o, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", RatFn::from_poly(self.clone()).to_expr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Poly {
        Poly::symbol(&Symbol::new(s))
    }

    fn c(n: i64) -> Poly {
        Poly::constant(CRat::from_int(n))
    }

    #[test]
    fn exact_division_of_product() {
        let x = sym("x");
        let y = sym("y");
        let a = &(&x + &y) * &(&x - &c(2));
        let b = &x + &y;
        let q = a.exact_div(&b).unwrap();
        assert_eq!(q, &x - &c(2));
        assert!(a.exact_div(&(&x + &c(1))).is_none());
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let x = sym("x");
        let y = sym("y");
        let z = sym("z");
        let g = &(&(&x * &y) + &z) + &c(1);
        let a = &g * &(&x - &y);
        let b = &g * &(&(&z * &z) + &x);
        assert_eq!(Poly::gcd(&a, &b), g.monic());
        assert_eq!(Poly::gcd(&(&x + &c(1)), &(&y + &c(1))), Poly::one());
    }

    #[test]
    fn gcd_with_gaussian_coefficients() {
        let u = sym("u");
        let v = sym("v");
        let i = Poly::constant(CRat::i());
        // (u + i v)^2 and (u + i v)(u - v)
        let f = &u + &(&i * &v);
        let a = f.pow(2);
        let b = &f * &(&u - &v);
        assert_eq!(Poly::gcd(&a, &b), f.monic());
    }

    #[test]
    fn monomial_division() {
        let x = Atom::Sym(Symbol::new("x"));
        let y = Atom::Sym(Symbol::new("y"));
        let m = Monomial::of(x.clone(), 3).mul(&Monomial::of(y.clone(), 1));
        let d = Monomial::of(x.clone(), 1);
        assert_eq!(m.div(&d).unwrap(), Monomial::of(x.clone(), 2).mul(&Monomial::of(y, 1)));
        assert!(d.div(&m).is_none());
    }
}
