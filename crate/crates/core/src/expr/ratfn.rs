//! Canonical rational functions: coprime numerator and denominator with the
//! denominator's leading coefficient fixed to one.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::coeff::CRat;
use super::poly::{Atom, Func, Monomial, Poly};
use super::symbol::Symbol;
use super::ExprError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl Default for RatFn {
    fn default() -> Self {
        RatFn::zero()
    }
}

impl RatFn {
    pub fn zero() -> Self {
        RatFn { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFn::constant(CRat::one())
    }

    pub fn constant(c: CRat) -> Self {
        RatFn { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn int(n: i64) -> Self {
        RatFn::constant(CRat::from_int(n))
    }

    pub fn symbol(s: &Symbol) -> Self {
        RatFn::from_poly(Poly::symbol(s))
    }

    pub fn sym(name: &str) -> Self {
        RatFn::symbol(&Symbol::new(name))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::one() }
    }

    /// `num / den` reduced to canonical form.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(RatFn::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFn::zero();
        }
        if let Some(c) = den.as_const() {
            return RatFn { num: num.scale(&c.inv().unwrap()), den: Poly::one() };
        }
        let g = Poly::gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.exact_div(&g).unwrap(), den.exact_div(&g).unwrap())
        };
        RatFn::with_monic_den(num, den)
    }

    fn with_monic_den(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFn { num, den }
        } else {
            let inv = lc.inv().unwrap();
            RatFn { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_const(&self) -> Option<CRat> {
        if self.den.is_one() {
            self.num.as_const()
        } else {
            None
        }
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.is_poly().then_some(&self.num)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.num.atoms();
        s.extend(self.den.atoms());
        s
    }

    /// Symbols reachable through atoms, including inside function arguments.
    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            match a {
                Atom::Sym(s) => {
                    out.insert(s);
                }
                Atom::Call(_, arg) => out.extend(arg.free_symbols()),
            }
        }
        out
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        self.num.depends_on(s) || self.den.depends_on(s)
    }

    pub fn has_calls(&self) -> bool {
        self.atoms().iter().any(|a| matches!(a, Atom::Call(..)))
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        if self.den.is_one() && o.den.is_one() {
            return RatFn { num: &self.num + &o.num, den: Poly::one() };
        }
        if o.den.is_one() {
            let num = &self.num + &(&o.num * &self.den);
            return RatFn::normalize_zero(num, self.den.clone());
        }
        if self.den.is_one() {
            let num = &o.num + &(&self.num * &o.den);
            return RatFn::normalize_zero(num, o.den.clone());
        }
        if self.den == o.den {
            return RatFn::reduce(&self.num + &o.num, self.den.clone());
        }
        let g = Poly::gcd(&self.den, &o.den);
        let d1 = self.den.exact_div(&g).unwrap();
        let d2 = o.den.exact_div(&g).unwrap();
        let num = &(&self.num * &d2) + &(&o.num * &d1);
        let den = &self.den * &d2;
        if g.is_one() {
            // coprime denominators: the sum is already reduced
            return RatFn::normalize_zero(num, den);
        }
        RatFn::reduce(num, den)
    }

    fn normalize_zero(num: Poly, den: Poly) -> RatFn {
        if num.is_zero() {
            RatFn::zero()
        } else {
            RatFn::with_monic_den(num, den)
        }
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFn { num: &self.num * &o.num, den: Poly::one() };
        }
        let g1 = Poly::gcd(&self.num, &o.den);
        let g2 = Poly::gcd(&o.num, &self.den);
        let n1 = self.num.exact_div(&g1).unwrap();
        let d2 = o.den.exact_div(&g1).unwrap();
        let n2 = o.num.exact_div(&g2).unwrap();
        let d1 = self.den.exact_div(&g2).unwrap();
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        if let Some(c) = den.as_const() {
            return RatFn { num: num.scale(&c.inv().unwrap()), den: Poly::one() };
        }
        RatFn::with_monic_den(num, den)
    }

    pub fn scale(&self, c: &CRat) -> RatFn {
        if c.is_zero() {
            return RatFn::zero();
        }
        RatFn { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<RatFn, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if let Some(c) = self.num.as_const() {
            return Ok(RatFn { num: self.den.scale(&c.inv().unwrap()), den: Poly::one() });
        }
        Ok(RatFn::with_monic_den(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFn) -> Result<RatFn, ExprError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<RatFn, ExprError> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let k = u32::try_from(k).map_err(|_| ExprError::ExponentTooLarge)?;
        if self.den.is_one() {
            return Ok(RatFn::from_poly(self.num.pow(k)));
        }
        Ok(RatFn::with_monic_den(self.num.pow(k), self.den.pow(k)))
    }

    pub fn conj(&self) -> RatFn {
        RatFn::with_monic_den(self.num.conj(), self.den.conj())
    }

    /// Elementary function application with exact folding of the trivial
    /// constant cases (`exp(0)`, `log(1)`, `sqrt(9/4)`, ...).
    pub fn call(f: Func, arg: RatFn) -> Result<RatFn, ExprError> {
        if let Some(c) = arg.as_const() {
            let folded = match f {
                Func::Exp if c.is_zero() => Some(CRat::one()),
                Func::Log if c.is_one() => Some(CRat::zero()),
                Func::Log if c.is_zero() => return Err(ExprError::BranchPoint("log")),
                Func::Sin | Func::Arctan if c.is_zero() => Some(CRat::zero()),
                Func::Cos if c.is_zero() => Some(CRat::one()),
                Func::Sqrt => c.exact_sqrt(),
                _ => None,
            };
            if let Some(v) = folded {
                return Ok(RatFn::constant(v));
            }
        }
        Ok(RatFn::from_poly(Poly::atom(Atom::Call(f, Arc::new(arg)))))
    }

    /// Derivative of a single atom with respect to `s`.
    pub fn atom_derivative(a: &Atom, s: &Symbol) -> Result<RatFn, ExprError> {
        match a {
            Atom::Sym(t) => Ok(if t == s { RatFn::one() } else { RatFn::zero() }),
            Atom::Call(f, arg) => {
                let da = arg.diff(s)?;
                if da.is_zero() {
                    return Ok(RatFn::zero());
                }
                let arg = arg.as_ref().clone();
                let outer = match f {
                    Func::Exp => RatFn::call(Func::Exp, arg)?,
                    Func::Log => arg.inv()?,
                    Func::Sin => RatFn::call(Func::Cos, arg)?,
                    Func::Cos => RatFn::call(Func::Sin, arg)?.neg(),
                    Func::Arctan => RatFn::one().add(&arg.mul(&arg)).inv()?,
                    Func::Sqrt => RatFn::call(Func::Sqrt, arg)?.scale(&CRat::from_int(2)).inv()?,
                };
                Ok(outer.mul(&da))
            }
        }
    }

    fn poly_diff(p: &Poly, s: &Symbol) -> Result<RatFn, ExprError> {
        let mut out = RatFn::zero();
        for a in p.atoms() {
            if !a.depends_on(s) {
                continue;
            }
            let partial = RatFn::from_poly(p.partial_atom(&a));
            out = out.add(&partial.mul(&RatFn::atom_derivative(&a, s)?));
        }
        Ok(out)
    }

    /// Exact partial derivative.
    pub fn diff(&self, s: &Symbol) -> Result<RatFn, ExprError> {
        let dn = RatFn::poly_diff(&self.num, s)?;
        if self.den.is_one() {
            return Ok(dn);
        }
        let dd = RatFn::poly_diff(&self.den, s)?;
        if dd.is_zero() {
            return dn.div(&RatFn::from_poly(self.den.clone()));
        }
        let den = RatFn::from_poly(self.den.clone());
        let top = dn.mul(&den).sub(&RatFn::from_poly(self.num.clone()).mul(&dd));
        top.div(&den.pow(2)?)
    }

    pub fn diff_sym(&self, name: &str) -> Result<RatFn, ExprError> {
        self.diff(&Symbol::new(name))
    }

    fn subs_poly(
        p: &Poly,
        map: &BTreeMap<Symbol, RatFn>,
        cache: &mut BTreeMap<Atom, RatFn>,
    ) -> Result<RatFn, ExprError> {
        let mut out = RatFn::zero();
        for (m, c) in p.terms() {
            let mut t = RatFn::constant(c.clone());
            for (a, e) in m.factors() {
                let img = match cache.get(a) {
                    Some(v) => v.clone(),
                    None => {
                        let v = match a {
                            Atom::Sym(s) => map.get(s).cloned().unwrap_or_else(|| RatFn::symbol(s)),
                            Atom::Call(f, arg) => RatFn::call(*f, arg.subs(map)?)?,
                        };
                        cache.insert(a.clone(), v.clone());
                        v
                    }
                };
                t = t.mul(&img.pow(*e as i64)?);
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Simultaneous substitution of symbols.
    pub fn subs(&self, map: &BTreeMap<Symbol, RatFn>) -> Result<RatFn, ExprError> {
        if map.is_empty() {
            return Ok(self.clone());
        }
        let mut cache = BTreeMap::new();
        let n = RatFn::subs_poly(&self.num, map, &mut cache)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = RatFn::subs_poly(&self.den, map, &mut cache)?;
        n.div(&d)
    }

    /// Coefficients of the numerator as a polynomial in the given symbols;
    /// keys are exponent vectors, values are rational functions in the
    /// remaining atoms (each divided by the denominator). Fails when the
    /// denominator or a function atom involves the listed symbols.
    pub fn coeffs_in_symbols(
        &self,
        vars: &[Symbol],
    ) -> Option<BTreeMap<Vec<u32>, RatFn>> {
        if vars.iter().any(|v| self.den.depends_on(v)) {
            return None;
        }
        let var_atoms: Vec<Atom> = vars.iter().map(|v| Atom::Sym(v.clone())).collect();
        let mut out: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
        for (m, c) in self.num.terms() {
            let mut key = vec![0; vars.len()];
            let mut rest = Monomial::one();
            for (a, e) in m.factors() {
                if let Some(i) = var_atoms.iter().position(|v| v == a) {
                    key[i] = *e;
                } else {
                    if let Atom::Call(_, arg) = a {
                        if vars.iter().any(|v| arg.depends_on(v)) {
                            return None;
                        }
                    }
                    rest = rest.mul(&Monomial::of(a.clone(), *e));
                }
            }
            out.entry(key).or_default().add_term(rest, c.clone());
        }
        let den = self.den.clone();
        Some(
            out.into_iter()
                .filter(|(_, p)| !p.is_zero())
                .map(|(k, p)| (k, RatFn::reduce(p, den.clone())))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_canonical() {
        let x = RatFn::sym("x");
        let y = RatFn::sym("y");
        let a = x.add(&y).pow(2).unwrap().div(&x.add(&y)).unwrap();
        assert_eq!(a, x.add(&y));
        assert_eq!(x.div(&x).unwrap(), RatFn::one());
    }

    #[test]
    fn sum_of_fractions_reduces() {
        let x = RatFn::sym("x");
        let one = RatFn::one();
        // 1/(x-1) - 1/(x+1) = 2/(x^2-1)
        let a = one.div(&x.sub(&one)).unwrap();
        let b = one.div(&x.add(&one)).unwrap();
        let lhs = a.sub(&b);
        let rhs = RatFn::int(2).div(&x.mul(&x).sub(&one)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(RatFn::one().div(&RatFn::zero()), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn chain_rule_through_atoms() {
        let x = RatFn::sym("x");
        let e = RatFn::call(Func::Exp, x.mul(&x)).unwrap();
        let d = e.diff_sym("x").unwrap();
        assert_eq!(d, e.mul(&x.scale(&CRat::from_int(2))));
    }
}
