//! Dependence analysis of `u'' = w(x, u, u')`.

use std::fmt;

use serde::Serialize;

use crate::analyticity::ComplexOde;
use crate::expr::{Atom, Poly, RatFn};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CanonicalKind {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "III")]
    III,
    #[serde(rename = "IV")]
    IV,
}

impl CanonicalKind {
    /// The canonical form, e.g. `u'' = w(u')`.
    pub fn form(self) -> &'static str {
        match self {
            CanonicalKind::I => "u'' = w(u')",
            CanonicalKind::II => "u'' = w(x)",
            CanonicalKind::III => "x*u'' = w(u')",
            CanonicalKind::IV => "u'' = u'*w(x)",
        }
    }
}

/// A matched canonical type and its shape function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicalType {
    pub kind: CanonicalKind,
    #[serde(serialize_with = "crate::solve::ser_ratfn")]
    pub shape: RatFn,
}

impl fmt::Display for CanonicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {:?} ({}) with w = {}", self.kind, self.kind.form(), self.shape.to_expr())
    }
}

fn only_depends_on(w: &RatFn, ode: &ComplexOde, allowed: &[bool; 3]) -> bool {
    let v = [&ode.indep, &ode.dep, &ode.dep_prime()];
    v.iter().zip(allowed).all(|(s, ok)| *ok || !w.depends_on(s))
}

/// Match `w` against the four canonical types.
pub fn match_canonical_type(ode: &ComplexOde) -> Option<CanonicalType> {
    let w = &ode.rhs;
    if only_depends_on(w, ode, &[false, false, true]) {
        return Some(CanonicalType { kind: CanonicalKind::I, shape: w.clone() });
    }
    if only_depends_on(w, ode, &[true, false, false]) {
        return Some(CanonicalType { kind: CanonicalKind::II, shape: w.clone() });
    }
    let x = RatFn::symbol(&ode.indep);
    let xw = w.mul(&x);
    if only_depends_on(&xw, ode, &[false, false, true]) {
        return Some(CanonicalType { kind: CanonicalKind::III, shape: xw });
    }
    let up = RatFn::symbol(&ode.dep_prime());
    if let Ok(g) = w.div(&up) {
        if only_depends_on(&g, ode, &[true, false, false]) {
            return Some(CanonicalType { kind: CanonicalKind::IV, shape: g });
        }
    }
    None
}

/// `w = alpha * u^p * u'` with `alpha` free of `x, u, u'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HFamily {
    #[serde(serialize_with = "crate::solve::ser_ratfn")]
    pub alpha: RatFn,
    pub p: i64,
}

impl HFamily {
    pub fn h(&self, u: &RatFn) -> RatFn {
        self.alpha.mul(&u.pow(self.p).expect("u is nonzero"))
    }
}

/// Split a monomial-over-monomial in `u` as `alpha * u^p`.
fn as_power_of(r: &RatFn, u: &Atom) -> Option<(RatFn, i64)> {
    let split = |p: &Poly| -> Option<(Poly, u32)> {
        let mut deg = None;
        let mut rest = Poly::zero();
        for (m, c) in p.terms() {
            let (e, m0) = m.split(u);
            if deg.is_some_and(|d| d != e) {
                return None;
            }
            deg = Some(e);
            rest.add_term(m0, c.clone());
        }
        Some((rest, deg.unwrap_or(0)))
    };
    let (n, en) = split(r.num())?;
    let (d, ed) = split(r.den())?;
    let alpha = RatFn::from_parts(n, d).ok()?;
    Some((alpha, en as i64 - ed as i64))
}

/// Recognize `w = h(u) u'` with `h` a Laurent monomial in `u`.
pub fn match_h_family(ode: &ComplexOde) -> Option<HFamily> {
    let up = RatFn::symbol(&ode.dep_prime());
    let h = ode.rhs.div(&up).ok()?;
    if !only_depends_on(&h, ode, &[false, true, false]) || ode.rhs.is_zero() {
        return None;
    }
    let u = Atom::Sym(ode.dep.clone());
    let (alpha, p) = as_power_of(&h, &u)?;
    Some(HFamily { alpha, p })
}

/// `w = g(x, u) u'^3` with `g` nonzero.
pub fn match_cubic_factor(ode: &ComplexOde) -> Option<RatFn> {
    if ode.rhs.is_zero() {
        return None;
    }
    let up = RatFn::symbol(&ode.dep_prime());
    let g = ode.rhs.div(&up.pow(3).ok()?).ok()?;
    only_depends_on(&g, ode, &[true, true, false]).then_some(g)
}

/// Coefficients of `w = alpha*u' + beta*u + gamma` when `w` is linear in
/// `u, u'` with coefficients depending on `x` only.
pub fn linear_parts(ode: &ComplexOde) -> Option<[RatFn; 3]> {
    let m = ode.rhs.coeffs_in_symbols(&[ode.dep_prime(), ode.dep.clone()])?;
    let mut out = [RatFn::zero(), RatFn::zero(), RatFn::zero()];
    for (k, c) in m {
        let slot = match k.as_slice() {
            [1, 0] => 0,
            [0, 1] => 1,
            [0, 0] => 2,
            _ => return None,
        };
        out[slot] = c;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode(s: &str) -> ComplexOde {
        ComplexOde::parse(&format!("complex t\nparams k\neq: u'' = {s}")).unwrap()
    }

    #[test]
    fn table_one_rows() {
        assert_eq!(match_canonical_type(&ode("u'^3")).unwrap().kind, CanonicalKind::I);
        assert_eq!(match_canonical_type(&ode("x^2 + 1")).unwrap().kind, CanonicalKind::II);
        assert_eq!(match_canonical_type(&ode("u'^2/x")).unwrap().kind, CanonicalKind::III);
        let iv = match_canonical_type(&ode("x*u'")).unwrap();
        assert_eq!((iv.kind, iv.shape.clone()), (CanonicalKind::IV, RatFn::sym("x")));
        assert!(match_canonical_type(&ode("u'/u^2")).is_none());
    }

    #[test]
    fn h_family_exponents() {
        let h = match_h_family(&ode("u'/u^2")).unwrap();
        assert_eq!((h.alpha, h.p), (RatFn::one(), -2));
        let h = match_h_family(&ode("3*k*u*u'")).unwrap();
        assert_eq!(h.p, 1);
        assert!(match_h_family(&ode("(u + 1)*u'")).is_none());
        assert!(match_h_family(&ode("x*u'")).is_none());
    }

    #[test]
    fn cubic_factor() {
        assert_eq!(match_cubic_factor(&ode("x*u*u'^3")).unwrap(), RatFn::sym("x").mul(&RatFn::sym("u")));
        assert!(match_cubic_factor(&ode("u'^2")).is_none());
    }
}
