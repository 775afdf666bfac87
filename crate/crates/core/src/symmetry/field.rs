use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::expr::{Expr, ExprError, RatFn, Symbol};
use crate::system::vars;

/// A point vector field `xi d/dx + eta1 d/df1 + eta2 d/df2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    pub xi: Expr,
    pub eta1: Expr,
    pub eta2: Expr,
}

impl VectorField {
    pub fn new(xi: Expr, eta1: Expr, eta2: Expr) -> Self {
        VectorField { xi, eta1, eta2 }
    }

    pub fn zero() -> Self {
        VectorField::new(Expr::zero(), Expr::zero(), Expr::zero())
    }

    pub fn components(&self) -> [&Expr; 3] {
        [&self.xi, &self.eta1, &self.eta2]
    }

    pub fn ratfn_components(&self) -> Result<[RatFn; 3], ExprError> {
        Ok([self.xi.to_ratfn()?, self.eta1.to_ratfn()?, self.eta2.to_ratfn()?])
    }

    pub fn from_ratfns(c: &[RatFn; 3]) -> Self {
        VectorField::new(c[0].to_expr(), c[1].to_expr(), c[2].to_expr())
    }

    pub fn normalized(&self) -> Result<Self, ExprError> {
        Ok(VectorField::from_ratfns(&self.ratfn_components()?))
    }

    pub fn is_zero(&self) -> Result<bool, ExprError> {
        Ok(self.ratfn_components()?.iter().all(RatFn::is_zero))
    }

    /// Apply the field as a derivation to a function of (x, f1, f2).
    pub fn apply(&self, g: &RatFn) -> Result<RatFn, ExprError> {
        let c = self.ratfn_components()?;
        apply_components(&c, g)
    }

    /// Rename symbols inside every component.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Expr>) -> Result<Self, ExprError> {
        Ok(VectorField::new(self.xi.substitute(map)?, self.eta1.substitute(map)?, self.eta2.substitute(map)?))
    }
}

pub(crate) fn apply_components(c: &[RatFn; 3], g: &RatFn) -> Result<RatFn, ExprError> {
    let mut out = RatFn::zero();
    for (ci, s) in c.iter().zip([vars::x(), vars::f1(), vars::f2()]) {
        if ci.is_zero() {
            continue;
        }
        let d = g.diff(&s)?;
        if !d.is_zero() {
            out = out.add(&ci.mul(&d));
        }
    }
    Ok(out)
}

impl fmt::Display for VectorField {
    /// Generator notation, e.g. `2*x*d/dx + f1*d/df1 + f2*d/df2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, d) in self.components().into_iter().zip(["d/dx", "d/df1", "d/df2"]) {
            if c.is_zero_const() {
                continue;
            }
            let s = c.to_string();
            let body = if c == &Expr::one() {
                d.to_string()
            } else if matches!(c, Expr::Add(_)) {
                format!("({s})*{d}")
            } else {
                format!("{s}*{d}")
            };
            parts.push(body);
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        f.write_str(&out)
    }
}

impl Serialize for VectorField {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
