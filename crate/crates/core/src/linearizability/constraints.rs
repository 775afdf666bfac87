//! The four compatibility constraints on the cubic coefficients, stored as
//! a table of signed terms `k * [factor] * d(target)`.
//!
//! Each term is written `<sign><k><factor?><target>,<derivatives>` where the
//! derivative list is a run of `x`, `f1`, `f2`; e.g. `-6D1A2,f2` means
//! `-6 * D1 * dA2/df2` and `+C1,f1f1` means `d^2 C1 / df1^2`.

use std::collections::HashMap;

use serde::Serialize;

use super::CubicCoefficients;
use crate::expr::{CRat, Expr, ExprError, RatFn, Symbol};
use crate::system::vars;

// `+4C2C2,f2` in the last row makes the C-terms the imaginary part of
// `8 C dC/du`, matching the real part in the third row.
const TABLE: [&str; 4] = [
    "+12A1,xx +12C1A1,x -12C2A2,x -6D1A1,f1 -6D1A2,f2 +6D2A2,f1 -6D2A1,f2 +12A1C1,x -12A2C2,x \
     +C1,f1f1 -C1,f2f2 +2C2,f1f2 -12A1D1,f1 -12A1D2,f2 +12A2D2,f1 -12A2D1,f2 +2B1C1,f1 \
     +2B1C2,f2 -2B2C2,f1 +2B2C1,f2 -8B1B1,x +8B2B2,x -4B1,xf1 -4B2,xf2",
    "+12A2,xx +12C2A1,x +12C1A2,x -6D2A1,f1 -6D2A2,f2 -6D1A2,f1 +6D1A1,f2 +12A2C1,x +12A1C2,x \
     +C2,f1f1 -C2,f2f2 -2C1,f1f2 -12A2D1,f1 -12A2D2,f2 -12A1D2,f1 +12A1D1,f2 +2B2C1,f1 \
     +2B2C2,f2 +2B1C2,f1 -2B1C1,f2 -8B2B1,x -8B1B2,x -4B2,xf1 +4B1,xf2",
    "+24D1A1,x -24D2A2,x -6D1B1,f1 -6D1B2,f2 +6D2B2,f1 -6D2B1,f2 +12A1D1,x -12A2D2,x +4B1,xx \
     -4C1,xf1 -4C2,xf2 -6B1D1,f1 -6B1D2,f2 +6B2D2,f1 -6B2D1,f2 +3D1,f1f1 -3D1,f2f2 +6D2,f1f2 \
     +4C1C1,f1 +4C1C2,f2 -4C2C2,f1 +4C2C1,f2 -4C1B1,x +4C2B2,x",
    "+24D2A1,x +24D1A2,x -6D2B1,f1 -6D2B2,f2 -6D1B2,f1 +6D1B1,f2 +12A2D1,x +12A1D2,x +4B2,xx \
     -4C2,xf1 +4C1,xf2 -6B2D1,f1 -6B2D2,f2 -6B1D2,f1 +6B1D1,f2 +3D2,f1f1 -3D2,f2f2 -6D1,f1f2 \
     +4C2C1,f1 +4C2C2,f2 +4C1C2,f1 -4C1C1,f2 -4C2B1,x -4C1B2,x",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Term {
    pub k: i64,
    pub factor: Option<usize>,
    pub target: usize,
    pub derivs: Vec<Symbol>,
}

/// Index into `CubicCoefficients::as_array` order `A1 A2 B1 B2 C1 C2 D1 D2`.
fn coeff_index(name: &str) -> Option<usize> {
    const NAMES: [&str; 8] = ["A1", "A2", "B1", "B2", "C1", "C2", "D1", "D2"];
    NAMES.iter().position(|n| *n == name)
}

fn parse_term(src: &str) -> Term {
    let (sign, rest) = match src.as_bytes()[0] {
        b'+' => (1, &src[1..]),
        b'-' => (-1, &src[1..]),
        _ => panic!("term `{src}` lacks a sign"),
    };
    let digits = rest.chars().take_while(char::is_ascii_digit).count();
    let k: i64 = if digits == 0 { 1 } else { rest[..digits].parse().unwrap() };
    let (names, ds) = rest[digits..].split_once(',').expect("term has derivatives");
    let (factor, target) = match names.len() {
        2 => (None, coeff_index(names).unwrap()),
        4 => (Some(coeff_index(&names[..2]).unwrap()), coeff_index(&names[2..]).unwrap()),
        _ => panic!("bad coefficient list in `{src}`"),
    };
    let mut derivs = Vec::new();
    let mut d = ds;
    while !d.is_empty() {
        if let Some(r) = d.strip_prefix('x') {
            derivs.push(vars::x());
            d = r;
        } else if let Some(r) = d.strip_prefix("f1") {
            derivs.push(vars::f1());
            d = r;
        } else if let Some(r) = d.strip_prefix("f2") {
            derivs.push(vars::f2());
            d = r;
        } else {
            panic!("bad derivative list in `{src}`");
        }
    }
    Term { k: sign * k, factor, target, derivs }
}

pub(crate) fn table() -> Vec<Vec<Term>> {
    TABLE.iter().map(|row| row.split_whitespace().map(parse_term).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintResiduals {
    pub residuals: [Expr; 4],
    pub verdict: bool,
}

/// Evaluate the four constraints on a coefficient set.
pub fn check_linearizability(c: &CubicCoefficients) -> Result<ConstraintResiduals, ExprError> {
    let coeffs = c.as_array();
    let mut cache: HashMap<(usize, Vec<Symbol>), RatFn> = HashMap::new();
    let mut out = Vec::with_capacity(4);
    for row in table() {
        let mut acc = RatFn::zero();
        for t in row {
            let key = (t.target, t.derivs.clone());
            let d = match cache.get(&key) {
                Some(d) => d.clone(),
                None => {
                    let mut d = coeffs[t.target].clone();
                    for s in &t.derivs {
                        d = d.diff(s)?;
                    }
                    cache.insert(key, d.clone());
                    d
                }
            };
            if d.is_zero() {
                continue;
            }
            let mut term = d.scale(&CRat::from_int(t.k));
            if let Some(f) = t.factor {
                term = term.mul(&coeffs[f]);
            }
            acc = acc.add(&term);
        }
        out.push(acc);
    }
    let verdict = out.iter().all(RatFn::is_zero);
    let residuals: Vec<Expr> = out.iter().map(RatFn::to_expr).collect();
    Ok(ConstraintResiduals { residuals: residuals.try_into().unwrap(), verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape() {
        let t = table();
        assert_eq!(t.iter().map(Vec::len).collect::<Vec<_>>(), vec![24, 24, 24, 24]);
        assert_eq!(
            parse_term("-6D1A2,f2"),
            Term { k: -6, factor: Some(6), target: 1, derivs: vec![vars::f2()] }
        );
        assert_eq!(parse_term("+C1,f1f1").derivs.len(), 2);
    }
}
