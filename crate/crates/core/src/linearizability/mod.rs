//! Cubic-semilinear and geodesic shapes, the linearizability constraints,
//! and the class labels built on them.

mod classify;
mod constraints;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::expr::{CRat, Expr, ExprError, RatFn, Symbol};
use crate::system::{vars, OdeSystem};

pub use classify::{classify, classify_with_basis, ClassLabel, ClassificationReport, ClassifyError, ClassifyOptions, SymmetrySummary};
pub use constraints::{check_linearizability, ConstraintResiduals};

pub const COEFF_NAMES: [&str; 8] = ["A1", "A2", "B1", "B2", "C1", "C2", "D1", "D2"];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LinearizabilityError {
    #[error("not cubically semilinear: {0}")]
    NotCubicSemilinear(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Coefficients of the paired cubic template
///
/// ```text
/// f1'' = A1 p^3 - 3 A2 p^2 q - 3 A1 p q^2 + A2 q^3 + B1 p^2 - 2 B2 p q - B1 q^2 + C1 p - C2 q + D1
/// f2'' = A2 p^3 + 3 A1 p^2 q - 3 A2 p q^2 - A1 q^3 + B2 p^2 + 2 B1 p q - B2 q^2 + C2 p + C1 q + D2
/// ```
///
/// with `p = f1'`, `q = f2'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicCoefficients {
    c: [RatFn; 8],
}

impl CubicCoefficients {
    pub fn new(c: [RatFn; 8]) -> Self {
        CubicCoefficients { c }
    }

    /// The family `A1 = beta`, `A2 = gamma`, everything else zero.
    pub fn beta_gamma(beta: RatFn, gamma: RatFn) -> Self {
        let z = RatFn::zero;
        CubicCoefficients::new([beta, gamma, z(), z(), z(), z(), z(), z()])
    }

    pub fn as_array(&self) -> &[RatFn; 8] {
        &self.c
    }

    pub fn get(&self, name: &str) -> Option<&RatFn> {
        COEFF_NAMES.iter().position(|n| *n == name).map(|i| &self.c[i])
    }

    /// Rebuild the two right-hand sides from the template.
    pub fn rebuild(&self) -> [RatFn; 2] {
        let [a1, a2, b1, b2, c1, c2, d1, d2] = &self.c;
        let p = RatFn::symbol(&vars::df1());
        let q = RatFn::symbol(&vars::df2());
        let mono = |i: i64, j: i64| p.pow(i).unwrap().mul(&q.pow(j).unwrap());
        let k = |n: i64| CRat::from_int(n);
        let sum = |terms: Vec<(RatFn, i64, (i64, i64))>| {
            terms.into_iter().fold(RatFn::zero(), |acc, (c, n, (i, j))| acc.add(&c.scale(&k(n)).mul(&mono(i, j))))
        };
        let w1 = sum(vec![
            (a1.clone(), 1, (3, 0)),
            (a2.clone(), -3, (2, 1)),
            (a1.clone(), -3, (1, 2)),
            (a2.clone(), 1, (0, 3)),
            (b1.clone(), 1, (2, 0)),
            (b2.clone(), -2, (1, 1)),
            (b1.clone(), -1, (0, 2)),
            (c1.clone(), 1, (1, 0)),
            (c2.clone(), -1, (0, 1)),
            (d1.clone(), 1, (0, 0)),
        ]);
        let w2 = sum(vec![
            (a2.clone(), 1, (3, 0)),
            (a1.clone(), 3, (2, 1)),
            (a2.clone(), -3, (1, 2)),
            (a1.clone(), -1, (0, 3)),
            (b2.clone(), 1, (2, 0)),
            (b1.clone(), 2, (1, 1)),
            (b2.clone(), -1, (0, 2)),
            (c2.clone(), 1, (1, 0)),
            (c1.clone(), 1, (0, 1)),
            (d2.clone(), 1, (0, 0)),
        ]);
        [w1, w2]
    }
}

impl Serialize for CubicCoefficients {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(8))?;
        for (n, c) in COEFF_NAMES.iter().zip(&self.c) {
            m.serialize_entry(n, &c.to_expr().to_string())?;
        }
        m.end()
    }
}

fn derivative_coeffs(w: &RatFn) -> Result<std::collections::BTreeMap<Vec<u32>, RatFn>, LinearizabilityError> {
    let d = vars::derivs();
    let m = w.coeffs_in_symbols(&d).ok_or_else(|| {
        LinearizabilityError::NotCubicSemilinear("right-hand side is not polynomial in f1', f2'".into())
    })?;
    if let Some(k) = m.keys().find(|k| k[0] + k[1] > 3) {
        return Err(LinearizabilityError::NotCubicSemilinear(format!(
            "degree {} in the first derivatives",
            k[0] + k[1]
        )));
    }
    Ok(m)
}

/// Read off the eight coefficients and check the paired template.
pub fn extract_cubic_coefficients(sys: &OdeSystem) -> Result<CubicCoefficients, LinearizabilityError> {
    let m1 = derivative_coeffs(sys.rhs(0))?;
    let m2 = derivative_coeffs(sys.rhs(1))?;
    let get = |m: &std::collections::BTreeMap<Vec<u32>, RatFn>, i: u32, j: u32| {
        m.get(&vec![i, j]).cloned().unwrap_or_default()
    };
    let c = CubicCoefficients::new([
        get(&m1, 3, 0),
        get(&m1, 0, 3),
        get(&m1, 2, 0),
        get(&m2, 2, 0),
        get(&m1, 1, 0),
        get(&m2, 1, 0),
        get(&m1, 0, 0),
        get(&m2, 0, 0),
    ]);
    let [r1, r2] = c.rebuild();
    for (k, (r, w)) in [(r1, sys.rhs(0)), (r2, sys.rhs(1))].iter().enumerate() {
        if !r.sub(w).is_zero() {
            return Err(LinearizabilityError::NotCubicSemilinear(format!(
                "equation {} does not follow the paired cubic template",
                k + 1
            )));
        }
    }
    Ok(c)
}

/// The forcing pair of a geodesic-type system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeodesicForm {
    pub omega1: Expr,
    pub omega2: Expr,
}

/// Match `f1'' = -f1'^2 + f2'^2 + W1`, `f2'' = -2 f1' f2' + W2` with `W`
/// affine in the first derivatives and coefficients depending only on `x`
/// and parameters.
pub fn detect_geodesic_form(sys: &OdeSystem) -> Result<Option<GeodesicForm>, ExprError> {
    let p = RatFn::symbol(&vars::df1());
    let q = RatFn::symbol(&vars::df2());
    let quad1 = q.mul(&q).sub(&p.mul(&p));
    let quad2 = p.mul(&q).scale(&CRat::from_int(-2));
    let om1 = sys.rhs(0).sub(&quad1);
    let om2 = sys.rhs(1).sub(&quad2);
    let d = vars::derivs();
    let deps: [Symbol; 2] = vars::deps();
    for om in [&om1, &om2] {
        let Some(m) = om.coeffs_in_symbols(&d) else {
            return Ok(None);
        };
        for (k, c) in &m {
            if k[0] + k[1] > 1 || deps.iter().any(|s| c.depends_on(s)) {
                return Ok(None);
            }
        }
    }
    Ok(Some(GeodesicForm { omega1: om1.to_expr(), omega2: om2.to_expr() }))
}
