use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use super::{apply_components, SymmetryError, VectorField};
use crate::expr::{CRat, ExprError, Monomial, RatFn};
use crate::linalg;

/// `[X, Y]` with components `X(Y^k) - Y(X^k)`.
pub fn commutator(x: &VectorField, y: &VectorField) -> Result<VectorField, ExprError> {
    let a = x.ratfn_components()?;
    let b = y.ratfn_components()?;
    Ok(VectorField::from_ratfns(&bracket(&a, &b)?))
}

fn bracket(a: &[RatFn; 3], b: &[RatFn; 3]) -> Result<[RatFn; 3], ExprError> {
    let mut out = [RatFn::zero(), RatFn::zero(), RatFn::zero()];
    for k in 0..3 {
        out[k] = apply_components(a, &b[k])?.sub(&apply_components(b, &a[k])?);
    }
    Ok(out)
}

/// One nonzero bracket `[X_i, X_j] = sum c_k X_k` (indices are zero-based;
/// display is one-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<(usize, CRat)>,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[X{},X{}] = ", self.i + 1, self.j + 1)?;
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = if neg { -c } else { c.clone() };
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mag.is_one() {
                write!(f, "X{}", k + 1)?;
            } else if mag.is_real() {
                write!(f, "{mag}*X{}", k + 1)?;
            } else {
                write!(f, "({mag})*X{}", k + 1)?;
            }
        }
        Ok(())
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `c[i][j][k]` with `[X_i, X_j] = sum_k c[i][j][k] X_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    pub c: Vec<Vec<Vec<CRat>>>,
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &CRat {
        &self.c[i][j][k]
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().flatten().flatten().all(CRat::is_zero)
    }

    /// Nonzero brackets with `i < j`.
    pub fn relations(&self) -> Vec<Relation> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let terms: Vec<(usize, CRat)> = self.c[i][j]
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (k, c.clone()))
                    .collect();
                if !terms.is_empty() {
                    out.push(Relation { i, j, terms });
                }
            }
        }
        out
    }
}

#[derive(Serialize)]
struct Entry {
    i: usize,
    j: usize,
    k: usize,
    value: String,
}

/// Serialized as the nonzero `c[i][j][k]` with `i < j`, indices from 1.
impl Serialize for StructureConstants {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = self
            .relations()
            .into_iter()
            .flat_map(|r| r.terms.into_iter().map(move |(k, c)| Entry { i: r.i + 1, j: r.j + 1, k: k + 1, value: c.to_string() }))
            .collect();
        entries.serialize(s)
    }
}

/// Coefficient vectors of polynomial fields over a shared monomial index.
fn coordinates(fields: &[[RatFn; 3]]) -> Result<(Vec<Vec<CRat>>, usize), SymmetryError> {
    let mut index: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
    let mut sparse = Vec::with_capacity(fields.len());
    for (n, f) in fields.iter().enumerate() {
        let mut v = Vec::new();
        for (slot, c) in f.iter().enumerate() {
            let Some(p) = c.as_poly() else {
                return Err(SymmetryError::NonPolynomialField(n + 1));
            };
            for (m, coef) in p.terms() {
                let len = index.len();
                let r = *index.entry((slot, m.clone())).or_insert(len);
                v.push((r, coef.clone()));
            }
        }
        sparse.push(v);
    }
    let dim = index.len();
    let dense = sparse
        .into_iter()
        .map(|v| {
            let mut d = vec![CRat::zero(); dim];
            for (r, c) in v {
                d[r] = c;
            }
            d
        })
        .collect();
    Ok((dense, dim))
}

/// Express every pairwise commutator in the basis by an exact solve.
pub fn structure_constants(fields: &[VectorField]) -> Result<StructureConstants, SymmetryError> {
    if fields.is_empty() {
        return Err(SymmetryError::EmptyBasis);
    }
    let n = fields.len();
    let comps: Vec<[RatFn; 3]> = fields.iter().map(|f| f.ratfn_components()).collect::<Result<_, _>>()?;
    let mut brackets = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            brackets.insert((i, j), bracket(&comps[i], &comps[j])?);
        }
    }
    let mut all = comps.clone();
    all.extend(brackets.values().cloned());
    let (vecs, dim) = coordinates(&all)?;
    // Columns are the basis fields, rows the monomial coordinates.
    let a: Vec<Vec<CRat>> = (0..dim).map(|r| (0..n).map(|k| vecs[k][r].clone()).collect()).collect();
    let mut c = vec![vec![vec![CRat::zero(); n]; n]; n];
    for (idx, (&(i, j), _)) in brackets.iter().enumerate() {
        let rhs = &vecs[n + idx];
        let sol = linalg::solve(&a, rhs, n).ok_or(SymmetryError::NotClosed(i + 1, j + 1))?;
        for k in 0..n {
            c[j][i][k] = -&sol[k];
            c[i][j][k] = sol[k].clone();
        }
    }
    Ok(StructureConstants { c })
}

/// `[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y] = 0` for every triple.
pub fn jacobi_holds(fields: &[VectorField]) -> Result<bool, ExprError> {
    let comps: Vec<[RatFn; 3]> = fields.iter().map(|f| f.ratfn_components()).collect::<Result<_, _>>()?;
    let n = comps.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (x, y, z) = (&comps[i], &comps[j], &comps[k]);
                let a = bracket(&bracket(x, y)?, z)?;
                let b = bracket(&bracket(y, z)?, x)?;
                let c = bracket(&bracket(z, x)?, y)?;
                if (0..3).any(|m| !a[m].add(&b[m]).add(&c[m]).is_zero()) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
