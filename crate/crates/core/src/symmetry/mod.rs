//! Lie point symmetries of second-order systems: prolongation, the
//! determining equations under a polynomial ansatz, and the bracket
//! structure of the resulting algebra.

mod algebra;
mod field;

use std::collections::BTreeMap;

use serde::Serialize;

pub use algebra::{commutator, jacobi_holds, structure_constants, Relation, StructureConstants};
pub(crate) use field::apply_components;
pub use field::VectorField;

use crate::expr::{Atom, CRat, Expr, ExprError, Monomial, Poly, RatFn, Symbol};
use crate::linalg;
use crate::system::{vars, OdeSystem};

pub const DEFAULT_DEGREE_CAP: u32 = 2;
pub const MAX_DEGREE_CAP: u32 = 4;
/// Default bound on `rows * columns` of the determining system.
pub const DEFAULT_MAX_ENTRIES: usize = 20_000_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("degree cap must lie in 1..={MAX_DEGREE_CAP}, got {0}")]
    InvalidDegree(u32),
    #[error("determining system has {rows} x {cols} entries, above the limit of {limit}")]
    AnsatzOverflow { rows: usize, cols: usize, limit: usize },
    #[error("[X{0},X{1}] is not in the span of the basis")]
    NotClosed(usize, usize),
    #[error("generator X{0} is not polynomial")]
    NonPolynomialField(usize),
    #[error("generator component depends on a first derivative")]
    DerivativeInField,
    #[error("empty basis")]
    EmptyBasis,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryOptions {
    pub degree_cap: u32,
    pub max_entries: usize,
}

impl Default for SymmetryOptions {
    fn default() -> Self {
        SymmetryOptions { degree_cap: DEFAULT_DEGREE_CAP, max_entries: DEFAULT_MAX_ENTRIES }
    }
}

/// Result of [`is_symmetry`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryCheck {
    pub holds: bool,
    pub residuals: [Expr; 2],
}

/// Generators found under a polynomial ansatz. The dimension is a lower
/// bound for the full symmetry algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryBasis {
    pub fields: Vec<VectorField>,
    pub degree_cap: u32,
    pub nullspace_dim: usize,
    pub equations: usize,
    pub unknowns: usize,
}

impl SymmetryBasis {
    pub fn dimension(&self) -> usize {
        self.fields.len()
    }
}

/// Partial derivatives of one right-hand side with respect to
/// `x, f1, f2, f1', f2'`.
struct Partials {
    w: RatFn,
    d: [RatFn; 5],
}

impl Partials {
    fn new(w: &RatFn) -> Result<Self, ExprError> {
        let s = vars::state();
        Ok(Partials {
            w: w.clone(),
            d: [w.diff(&s[0])?, w.diff(&s[1])?, w.diff(&s[2])?, w.diff(&s[3])?, w.diff(&s[4])?],
        })
    }
}

/// Total derivative along solutions, with second derivatives replaced by
/// the right-hand sides.
fn total_derivative(g: &RatFn, w: &[RatFn; 2]) -> Result<RatFn, ExprError> {
    let s = vars::state();
    let p = RatFn::symbol(&s[3]);
    let q = RatFn::symbol(&s[4]);
    let mult = [RatFn::one(), p, q, w[0].clone(), w[1].clone()];
    let mut out = RatFn::zero();
    for (sym, m) in s.iter().zip(&mult) {
        let d = g.diff(sym)?;
        if !d.is_zero() {
            out = out.add(&m.mul(&d));
        }
    }
    Ok(out)
}

struct Prolonged {
    first: [RatFn; 2],
    second: [RatFn; 2],
}

fn prolong(c: &[RatFn; 3], w: &[RatFn; 2]) -> Result<Prolonged, ExprError> {
    let derivs = vars::derivs();
    let dxi = total_derivative(&c[0], w)?;
    let mut first = [RatFn::zero(), RatFn::zero()];
    let mut second = [RatFn::zero(), RatFn::zero()];
    for i in 0..2 {
        first[i] = total_derivative(&c[i + 1], w)?.sub(&RatFn::symbol(&derivs[i]).mul(&dxi));
        second[i] = total_derivative(&first[i], w)?.sub(&w[i].mul(&dxi));
    }
    Ok(Prolonged { first, second })
}

fn residuals(c: &[RatFn; 3], parts: &[Partials; 2]) -> Result<[RatFn; 2], ExprError> {
    let w = [parts[0].w.clone(), parts[1].w.clone()];
    let pr = prolong(c, &w)?;
    let mult = [&c[0], &c[1], &c[2], &pr.first[0], &pr.first[1]];
    let mut out = [RatFn::zero(), RatFn::zero()];
    for (i, part) in parts.iter().enumerate() {
        let mut r = pr.second[i].clone();
        for (m, d) in mult.iter().zip(&part.d) {
            if !m.is_zero() && !d.is_zero() {
                r = r.sub(&m.mul(d));
            }
        }
        out[i] = r;
    }
    Ok(out)
}

fn check_point_field(c: &[RatFn; 3]) -> Result<(), SymmetryError> {
    let d = vars::derivs();
    if c.iter().any(|ci| d.iter().any(|s| ci.depends_on(s))) {
        return Err(SymmetryError::DerivativeInField);
    }
    Ok(())
}

fn partials(sys: &OdeSystem) -> Result<[Partials; 2], ExprError> {
    Ok([Partials::new(sys.rhs(0))?, Partials::new(sys.rhs(1))?])
}

/// The second-prolongation coefficients `eta1^(2)`, `eta2^(2)` on solutions
/// of the system.
pub fn prolong_coefficients(field: &VectorField, sys: &OdeSystem) -> Result<[Expr; 2], SymmetryError> {
    let c = field.ratfn_components()?;
    check_point_field(&c)?;
    let pr = prolong(&c, sys.rhs_pair())?;
    Ok([pr.second[0].to_expr(), pr.second[1].to_expr()])
}

/// Check the symmetry condition exactly.
pub fn is_symmetry(field: &VectorField, sys: &OdeSystem) -> Result<SymmetryCheck, SymmetryError> {
    let c = field.ratfn_components()?;
    check_point_field(&c)?;
    let r = residuals(&c, &partials(sys)?)?;
    Ok(SymmetryCheck {
        holds: r.iter().all(RatFn::is_zero),
        residuals: [r[0].to_expr(), r[1].to_expr()],
    })
}

/// Monomials in `x, f1, f2` of total degree at most `cap`, graded, then
/// lexicographic with `x > f1 > f2`.
pub(crate) fn ansatz_monomials(cap: u32) -> Vec<Poly> {
    let [x, f1, f2] = [vars::x(), vars::f1(), vars::f2()];
    let mut out = Vec::new();
    for deg in 0..=cap {
        for a in (0..=deg).rev() {
            for b in (0..=deg - a).rev() {
                let c = deg - a - b;
                let mut m = Monomial::one();
                for (s, e) in [(&x, a), (&f1, b), (&f2, c)] {
                    if e > 0 {
                        m = m.mul(&Monomial::of(Atom::Sym(s.clone()), e));
                    }
                }
                out.push(Poly::term(m, CRat::one()));
            }
        }
    }
    out
}

fn poly_lcm(a: &Poly, b: &Poly) -> Poly {
    if a.is_one() {
        return b.clone();
    }
    if b.is_one() {
        return a.clone();
    }
    let g = Poly::gcd(a, b);
    (a * &b.exact_div(&g).expect("gcd divides")).monic()
}

pub fn find_symmetries(sys: &OdeSystem, degree_cap: u32) -> Result<SymmetryBasis, SymmetryError> {
    find_symmetries_with(sys, &SymmetryOptions { degree_cap, ..SymmetryOptions::default() })
}

/// Solve the determining equations with `xi`, `eta1`, `eta2` polynomial of
/// total degree at most `degree_cap` in `x, f1, f2`.
pub fn find_symmetries_with(sys: &OdeSystem, opts: &SymmetryOptions) -> Result<SymmetryBasis, SymmetryError> {
    if opts.degree_cap == 0 || opts.degree_cap > MAX_DEGREE_CAP {
        return Err(SymmetryError::InvalidDegree(opts.degree_cap));
    }
    let monos = ansatz_monomials(opts.degree_cap);
    let ncols = 3 * monos.len();
    let parts = partials(sys)?;
    let mut cols: Vec<[RatFn; 2]> = Vec::with_capacity(ncols);
    for m in &monos {
        for slot in 0..3 {
            let mut c = [RatFn::zero(), RatFn::zero(), RatFn::zero()];
            c[slot] = RatFn::from_poly(m.clone());
            cols.push(residuals(&c, &parts)?);
        }
    }
    let mut lcm = [Poly::one(), Poly::one()];
    for col in &cols {
        for i in 0..2 {
            lcm[i] = poly_lcm(&lcm[i], col[i].den());
        }
    }
    let mut row_index: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
    let mut entries: Vec<(usize, usize, CRat)> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        for i in 0..2 {
            if col[i].is_zero() {
                continue;
            }
            let scale = lcm[i].exact_div(col[i].den()).expect("lcm is a multiple");
            let num = col[i].num() * &scale;
            for (m, c) in num.terms() {
                let n = row_index.len();
                let r = *row_index.entry((i, m.clone())).or_insert(n);
                entries.push((r, j, c.clone()));
            }
        }
    }
    let nrows = row_index.len();
    if nrows.saturating_mul(ncols) > opts.max_entries {
        return Err(SymmetryError::AnsatzOverflow { rows: nrows, cols: ncols, limit: opts.max_entries });
    }
    let mut rows = vec![vec![CRat::zero(); ncols]; nrows];
    for (r, j, c) in entries {
        rows[r][j] = c;
    }
    let null = linalg::nullspace(&rows, ncols);
    let mut graded: Vec<(u32, VectorField)> = null
        .iter()
        .map(|v| {
            let v = linalg::primitive_integer(v);
            let mut comps = [Poly::zero(), Poly::zero(), Poly::zero()];
            for (j, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    comps[j % 3] = &comps[j % 3] + &monos[j / 3].scale(c);
                }
            }
            let deg = comps.iter().map(Poly::total_degree).max().unwrap_or(0);
            (deg, VectorField::from_ratfns(&comps.map(RatFn::from_poly)))
        })
        .collect();
    // Lowest degree first; the echelon order breaks ties.
    graded.sort_by_key(|(d, _)| *d);
    let fields = graded.into_iter().map(|(_, f)| f).collect();
    Ok(SymmetryBasis {
        fields,
        degree_cap: opts.degree_cap,
        nullspace_dim: null.len(),
        equations: nrows,
        unknowns: ncols,
    })
}

/// Symbols the generator components may depend on.
pub fn point_symbols() -> [Symbol; 3] {
    [vars::x(), vars::f1(), vars::f2()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::parser::parse_vector_field;

    fn vf(s: &str) -> VectorField {
        parse_vector_field(s).unwrap()
    }

    #[test]
    fn translation_prolongs_trivially() {
        let p = prolong_coefficients(&vf("xi=1; eta1=0; eta2=0"), &corpus::system("sys3")).unwrap();
        assert_eq!(p, [Expr::zero(), Expr::zero()]);
    }

    #[test]
    fn declared_generators_are_symmetries() {
        for name in ["sys1", "sys3", "sys4", "sys5", "sys6", "sys7"] {
            let s = corpus::system(name);
            for nf in &s.fields {
                assert!(is_symmetry(&nf.field, &s).unwrap().holds, "{name} {}", nf.name);
            }
        }
    }

    #[test]
    fn x_translation_breaks_sys4() {
        let c = is_symmetry(&vf("xi=1; eta1=0; eta2=0"), &corpus::system("sys4")).unwrap();
        assert!(!c.holds);
    }

    #[test]
    fn sys3_basis() {
        let b = find_symmetries(&corpus::system("sys3"), 2).unwrap();
        let want = ["xi=1; eta1=0; eta2=0", "xi=0; eta1=1; eta2=0", "xi=0; eta1=0; eta2=1", "xi=2*x; eta1=f1; eta2=f2"];
        let want: Vec<VectorField> = want.iter().map(|s| vf(s).normalized().unwrap()).collect();
        assert_eq!(b.fields, want);
    }

    #[test]
    fn sys7_basis() {
        let b = find_symmetries(&corpus::system("sys7"), 2).unwrap();
        let want = ["xi=1; eta1=0; eta2=0", "xi=x; eta1=-f1; eta2=-f2", "xi=x^2; eta1=2 - 2*x*f1; eta2=-2*x*f2"];
        let want: Vec<VectorField> = want.iter().map(|s| vf(s).normalized().unwrap()).collect();
        assert_eq!(b.fields, want);
    }

    #[test]
    fn free_particle_has_fifteen() {
        let b = find_symmetries(&corpus::system("free"), 2).unwrap();
        assert_eq!(b.dimension(), 15);
    }

    #[test]
    fn degree_cap_is_validated() {
        let s = corpus::system("free");
        assert_eq!(find_symmetries(&s, 0).unwrap_err(), SymmetryError::InvalidDegree(0));
        let tight = SymmetryOptions { degree_cap: 2, max_entries: 10 };
        assert!(matches!(find_symmetries_with(&s, &tight), Err(SymmetryError::AnsatzOverflow { .. })));
    }
}
