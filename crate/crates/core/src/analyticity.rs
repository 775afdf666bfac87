//! Cauchy-Riemann analysis: when `w1 + i*w2` is an analytic function of
//! `u = f1 + i*f2` and `u' = f1' + i*f2'`, the real system is the realified
//! scalar complex ODE `u'' = w(x, u, u')`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::expr::{Atom, CRat, Expr, ExprError, Func, Poly, RatFn, Symbol};
use crate::parser::{parse_complex_ode, ComplexDocument, ParseError};
use crate::system::{vars, OdeSystem, SystemError};

#[derive(Debug, thiserror::Error)]
pub enum AnalyticityError {
    #[error("the system does not satisfy the Cauchy-Riemann conditions")]
    NotAnalytic,
    #[error("conjugate variable survived complexification: {0}")]
    ConjugateResidue(String),
    #[error("cannot realify transcendental atom `{0}`")]
    TranscendentalAtom(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub const CR_PAIRS: [&str; 4] = [
    "dw1/df1 - dw2/df2",
    "dw1/df2 + dw2/df1",
    "dw1/df1' - dw2/df2'",
    "dw1/df2' + dw2/df1'",
];

#[derive(Clone, Debug, Serialize)]
pub struct CrReport {
    pub residuals: [Expr; 4],
    pub verdict: bool,
    pub violated: Vec<&'static str>,
}

/// The four real Cauchy-Riemann identities in `(f1, f2)` and `(f1', f2')`.
pub fn cr_check(sys: &OdeSystem) -> Result<CrReport, ExprError> {
    let [w1, w2] = sys.rhs_pair();
    let mut residuals = Vec::with_capacity(4);
    for (a, b) in [(vars::f1(), vars::f2()), (vars::df1(), vars::df2())] {
        residuals.push(w1.diff(&a)?.sub(&w2.diff(&b)?));
        residuals.push(w1.diff(&b)?.add(&w2.diff(&a)?));
    }
    let violated = residuals
        .iter()
        .zip(CR_PAIRS)
        .filter(|(r, _)| !r.is_zero())
        .map(|(_, n)| n)
        .collect::<Vec<_>>();
    let residuals: Vec<Expr> = residuals.iter().map(RatFn::to_expr).collect();
    Ok(CrReport {
        verdict: violated.is_empty(),
        violated,
        residuals: residuals.try_into().unwrap(),
    })
}

/// A scalar complex ODE `dep'' = rhs(indep, dep, dep')`.
///
/// Parameters are real symbols; the imaginary unit is a constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexOde {
    pub indep: Symbol,
    pub dep: Symbol,
    pub params: Vec<Symbol>,
    pub rhs: RatFn,
}

impl ComplexOde {
    pub fn new(indep: &str, dep: &str, rhs: RatFn, params: Vec<Symbol>) -> Result<Self, AnalyticityError> {
        let ode = ComplexOde { indep: Symbol::new(indep), dep: Symbol::new(dep), params, rhs };
        for s in ode.rhs.free_symbols() {
            if s != ode.indep && s != ode.dep && s != ode.dep_prime() && !ode.params.contains(&s) {
                return Err(AnalyticityError::UndeclaredSymbol(s.to_string()));
            }
        }
        Ok(ode)
    }

    /// `u'' = rhs` in the canonical variables `x`, `u`.
    pub fn in_u(rhs: RatFn, params: Vec<Symbol>) -> Result<Self, AnalyticityError> {
        ComplexOde::new("x", "u", rhs, params)
    }

    pub fn parse(text: &str) -> Result<Self, AnalyticityError> {
        ComplexOde::from_document(&parse_complex_ode(text)?)
    }

    pub fn from_document(doc: &ComplexDocument) -> Result<Self, AnalyticityError> {
        ComplexOde::new(doc.indep.name(), doc.dep.name(), doc.rhs.to_ratfn()?, doc.params.clone())
    }

    pub fn dep_prime(&self) -> Symbol {
        self.dep.primed()
    }

    pub fn rhs_expr(&self) -> Expr {
        self.rhs.to_expr()
    }

    /// Rename the variables, e.g. to present a target equation in `(chi, U)`.
    pub fn renamed(&self, indep: &str, dep: &str) -> Result<Self, AnalyticityError> {
        let mut m = BTreeMap::new();
        m.insert(self.indep.clone(), RatFn::sym(indep));
        m.insert(self.dep.clone(), RatFn::sym(dep));
        m.insert(self.dep_prime(), RatFn::symbol(&Symbol::new(dep).primed()));
        ComplexOde::new(indep, dep, self.rhs.subs(&m)?, self.params.clone())
    }
}

impl fmt::Display for ComplexOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'' = {}", self.dep, self.rhs.to_expr())
    }
}

impl Serialize for ComplexOde {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn conj_symbols() -> (Symbol, Symbol) {
    (Symbol::new("ubar"), Symbol::new("ubar'"))
}

/// `w = w1 + i*w2` written in `u, u'` after eliminating the conjugates.
pub fn complexify(sys: &OdeSystem) -> Result<ComplexOde, AnalyticityError> {
    if !cr_check(sys)?.verdict {
        return Err(AnalyticityError::NotAnalytic);
    }
    complexify_unchecked(sys)
}

pub(crate) fn complexify_unchecked(sys: &OdeSystem) -> Result<ComplexOde, AnalyticityError> {
    let (ub, ubp) = conj_symbols();
    let half = CRat::ratio(1, 2);
    let half_over_i = &half * &CRat::i().inv().unwrap();
    let u = RatFn::sym("u");
    let up = RatFn::sym("u'");
    let v = RatFn::symbol(&ub);
    let vp = RatFn::symbol(&ubp);
    let mut m = BTreeMap::new();
    m.insert(vars::f1(), u.add(&v).scale(&half));
    m.insert(vars::f2(), u.sub(&v).scale(&half_over_i));
    m.insert(vars::df1(), up.add(&vp).scale(&half));
    m.insert(vars::df2(), up.sub(&vp).scale(&half_over_i));
    let [w1, w2] = sys.rhs_pair();
    let w = w1.add(&w2.scale(&CRat::i())).subs(&m)?;
    let residue: Vec<String> = [ub, ubp].iter().filter(|s| w.depends_on(s)).map(|s| s.to_string()).collect();
    if !residue.is_empty() {
        return Err(AnalyticityError::ConjugateResidue(residue.join(", ")));
    }
    ComplexOde::in_u(w, sys.params().to_vec())
}

fn check_realifiable(p: &Poly) -> Result<(), AnalyticityError> {
    for a in p.atoms() {
        if let Atom::Call(_, arg) = &a {
            if arg.conj() != **arg {
                return Err(AnalyticityError::TranscendentalAtom(RatFn::from_poly(Poly::atom(a)).to_expr().to_string()));
            }
        }
    }
    Ok(())
}

/// Real and imaginary parts of a rational function in real symbols.
fn split_ratfn(r: &RatFn) -> Result<(RatFn, RatFn), ExprError> {
    let dc = r.den().conj();
    let (re, im) = (r.num() * &dc).split_re_im();
    let d = r.den() * &dc;
    Ok((RatFn::from_parts(re, d.clone())?, RatFn::from_parts(im, d)?))
}

/// Rewrite `exp`, `sin`, `cos` of complex arguments through functions of
/// real arguments.
fn expand_calls(p: &Poly) -> Result<RatFn, AnalyticityError> {
    let i = RatFn::constant(CRat::i());
    let half = CRat::ratio(1, 2);
    let call = |f: Func, a: &RatFn| RatFn::call(f, a.clone());
    let mut out = RatFn::zero();
    for (m, c) in p.terms() {
        let mut t = RatFn::constant(c.clone());
        for (a, e) in m.factors() {
            let img = match a {
                Atom::Call(f, arg) if arg.conj() != **arg => {
                    let arg = expand_calls(arg.num())?.div(&expand_calls(arg.den())?)?;
                    let (re, im) = split_ratfn(&arg)?;
                    let cosh = call(Func::Exp, &im)?.add(&call(Func::Exp, &im.neg())?).scale(&half);
                    let sinh = call(Func::Exp, &im)?.sub(&call(Func::Exp, &im.neg())?).scale(&half);
                    match f {
                        Func::Exp => call(Func::Exp, &re)?.mul(&call(Func::Cos, &im)?.add(&i.mul(&call(Func::Sin, &im)?))),
                        Func::Sin => call(Func::Sin, &re)?.mul(&cosh).add(&i.mul(&call(Func::Cos, &re)?).mul(&sinh)),
                        Func::Cos => call(Func::Cos, &re)?.mul(&cosh).sub(&i.mul(&call(Func::Sin, &re)?).mul(&sinh)),
                        _ => return Err(AnalyticityError::TranscendentalAtom(RatFn::from_poly(Poly::atom(a.clone())).to_expr().to_string())),
                    }
                }
                _ => RatFn::from_poly(Poly::atom(a.clone())),
            };
            t = t.mul(&img.pow(*e as i64)?);
        }
        out = out.add(&t);
    }
    Ok(out)
}

/// Split `w(x, u, u')` into real and imaginary parts with `u = f1 + i*f2`.
pub fn realify(ode: &ComplexOde) -> Result<OdeSystem, AnalyticityError> {
    let (n, d) = realified_parts(&ode.rhs, &ode.indep, &ode.dep)?;
    let (re, im) = n.split_re_im();
    let w1 = RatFn::from_parts(re, d.clone())?;
    let w2 = RatFn::from_parts(im, d)?;
    Ok(OdeSystem::from_ratfns(w1, w2, ode.params.clone())?)
}

/// Real and imaginary parts of a function of `(indep, dep)` with the
/// independent variable real and `dep = f1 + i*f2`.
pub fn realify_function(w: &RatFn, indep: &Symbol, dep: &Symbol) -> Result<(RatFn, RatFn), AnalyticityError> {
    let (n, d) = realified_parts(w, indep, dep)?;
    let (re, im) = n.split_re_im();
    Ok((RatFn::from_parts(re, d.clone())?, RatFn::from_parts(im, d)?))
}

/// Real locus where the denominator of `w` vanishes, as a polynomial in
/// `x, f1, f2, f1', f2'`; `None` for polynomial `w`.
pub fn pole_locus(ode: &ComplexOde) -> Result<Option<Expr>, AnalyticityError> {
    let (_, d) = realified_parts(&ode.rhs, &ode.indep, &ode.dep)?;
    Ok((!d.is_one()).then(|| RatFn::from_poly(d).to_expr()))
}

/// Numerator times conjugate denominator, and the real denominator `|den|^2`.
fn realified_parts(w: &RatFn, indep: &Symbol, dep: &Symbol) -> Result<(Poly, Poly), AnalyticityError> {
    let i = CRat::i();
    let mut m = BTreeMap::new();
    m.insert(indep.clone(), RatFn::symbol(&vars::x()));
    m.insert(dep.clone(), RatFn::symbol(&vars::f1()).add(&RatFn::symbol(&vars::f2()).scale(&i)));
    m.insert(dep.primed(), RatFn::symbol(&vars::df1()).add(&RatFn::symbol(&vars::df2()).scale(&i)));
    let r = w.subs(&m)?;
    let r = if r.has_calls() { expand_calls(r.num())?.div(&expand_calls(r.den())?)? } else { r };
    check_realifiable(r.num())?;
    check_realifiable(r.den())?;
    if r.den().is_one() {
        return Ok((r.num().clone(), Poly::one()));
    }
    let dc = r.den().conj();
    Ok((r.num() * &dc, r.den() * &dc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;

    fn sys(w1: &str, w2: &str) -> OdeSystem {
        OdeSystem::new(parse_expression(w1).unwrap(), parse_expression(w2).unwrap(), vec![]).unwrap()
    }

    #[test]
    fn non_analytic_pair_is_detected() {
        let r = cr_check(&sys("f2", "f2")).unwrap();
        assert!(!r.verdict);
        assert!(r.violated.contains(&"dw1/df2 + dw2/df1"));
        assert_eq!(r.residuals[1], Expr::one());
    }

    #[test]
    fn cubic_round_trip() {
        let s = sys("f1'^3 - 3*f1'*f2'^2", "3*f1'^2*f2' - f2'^3");
        let w = complexify(&s).unwrap();
        assert_eq!(w.rhs, RatFn::sym("u'").pow(3).unwrap());
        assert_eq!(realify(&w).unwrap().omegas(), s.omegas());
    }

    #[test]
    fn rational_rhs_realifies_over_modulus() {
        let w = ComplexOde::in_u(RatFn::sym("u'").div(&RatFn::sym("u").pow(2).unwrap()).unwrap(), vec![]).unwrap();
        let s = realify(&w).unwrap();
        assert!(cr_check(&s).unwrap().verdict);
        assert_eq!(complexify(&s).unwrap().rhs, w.rhs);
        assert!(pole_locus(&w).unwrap().is_some());
    }

    #[test]
    fn zero_gives_free_particle() {
        let w = ComplexOde::in_u(RatFn::zero(), vec![]).unwrap();
        let s = realify(&w).unwrap();
        assert_eq!(s.omegas(), &[Expr::zero(), Expr::zero()]);
    }
}

#[cfg(test)]
mod corpus_tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn complexified_corpus_equations() {
        let cases = [
            ("sys3", "u'^3"),
            ("sys5", "u*u'^3"),
            ("sys7", "-3*u*u' - u^3"),
            ("sys1", "u'/u^2"),
            ("sys6", "x*u*u'^3"),
        ];
        for (name, w) in cases {
            let got = complexify(&corpus::system(name)).unwrap();
            let want = crate::parser::parse_expression(w).unwrap().to_ratfn().unwrap();
            assert_eq!(got.rhs, want, "{name}");
        }
        assert!(complexify(&corpus::system("noncr")).is_err());
    }
}
