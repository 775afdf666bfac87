//! Complex-linearization solution pipeline: recipe matching, transform
//! chains with certificates, linear target solutions, and inversion back
//! to real trajectories.

mod chain;
mod invert;
mod linear;
mod patterns;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use chain::{pushforward, TransformChain, TransformStep};
pub use invert::{fmt_complex, invert_to_trajectory, parse_complex, Bindings, ParamValue};
pub use linear::{
    lowest_order, solve_linear_complex, LinearOde, LinearSolution, SeriesOptions, SeriesSolution, SolutionForm,
    DEFAULT_DISC_RADIUS, DEFAULT_TAIL_TOLERANCE, MAX_SERIES_ORDER, MIN_SERIES_ORDER,
};
pub use patterns::{linear_parts, match_canonical_type, match_cubic_factor, match_h_family, CanonicalKind, CanonicalType, HFamily};

use chain::{big_u_symbol, chi_symbol};
use crate::analyticity::{complexify, ComplexOde};
use crate::expr::{CRat, EvalError, ExprError, Func, RatFn, Symbol};
use crate::system::OdeSystem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("no recipe matches u'' = {0}")]
    NoRecipe(String),
    #[error("equation does not match the {0} pattern")]
    PatternMismatch(&'static str),
    #[error("right-hand side is not of the form g(x, u)*u'^3")]
    NotCubicFactorable,
    #[error("target equation {0} is not linear")]
    TargetNotLinear(String),
    #[error("no closed-form quadrature for h = alpha*u^{0}")]
    UnsupportedH(i64),
    #[error("series order {0} is below the minimum of 4")]
    OrderTooSmall(usize),
    #[error("series solutions need polynomial coefficients with numeric values")]
    NonPolynomialCoefficients,
    #[error("certificate of step `{0}` does not vanish")]
    CertificateFailed(String),
    #[error("missing value for `{0}`")]
    MissingParameter(String),
    #[error("Newton iteration diverged at x = {x} (residual {residual:e})")]
    NewtonDiverged { x: f64, residual: f64 },
    #[error("singular Jacobian at x = {x} (|dG/du| = {jacobian:e}); branch point")]
    BranchAmbiguity { x: f64, jacobian: f64 },
    #[error("relation cannot be evaluated at x = {x}: {source}")]
    Eval { x: f64, source: EvalError },
    #[error("no starting root found at x = {0}")]
    NoAnchor(f64),
    #[error("grid needs at least two increasing points")]
    BadGrid,
    #[error("{0}")]
    Analyticity(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub(crate) fn ser_ratfn<S: Serializer>(r: &RatFn, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&r.to_expr())
}

pub(crate) fn ser_ratfn_pair<S: Serializer>(r: &[RatFn; 2], s: S) -> Result<S::Ok, S::Error> {
    [r[0].to_expr().to_string(), r[1].to_expr().to_string()].serialize(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    Emden,
    Hodograph,
    Exponential,
    HFamily,
    LinearIdentity,
}

impl Recipe {
    pub fn name(self) -> &'static str {
        match self {
            Recipe::Emden => "emden",
            Recipe::Hodograph => "hodograph",
            Recipe::Exponential => "exponential",
            Recipe::HFamily => "h-family",
            Recipe::LinearIdentity => "linear-identity",
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An internal constant written in terms of user-facing ones,
/// `name = sum(coeff * symbol)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantAlias {
    pub name: Symbol,
    pub terms: Vec<(Symbol, Complex64)>,
}

impl fmt::Display for ConstantAlias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} =", self.name)?;
        for (k, (s, c)) in self.terms.iter().enumerate() {
            let sep = if k == 0 { "" } else { " +" };
            write!(f, "{sep} ({:.18})*{s}", c.re)?;
        }
        Ok(())
    }
}

/// Airy values at zero: Ai(0), Ai'(0), Bi(0), Bi'(0).
const AIRY_AT_ZERO: [f64; 4] = [0.355_028_053_887_817_24, -0.258_819_403_792_806_8, 0.614_926_627_446_000_7, 0.448_288_357_353_826_36];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveOptions {
    pub series: SeriesOptions,
    /// Use the Taylor series even when a closed form exists.
    pub force_series: bool,
}

/// A solved complex ODE: the chain, the linear target and its solution,
/// and the implicit relation `G(x, u) = 0` used for inversion.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSolution {
    pub recipe: Recipe,
    pub source: ComplexOde,
    pub chain: TransformChain,
    pub target: Option<LinearOde>,
    pub solution: Option<LinearSolution>,
    pub relation: RatFn,
    /// User-facing constants of integration.
    pub constants: Vec<Symbol>,
    pub aliases: Vec<ConstantAlias>,
}

/// Outcome of substituting the target solution into the target equation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetCheck {
    /// Closed form: exact symbolic residual.
    Exact { zero: bool },
    /// Series of order `order`: lowest surviving power of `chi - center`.
    Series { order: usize, lowest_power: Option<usize> },
    /// No linear target (quadrature recipes).
    NotApplicable,
}

impl TargetCheck {
    pub fn passed(&self) -> bool {
        match self {
            TargetCheck::Exact { zero } => *zero,
            TargetCheck::Series { order, lowest_power } => lowest_power.is_none_or(|p| p + 1 >= *order),
            TargetCheck::NotApplicable => true,
        }
    }
}

impl ComplexSolution {
    /// Substitute the target solution into the target ODE.
    pub fn target_check(&self) -> Result<TargetCheck, SolveError> {
        let (Some(t), Some(s)) = (&self.target, &self.solution) else {
            return Ok(TargetCheck::NotApplicable);
        };
        match s.series() {
            None => Ok(TargetCheck::Exact { zero: t.apply(&s.general())?.is_zero() }),
            Some(ser) => {
                let hom = LinearOde::new(t.p.clone(), t.q.clone(), RatFn::zero(), t.params.clone());
                let [b1, b2] = s.basis();
                let mut low: Option<usize> = None;
                for r in [hom.apply(&b1)?, hom.apply(&b2)?, t.apply(&s.particular())?] {
                    if let Some(k) = lowest_order(&r, &ser.center)? {
                        low = Some(low.map_or(k, |l| l.min(k)));
                    }
                }
                Ok(TargetCheck::Series { order: ser.order, lowest_power: low })
            }
        }
    }

    /// Every symbol the relation needs besides `x` and `u`.
    pub fn required_symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.source.params.clone();
        for c in &self.constants {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
        out
    }
}

impl Serialize for ComplexSolution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ComplexSolution", 9)?;
        st.serialize_field("recipe", &self.recipe)?;
        st.serialize_field("source", &self.source)?;
        st.serialize_field("chain", &self.chain)?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("solution", &self.solution)?;
        st.serialize_field("relation", &format!("{} = 0", self.relation.to_expr()))?;
        st.serialize_field("constants", &self.constants)?;
        st.serialize_field("aliases", &self.aliases.iter().map(ToString::to_string).collect::<Vec<_>>())?;
        st.serialize_field("target_check", &self.target_check().ok())?;
        st.end()
    }
}

fn sym(s: &Symbol) -> RatFn {
    RatFn::symbol(s)
}

/// Two constant names not used by the source equation.
fn fresh_constants(ode: &ComplexOde, preferred: [&str; 2]) -> [Symbol; 2] {
    let taken = |n: &str| ode.params.iter().any(|p| p.name() == n) || ode.indep.name() == n || ode.dep.name() == n;
    for cand in [preferred, ["k1", "k2"], ["K1", "K2"]] {
        if !taken(cand[0]) && !taken(cand[1]) {
            return [Symbol::new(cand[0]), Symbol::new(cand[1])];
        }
    }
    [Symbol::new("k1_"), Symbol::new("k2_")]
}

fn target_ode(rhs: RatFn, params: &[Symbol]) -> Result<ComplexOde, SolveError> {
    ComplexOde::new(chi_symbol().name(), big_u_symbol().name(), rhs, params.to_vec()).map_err(|e| SolveError::Analyticity(e.to_string()))
}

fn checked(step: TransformStep) -> Result<TransformStep, SolveError> {
    if step.certified() {
        Ok(step)
    } else {
        Err(SolveError::CertificateFailed(step.name))
    }
}

/// `U(x, u) - S(chi(x, u))`, cleared of denominators.
fn implicit_relation(step: &TransformStep, general: &RatFn) -> Result<RatFn, SolveError> {
    let mut m = BTreeMap::new();
    m.insert(chi_symbol(), step.chi.clone());
    let g = step.big_u.sub(&general.subs(&m)?);
    Ok(RatFn::from_poly(g.num().clone()))
}

fn finish(
    recipe: Recipe,
    source: &ComplexOde,
    chain: TransformChain,
    target: LinearOde,
    opts: &SolveOptions,
) -> Result<ComplexSolution, SolveError> {
    let mut solution = solve_linear_complex(&target, &opts.series, opts.force_series)?;
    solution.constants = fresh_constants(source, ["a", "b"]);
    let first = chain.first().expect("linear recipes have a first step");
    let relation = implicit_relation(first, &solution.general())?;
    let mut constants = solution.constants.to_vec();
    let mut aliases = Vec::new();
    if solution.series().is_some_and(|ser| ser.center.is_zero()) && is_airy(&target) {
        // U = c1*Ai(-chi) + c2*Bi(-chi) in the normalized basis y1, y2.
        let user = fresh_constants(source, ["c1", "c2"]);
        let [ai, aip, bi, bip] = AIRY_AT_ZERO;
        let c = |v: f64| Complex64::new(v, 0.0);
        aliases.push(ConstantAlias { name: constants[0].clone(), terms: vec![(user[0].clone(), c(ai)), (user[1].clone(), c(bi))] });
        aliases.push(ConstantAlias { name: constants[1].clone(), terms: vec![(user[0].clone(), c(-aip)), (user[1].clone(), c(-bip))] });
        constants = user.to_vec();
    }
    Ok(ComplexSolution {
        recipe,
        source: source.clone(),
        chain,
        target: Some(target),
        solution: Some(solution),
        relation,
        constants,
        aliases,
    })
}

fn is_airy(t: &LinearOde) -> bool {
    t.p.is_zero() && t.r.is_zero() && t.q == sym(&chi_symbol())
}

fn emden_rhs(ode: &ComplexOde) -> RatFn {
    let u = sym(&ode.dep);
    let up = sym(&ode.dep_prime());
    u.mul(&up).scale(&CRat::from_int(-3)).sub(&u.pow(3).unwrap())
}

/// `u'' = -3 u u' - u^3` via `chi = x - 1/u`, `U = x^2/2 - x/u` to `U'' = 0`.
pub fn emden_linearize(ode: &ComplexOde) -> Result<(LinearOde, TransformChain), SolveError> {
    if ode.rhs != emden_rhs(ode) {
        return Err(SolveError::PatternMismatch("modified Emden"));
    }
    let x = sym(&ode.indep);
    let inv_u = sym(&ode.dep).inv()?;
    let chi = x.sub(&inv_u);
    let big_u = x.mul(&x).scale(&CRat::ratio(1, 2)).sub(&x.mul(&inv_u));
    let target = target_ode(RatFn::zero(), &ode.params)?;
    let step = checked(TransformStep::new("emden", ode.clone(), chi, big_u, target.clone())?)?;
    let lin = LinearOde::from_complex(&target).expect("U'' = 0 is linear");
    Ok((lin, TransformChain { steps: vec![step] }))
}

/// `u'' = g(x, u) u'^3` via the swap `chi = u`, `U = x` to `U'' + g(U, chi) = 0`.
pub fn hodograph_linearize(ode: &ComplexOde) -> Result<(LinearOde, TransformChain), SolveError> {
    let g = match_cubic_factor(ode).ok_or(SolveError::NotCubicFactorable)?;
    let mut m = BTreeMap::new();
    m.insert(ode.indep.clone(), sym(&big_u_symbol()));
    m.insert(ode.dep.clone(), sym(&chi_symbol()));
    let target = target_ode(g.subs(&m)?.neg(), &ode.params)?;
    let step = checked(TransformStep::new("hodograph", ode.clone(), sym(&ode.dep), sym(&ode.indep), target.clone())?)?;
    let lin = LinearOde::from_complex(&target).ok_or_else(|| SolveError::TargetNotLinear(target.to_string()))?;
    Ok((lin, TransformChain { steps: vec![step] }))
}

/// `u'' = -u'^2 + c u'` via `U = e^u` with `chi = x` (or the alternative
/// `chi = 1/x`) to `U'' = k U'`, then `chi~ = alpha + beta e^(k chi)` to
/// the free particle when `k != 0`.
pub fn exponential_linearize(ode: &ComplexOde) -> Result<(LinearOde, TransformChain), SolveError> {
    let up = sym(&ode.dep_prime());
    let rest = ode.rhs.add(&up.mul(&up));
    let c = rest.div(&up)?;
    let mismatch = SolveError::PatternMismatch("exponential");
    if [&ode.dep, &ode.dep_prime()].iter().any(|s| c.depends_on(s)) || (ode.rhs.is_zero()) {
        return Err(mismatch);
    }
    let x = sym(&ode.indep);
    let big_u = RatFn::call(Func::Exp, sym(&ode.dep))?;
    for (name, chi) in [("exponential", x.clone()), ("exponential-reciprocal", x.inv()?)] {
        let [u1, u2] = pushforward(ode, &chi, &big_u)?;
        let k = u2.div(&u1)?;
        if [&ode.indep, &ode.dep, &ode.dep_prime()].iter().any(|s| k.depends_on(s)) {
            continue;
        }
        let target = target_ode(k.mul(&sym(&big_u_symbol().primed())), &ode.params)?;
        let step = checked(TransformStep::new(name, ode.clone(), chi, big_u.clone(), target.clone())?)?;
        let mut steps = vec![step];
        if !k.is_zero() {
            let free = ComplexOde::new("chit", "Ut", RatFn::zero(), ode.params.clone()).map_err(|e| SolveError::Analyticity(e.to_string()))?;
            let [alpha, beta] = [sym(&Symbol::new("alpha")), sym(&Symbol::new("beta"))];
            let e = RatFn::call(Func::Exp, k.mul(&sym(&chi_symbol())))?;
            let second = TransformStep::new("free-particle", target.clone(), alpha.add(&beta.mul(&e)), sym(&big_u_symbol()), free)?;
            steps.push(checked(second)?);
        }
        let lin = LinearOde::from_complex(&target).expect("U'' = k U' is linear");
        return Ok((lin, TransformChain { steps }));
    }
    Err(mismatch)
}

/// `u'' = alpha u^p u'`: first integral `u' = H(u) + c1` and a closed-form
/// quadrature, returned as the relation `G(x, u) = 0`.
pub fn reduce_h_family(ode: &ComplexOde) -> Result<ComplexSolution, SolveError> {
    let h = match_h_family(ode).ok_or(SolveError::PatternMismatch("h(u)*u'"))?;
    let [k1, k2] = fresh_constants(ode, ["c1", "c2"]);
    let (c1, c2) = (sym(&k1), sym(&k2));
    let x = sym(&ode.indep);
    let u = sym(&ode.dep);
    let a = &h.alpha;
    let relation = match h.p {
        // u' = c1 - a/u: c1 u - a = exp((c1^2 (x + c2) - c1 u)/a).
        -2 => {
            let arg = c1.mul(&c1).mul(&x.add(&c2)).sub(&c1.mul(&u)).div(a)?;
            c1.mul(&u).sub(a).sub(&RatFn::call(Func::Exp, arg)?)
        }
        // u' = a u + c1: a u + c1 = c2 exp(a x).
        0 => a.mul(&u).add(&c1).sub(&c2.mul(&RatFn::call(Func::Exp, a.mul(&x))?)),
        // u' = a u^2/2 + c1: u = tan(theta)/r with r = sqrt(a/(2 c1)).
        1 => {
            let r = RatFn::call(Func::Sqrt, a.div(&c1.scale(&CRat::from_int(2)))?)?;
            let theta = r.mul(&c1).mul(&x.add(&c2));
            r.mul(&u).mul(&RatFn::call(Func::Cos, theta.clone())?).sub(&RatFn::call(Func::Sin, theta)?)
        }
        p => return Err(SolveError::UnsupportedH(p)),
    };
    Ok(ComplexSolution {
        recipe: Recipe::HFamily,
        source: ode.clone(),
        chain: TransformChain::default(),
        target: None,
        solution: None,
        relation,
        constants: vec![k1, k2],
        aliases: vec![],
    })
}

/// Already linear in `u, u'`: the identity step onto `(chi, U)`.
pub fn linear_identity(ode: &ComplexOde) -> Result<(LinearOde, TransformChain), SolveError> {
    linear_parts(ode).ok_or(SolveError::PatternMismatch("linear"))?;
    let target = ode.renamed(chi_symbol().name(), big_u_symbol().name()).map_err(|e| SolveError::Analyticity(e.to_string()))?;
    let step = checked(TransformStep::new("identity", ode.clone(), sym(&ode.indep), sym(&ode.dep), target.clone())?)?;
    let lin = LinearOde::from_complex(&target).ok_or_else(|| SolveError::TargetNotLinear(target.to_string()))?;
    Ok((lin, TransformChain { steps: vec![step] }))
}

/// Try the recipes in order: Emden, hodograph, exponential, h-family,
/// linear identity.
pub fn solve(ode: &ComplexOde, opts: &SolveOptions) -> Result<ComplexSolution, SolveError> {
    type Linearize = fn(&ComplexOde) -> Result<(LinearOde, TransformChain), SolveError>;
    let first: [(Recipe, Linearize); 3] =
        [(Recipe::Emden, emden_linearize), (Recipe::Hodograph, hodograph_linearize), (Recipe::Exponential, exponential_linearize)];
    for (recipe, f) in first {
        match f(ode) {
            Ok((lin, chain)) => return finish(recipe, ode, chain, lin, opts),
            Err(SolveError::PatternMismatch(_) | SolveError::NotCubicFactorable) => {}
            Err(e) => return Err(e),
        }
    }
    if match_h_family(ode).is_some() {
        return reduce_h_family(ode);
    }
    match linear_identity(ode) {
        Ok((lin, chain)) => finish(Recipe::LinearIdentity, ode, chain, lin, opts),
        Err(SolveError::PatternMismatch(_)) => Err(SolveError::NoRecipe(ode.rhs.to_expr().to_string())),
        Err(e) => Err(e),
    }
}

/// Complexify a real system and solve its scalar equation.
pub fn solve_system(sys: &OdeSystem, opts: &SolveOptions) -> Result<ComplexSolution, SolveError> {
    let ode = complexify(sys).map_err(|e| SolveError::Analyticity(e.to_string()))?;
    solve(&ode, opts)
}
