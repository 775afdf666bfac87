//! Linear targets `U'' + P(chi) U' + Q(chi) U + R(chi) = 0`: closed forms for
//! constant `P`, `Q` and exact Taylor series otherwise.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::chain::{big_u_symbol, chi_symbol};
use super::patterns::linear_parts;
use super::SolveError;
use crate::analyticity::ComplexOde;
use crate::expr::{CRat, Func, RatFn, Symbol};

pub const MIN_SERIES_ORDER: usize = 4;
pub const MAX_SERIES_ORDER: usize = 160;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_DISC_RADIUS: f64 = 2.0;

/// `U'' + p U' + q U + r = 0` in the independent variable `chi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearOde {
    pub p: RatFn,
    pub q: RatFn,
    pub r: RatFn,
    pub params: Vec<Symbol>,
}

impl LinearOde {
    pub fn new(p: RatFn, q: RatFn, r: RatFn, params: Vec<Symbol>) -> Self {
        LinearOde { p, q, r, params }
    }

    /// Read a linear equation off a complex ODE in `(chi, U)`.
    pub fn from_complex(ode: &ComplexOde) -> Option<Self> {
        let mut m = BTreeMap::new();
        m.insert(ode.indep.clone(), RatFn::symbol(&chi_symbol()));
        let [a, b, c] = linear_parts(ode)?;
        let sub = |r: RatFn| r.subs(&m).ok();
        Some(LinearOde::new(sub(a.neg())?, sub(b.neg())?, sub(c.neg())?, ode.params.clone()))
    }

    pub fn to_complex(&self) -> ComplexOde {
        let u = RatFn::symbol(&big_u_symbol());
        let up = RatFn::symbol(&big_u_symbol().primed());
        let rhs = self.p.mul(&up).add(&self.q.mul(&u)).add(&self.r).neg();
        ComplexOde::new("chi", "U", rhs, self.params.clone()).expect("linear target uses chi, U")
    }

    fn is_constant(r: &RatFn) -> bool {
        !r.depends_on(&chi_symbol())
    }

    /// Left-hand side applied to a candidate `U(chi)`.
    pub fn apply(&self, u: &RatFn) -> Result<RatFn, SolveError> {
        let chi = chi_symbol();
        let d1 = u.diff(&chi)?;
        let d2 = d1.diff(&chi)?;
        Ok(d2.add(&self.p.mul(&d1)).add(&self.q.mul(u)).add(&self.r))
    }
}

impl fmt::Display for LinearOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs = RatFn::symbol(&Symbol::new("U''")).add(&self.to_complex().rhs.neg());
        write!(f, "{} = 0", lhs.to_expr())
    }
}

impl Serialize for LinearOde {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Exact Taylor coefficients about `center` of the two normalized
/// homogeneous solutions and a particular solution.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSolution {
    pub center: CRat,
    pub order: usize,
    /// `y1(center) = 1, y1'(center) = 0`.
    pub y1: Vec<CRat>,
    /// `y2(center) = 0, y2'(center) = 1`.
    pub y2: Vec<CRat>,
    /// Vanishes to second order at the center.
    pub yp: Vec<CRat>,
    pub radius: f64,
    /// Estimated truncation error on the disc of the given radius.
    pub tail_bound: f64,
}

impl SeriesSolution {
    fn poly(&self, c: &[CRat]) -> RatFn {
        let t = RatFn::symbol(&chi_symbol()).sub(&RatFn::constant(self.center.clone()));
        let mut acc = RatFn::zero();
        for a in c.iter().rev() {
            acc = acc.mul(&t).add(&RatFn::constant(a.clone()));
        }
        acc
    }
}

fn ser_coeffs(c: &[CRat]) -> Vec<[String; 2]> {
    c.iter().map(|v| [v.re.to_string(), v.im.to_string()]).collect()
}

impl Serialize for SeriesSolution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SeriesSolution", 7)?;
        st.serialize_field("center", &self.center.to_string())?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("radius", &self.radius)?;
        st.serialize_field("tail_bound", &self.tail_bound)?;
        st.serialize_field("y1", &ser_coeffs(&self.y1))?;
        st.serialize_field("y2", &ser_coeffs(&self.y2))?;
        st.serialize_field("yp", &ser_coeffs(&self.yp))?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionForm {
    Closed {
        #[serde(serialize_with = "super::ser_ratfn_pair")]
        basis: [RatFn; 2],
        #[serde(serialize_with = "super::ser_ratfn")]
        particular: RatFn,
    },
    Series(SeriesSolution),
}

/// `U = a*B1 + b*B2 + P` with constants named in `constants`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearSolution {
    pub form: SolutionForm,
    pub constants: [Symbol; 2],
}

impl LinearSolution {
    pub fn basis(&self) -> [RatFn; 2] {
        match &self.form {
            SolutionForm::Closed { basis, .. } => basis.clone(),
            SolutionForm::Series(s) => [s.poly(&s.y1), s.poly(&s.y2)],
        }
    }

    pub fn particular(&self) -> RatFn {
        match &self.form {
            SolutionForm::Closed { particular, .. } => particular.clone(),
            SolutionForm::Series(s) => s.poly(&s.yp),
        }
    }

    /// The general solution in `chi` with symbolic constants.
    pub fn general(&self) -> RatFn {
        let [b1, b2] = self.basis();
        let [a, b] = &self.constants;
        RatFn::symbol(a).mul(&b1).add(&RatFn::symbol(b).mul(&b2)).add(&self.particular())
    }

    pub fn series(&self) -> Option<&SeriesSolution> {
        match &self.form {
            SolutionForm::Series(s) => Some(s),
            SolutionForm::Closed { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesOptions {
    pub center: CRat,
    /// Fixed truncation order; `None` picks the smallest order meeting the
    /// tail tolerance on the disc.
    pub order: Option<usize>,
    pub radius: f64,
    pub tail_tolerance: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            center: CRat::zero(),
            order: None,
            radius: DEFAULT_DISC_RADIUS,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }
}

pub(crate) fn default_constants() -> [Symbol; 2] {
    [Symbol::new("a"), Symbol::new("b")]
}

/// Coefficients of a polynomial in `chi` whose coefficients are free of `chi`.
fn chi_coeffs(r: &RatFn) -> Option<Vec<RatFn>> {
    let m = r.coeffs_in_symbols(&[chi_symbol()])?;
    let deg = m.keys().map(|k| k[0] as usize).max().unwrap_or(0);
    let mut out = vec![RatFn::zero(); deg + 1];
    for (k, c) in m {
        out[k[0] as usize] = c;
    }
    Some(out)
}

fn poly_in_chi(c: &[RatFn]) -> RatFn {
    let chi = RatFn::symbol(&chi_symbol());
    c.iter().rev().fold(RatFn::zero(), |acc, a| acc.mul(&chi).add(a))
}

/// Polynomial `v` with `v'' + p v' + q v = -r` for constant `p`, `q` and
/// polynomial `r`.
fn polynomial_particular(p: &RatFn, q: &RatFn, r: &[RatFn]) -> Result<RatFn, SolveError> {
    let d = r.len();
    if !q.is_zero() {
        let mut u = vec![RatFn::zero(); d + 2];
        for k in (0..d).rev() {
            let kk = k as i64;
            let rest = p.mul(&u[k + 1]).scale(&CRat::from_int(kk + 1)).add(&u[k + 2].scale(&CRat::from_int((kk + 2) * (kk + 1))));
            u[k] = r[k].add(&rest).neg().div(q)?;
        }
        return Ok(poly_in_chi(&u[..d]));
    }
    // q = 0: v' = w with w' + p w = -r, then integrate.
    let mut w = vec![RatFn::zero(); d + 1];
    if p.is_zero() {
        for k in 0..d {
            w[k + 1] = r[k].neg().scale(&CRat::ratio(1, k as i64 + 1));
        }
    } else {
        for k in (0..d).rev() {
            let next = w[k + 1].scale(&CRat::from_int(k as i64 + 1));
            w[k] = r[k].add(&next).neg().div(p)?;
        }
    }
    let mut v = vec![RatFn::zero(); d + 2];
    for (k, wk) in w.iter().enumerate() {
        v[k + 1] = wk.scale(&CRat::ratio(1, k as i64 + 1));
    }
    Ok(poly_in_chi(&v))
}

fn exp_of(r: &RatFn) -> Result<RatFn, SolveError> {
    Ok(RatFn::call(Func::Exp, r.mul(&RatFn::symbol(&chi_symbol())))?)
}

fn closed_form(ode: &LinearOde) -> Result<Option<SolutionForm>, SolveError> {
    if !LinearOde::is_constant(&ode.p) || !LinearOde::is_constant(&ode.q) {
        return Ok(None);
    }
    let Some(r) = chi_coeffs(&ode.r) else { return Ok(None) };
    let chi = RatFn::symbol(&chi_symbol());
    let (p, q) = (&ode.p, &ode.q);
    let basis = if q.is_zero() {
        if p.is_zero() {
            [chi.clone(), RatFn::one()]
        } else {
            [RatFn::one(), exp_of(&p.neg())?]
        }
    } else {
        let disc = p.mul(p).sub(&q.scale(&CRat::from_int(4)));
        let half = CRat::ratio(1, 2);
        if disc.is_zero() {
            let r0 = p.neg().scale(&half);
            let e = exp_of(&r0)?;
            [chi.mul(&e), e]
        } else if p.is_zero() && q.as_const().and_then(|c| c.exact_sqrt()).is_some_and(|w| w.is_real()) {
            let w = RatFn::constant(q.as_const().unwrap().exact_sqrt().unwrap());
            let arg = w.mul(&chi);
            [RatFn::call(Func::Cos, arg.clone())?, RatFn::call(Func::Sin, arg)?]
        } else if let Some(s) = disc.as_const().and_then(|c| c.exact_sqrt()) {
            let s = RatFn::constant(s);
            let r1 = p.neg().add(&s).scale(&half);
            let r2 = p.neg().sub(&s).scale(&half);
            [exp_of(&r1)?, exp_of(&r2)?]
        } else {
            return Ok(None);
        }
    };
    let particular = polynomial_particular(p, q, &r)?;
    Ok(Some(SolutionForm::Closed { basis, particular }))
}

/// Numeric polynomial coefficients in `t = chi - center`.
fn shifted_coeffs(r: &RatFn, center: &CRat) -> Result<Vec<CRat>, SolveError> {
    let chi = chi_symbol();
    let mut m = BTreeMap::new();
    m.insert(chi.clone(), RatFn::symbol(&chi).add(&RatFn::constant(center.clone())));
    let shifted = r.subs(&m)?;
    let c = chi_coeffs(&shifted).ok_or(SolveError::NonPolynomialCoefficients)?;
    c.into_iter().map(|x| x.as_const().ok_or(SolveError::NonPolynomialCoefficients)).collect()
}

struct Recurrence {
    p: Vec<CRat>,
    q: Vec<CRat>,
    r: Vec<CRat>,
}

impl Recurrence {
    /// Coefficients `a_0 .. a_n` from `a_0`, `a_1`, with or without forcing.
    fn run(&self, a0: CRat, a1: CRat, forced: bool, n: usize) -> Vec<CRat> {
        let mut a = vec![a0, a1];
        for k in 0..n.saturating_sub(1) {
            let mut s = CRat::zero();
            for (j, pj) in self.p.iter().enumerate() {
                if j <= k && !pj.is_zero() {
                    let idx = k - j + 1;
                    s = &s + &(&(pj * &a[idx]) * &CRat::from_int(idx as i64));
                }
            }
            for (j, qj) in self.q.iter().enumerate() {
                if j <= k && !qj.is_zero() {
                    s = &s + &(qj * &a[k - j]);
                }
            }
            if forced {
                if let Some(rk) = self.r.get(k) {
                    s = &s + rk;
                }
            }
            let den = CRat::from_int(((k + 1) * (k + 2)) as i64);
            a.push(-&(&s / &den));
        }
        a.truncate(n + 1);
        a
    }

    /// The same recurrence in floating point, for tail estimates.
    fn extend_f64(&self, exact: &[CRat], forced: bool, extra: usize) -> Vec<Complex64> {
        let p: Vec<Complex64> = self.p.iter().map(CRat::to_c64).collect();
        let q: Vec<Complex64> = self.q.iter().map(CRat::to_c64).collect();
        let r: Vec<Complex64> = self.r.iter().map(CRat::to_c64).collect();
        let mut a: Vec<Complex64> = exact.iter().map(CRat::to_c64).collect();
        let n0 = a.len();
        for n in n0..n0 + extra {
            let k = n - 2;
            let mut s = Complex64::new(0.0, 0.0);
            for (j, pj) in p.iter().enumerate().filter(|(j, _)| *j <= k) {
                let idx = k - j + 1;
                s += pj * a[idx] * idx as f64;
            }
            for (j, qj) in q.iter().enumerate().filter(|(j, _)| *j <= k) {
                s += qj * a[k - j];
            }
            if forced {
                if let Some(rk) = r.get(k) {
                    s += rk;
                }
            }
            a.push(-s / ((k + 1) * (k + 2)) as f64);
        }
        a
    }
}

/// Truncation error estimate of `sum a_n t^n` after degree `order` on
/// `|t| <= radius`: the computed tail over a window plus a geometric
/// extrapolation from the last two blocks of three terms.
fn tail_estimate(a: &[Complex64], order: usize, radius: f64) -> f64 {
    let terms: Vec<f64> = a
        .iter()
        .enumerate()
        .skip(order + 1)
        .map(|(n, c)| c.norm() * radius.powi(n as i32))
        .collect();
    let s: f64 = terms.iter().sum();
    if terms.len() < 6 {
        return f64::INFINITY;
    }
    let k = terms.len();
    let last: f64 = terms[k - 3..].iter().sum();
    let prev: f64 = terms[k - 6..k - 3].iter().sum();
    if last == 0.0 {
        return s;
    }
    let ratio = last / prev;
    if !ratio.is_finite() || ratio >= 1.0 {
        return f64::INFINITY;
    }
    s + last * ratio / (1.0 - ratio)
}

fn series(ode: &LinearOde, opts: &SeriesOptions) -> Result<SeriesSolution, SolveError> {
    let rec = Recurrence {
        p: shifted_coeffs(&ode.p, &opts.center)?,
        q: shifted_coeffs(&ode.q, &opts.center)?,
        r: shifted_coeffs(&ode.r, &opts.center)?,
    };
    let forced = rec.r.iter().any(|c| !c.is_zero());
    let max = opts.order.unwrap_or(MAX_SERIES_ORDER);
    if max < MIN_SERIES_ORDER {
        return Err(SolveError::OrderTooSmall(max));
    }
    let y1 = rec.run(CRat::one(), CRat::zero(), false, max);
    let y2 = rec.run(CRat::zero(), CRat::one(), false, max);
    let yp = if forced { rec.run(CRat::zero(), CRat::zero(), true, max) } else { vec![CRat::zero(); max + 1] };
    let window = 60;
    let ext = [
        rec.extend_f64(&y1, false, window),
        rec.extend_f64(&y2, false, window),
        rec.extend_f64(&yp, forced, window),
    ];
    let bound = |n: usize| {
        ext.iter()
            .map(|a| tail_estimate(&a[..(n + 1 + window).min(a.len())], n, opts.radius))
            .fold(0.0, f64::max)
    };
    let order = match opts.order {
        Some(n) => n,
        None => (MIN_SERIES_ORDER..=max).find(|&n| bound(n) < opts.tail_tolerance).unwrap_or(max),
    };
    Ok(SeriesSolution {
        center: opts.center.clone(),
        order,
        tail_bound: bound(order),
        y1: y1[..=order].to_vec(),
        y2: y2[..=order].to_vec(),
        yp: yp[..=order].to_vec(),
        radius: opts.radius,
    })
}

/// Solve the linear target: closed form when the coefficients allow it,
/// otherwise (or when `force_series`) a truncated Taylor series.
pub fn solve_linear_complex(ode: &LinearOde, opts: &SeriesOptions, force_series: bool) -> Result<LinearSolution, SolveError> {
    if let Some(n) = opts.order {
        if n < MIN_SERIES_ORDER {
            return Err(SolveError::OrderTooSmall(n));
        }
    }
    if !force_series {
        if let Some(form) = closed_form(ode)? {
            return Ok(LinearSolution { form, constants: default_constants() });
        }
    }
    Ok(LinearSolution { form: SolutionForm::Series(series(ode, opts)?), constants: default_constants() })
}

/// Lowest power of `chi - center` with a nonzero coefficient, `None` for
/// the zero polynomial.
pub fn lowest_order(r: &RatFn, center: &CRat) -> Result<Option<usize>, SolveError> {
    let c = shifted_coeffs(r, center)?;
    Ok(c.iter().position(|x| !x.is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;

    fn rf(s: &str) -> RatFn {
        parse_expression(s).unwrap().to_ratfn().unwrap()
    }

    fn lin(p: &str, q: &str, r: &str) -> LinearOde {
        LinearOde::new(rf(p), rf(q), rf(r), vec![])
    }

    #[test]
    fn free_particle_is_affine() {
        let s = solve_linear_complex(&lin("0", "0", "0"), &SeriesOptions::default(), false).unwrap();
        assert_eq!(s.general(), rf("a*chi + b"));
    }

    #[test]
    fn constant_forcing() {
        let ode = lin("0", "0", "1");
        let s = solve_linear_complex(&ode, &SeriesOptions::default(), false).unwrap();
        assert_eq!(s.general(), rf("-chi^2/2 + a*chi + b"));
        assert!(ode.apply(&s.general()).unwrap().is_zero());
    }

    #[test]
    fn oscillator_uses_cos_and_sin() {
        let ode = lin("0", "1", "0");
        let s = solve_linear_complex(&ode, &SeriesOptions::default(), false).unwrap();
        assert_eq!(s.general(), rf("a*cos(chi) + b*sin(chi)"));
        assert!(ode.apply(&s.general()).unwrap().is_zero());
    }

    #[test]
    fn first_order_damping() {
        let ode = LinearOde::new(rf("-k"), RatFn::zero(), rf("chi"), vec![crate::expr::Symbol::new("k")]);
        let s = solve_linear_complex(&ode, &SeriesOptions::default(), false).unwrap();
        assert!(ode.apply(&s.general()).unwrap().is_zero());
    }

    #[test]
    fn airy_recurrence_and_residual() {
        let ode = lin("0", "chi", "0");
        let opts = SeriesOptions { order: Some(12), ..SeriesOptions::default() };
        let s = solve_linear_complex(&ode, &opts, false).unwrap();
        let ser = s.series().unwrap();
        for c in [&ser.y1, &ser.y2] {
            assert!(c[2].is_zero());
            for n in 1..=10 {
                let want = -&(&c[n - 1] / &CRat::from_int(((n + 1) * (n + 2)) as i64));
                assert_eq!(c[n + 2], want);
            }
        }
        let low = s.basis().iter().map(|b| lowest_order(&ode.apply(b).unwrap(), &CRat::zero()).unwrap().unwrap()).min();
        assert_eq!(low, Some(11));
    }

    #[test]
    fn automatic_order_meets_tail_tolerance() {
        let ode = lin("0", "chi", "0");
        let s = solve_linear_complex(&ode, &SeriesOptions::default(), false).unwrap();
        let ser = s.series().unwrap();
        assert!(ser.tail_bound < 1e-12, "{}", ser.tail_bound);
        assert!(ser.order > 12 && ser.order < 60);
    }

    #[test]
    fn order_too_small() {
        let opts = SeriesOptions { order: Some(3), ..SeriesOptions::default() };
        assert_eq!(solve_linear_complex(&lin("0", "chi", "0"), &opts, false).unwrap_err(), SolveError::OrderTooSmall(3));
    }
}
