//! Newton continuation on the implicit relation `G(x, u) = 0`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::{ComplexSolution, SolveError};
use crate::expr::{CompiledExpr, Symbol};
use crate::verify::{Tolerances, Trajectory};

/// Numeric values for parameters and constants, by name.
///
/// A complex constant `a` may be given directly or through its real and
/// imaginary parts `a1`, `a2`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings(BTreeMap<String, Complex64>);

/// Parse `2`, `-0.5`, `2+0.5i`, `1e-3-2i`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let imag = |t: &str| -> Option<f64> {
        let body = t.strip_suffix('i')?;
        match body {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => body.parse().ok(),
        }
    };
    if !s.ends_with('i') {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    }
    // Split at the last sign that is not part of an exponent.
    let bytes = s.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Some(Complex64::new(s[..k].parse().ok()?, imag(&s[k..])?)),
        None => Some(Complex64::new(0.0, imag(&s)?)),
    }
}

/// A single `name=value` binding.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamValue {
    pub name: String,
    pub value: Complex64,
}

impl std::str::FromStr for ParamValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (n, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
        let name = n.trim();
        if name.is_empty() {
            return Err(format!("empty name in `{s}`"));
        }
        let value = parse_complex(v).ok_or_else(|| format!("cannot parse `{}` as a complex number", v.trim()))?;
        Ok(ParamValue { name: name.to_string(), value })
    }
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn insert(&mut self, name: &str, value: Complex64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, re: f64, im: f64) -> Self {
        self.insert(name, Complex64::new(re, im));
        self
    }

    /// Parse a comma-separated list `a=1,b=2+0.5i`.
    pub fn parse_list(s: &str) -> Result<Self, String> {
        let mut b = Bindings::new();
        b.extend_from_str(s)?;
        Ok(b)
    }

    pub fn extend_from_str(&mut self, s: &str) -> Result<(), String> {
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let p: ParamValue = part.parse()?;
            self.0.insert(p.name, p.value);
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Complex64)> {
        self.0.iter()
    }

    /// `name` directly, else `name1 + i*name2`.
    pub fn resolve(&self, name: &str) -> Result<Complex64, SolveError> {
        if let Some(v) = self.get(name) {
            return Ok(v);
        }
        match (self.get(&format!("{name}1")), self.get(&format!("{name}2"))) {
            (Some(re), Some(im)) if re.im == 0.0 && im.im == 0.0 => Ok(Complex64::new(re.re, im.re)),
            _ => Err(SolveError::MissingParameter(name.to_string())),
        }
    }

    /// Values in the order of `symbols`.
    pub fn values_for(&self, symbols: &[Symbol]) -> Result<Vec<Complex64>, SolveError> {
        symbols.iter().map(|s| self.resolve(s.name())).collect()
    }
}

impl fmt::Display for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={}", fmt_complex(*v))).collect();
        f.write_str(&parts.join(","))
    }
}

pub fn fmt_complex(v: Complex64) -> String {
    match (v.re, v.im) {
        (re, im) if im == 0.0 => format!("{re}"),
        (re, im) if re == 0.0 => format!("{im}i"),
        (re, im) if im < 0.0 => format!("{re}{im}i"),
        (re, im) => format!("{re}+{im}i"),
    }
}

/// `G`, `dG/du` and `dG/dx` compiled over `(x, u, rest...)`.
struct Relation {
    g: CompiledExpr,
    gu: CompiledExpr,
    gx: CompiledExpr,
    rest: Vec<Complex64>,
}

struct Point {
    u: Complex64,
    du: Complex64,
    jac: f64,
    residual: f64,
}

impl Relation {
    fn new(sol: &ComplexSolution, bind: &Bindings) -> Result<Self, SolveError> {
        let x = sol.source.indep.clone();
        let u = sol.source.dep.clone();
        let rel = &sol.relation;
        let others: Vec<Symbol> = rel.free_symbols().into_iter().filter(|s| *s != x && *s != u).collect();
        let mut rest = Vec::with_capacity(others.len());
        for s in &others {
            let v = match sol.aliases.iter().find(|a| a.name == *s) {
                Some(a) => a.terms.iter().map(|(t, c)| Ok(c * bind.resolve(t.name())?)).sum::<Result<Complex64, SolveError>>()?,
                None => bind.resolve(s.name())?,
            };
            rest.push(v);
        }
        let mut vars = vec![x.clone(), u.clone()];
        vars.extend(others);
        let compile = |r: &crate::expr::RatFn| CompiledExpr::new(&r.to_expr(), &vars).map_err(|source| SolveError::Eval { x: f64::NAN, source });
        Ok(Relation { g: compile(rel)?, gu: compile(&rel.diff(&u)?)?, gx: compile(&rel.diff(&x)?)?, rest })
    }

    fn eval(&self, e: &CompiledExpr, x: f64, u: Complex64) -> Result<Complex64, SolveError> {
        let mut v = Vec::with_capacity(2 + self.rest.len());
        v.push(Complex64::new(x, 0.0));
        v.push(u);
        v.extend_from_slice(&self.rest);
        let r = e.eval(&v).map_err(|source| SolveError::Eval { x, source })?;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(SolveError::Eval { x, source: crate::expr::EvalError::Pole })
        }
    }

    fn newton(&self, x: f64, mut u: Complex64, tol: &Tolerances) -> Result<Point, SolveError> {
        let mut residual = f64::INFINITY;
        for _ in 0..tol.newton_max_iter {
            let g = self.eval(&self.g, x, u)?;
            let gu = self.eval(&self.gu, x, u)?;
            residual = g.norm();
            if gu.norm() < tol.branch_tol {
                return Err(SolveError::BranchAmbiguity { x, jacobian: gu.norm() });
            }
            let step = g / gu;
            u -= step;
            if !u.is_finite() {
                break;
            }
            if step.norm() <= tol.newton_tol * (1.0 + u.norm()) {
                let gu = self.eval(&self.gu, x, u)?;
                if gu.norm() < tol.branch_tol {
                    return Err(SolveError::BranchAmbiguity { x, jacobian: gu.norm() });
                }
                let gx = self.eval(&self.gx, x, u)?;
                let residual = self.eval(&self.g, x, u)?.norm();
                return Ok(Point { u, du: -gx / gu, jac: gu.norm(), residual });
            }
        }
        Err(SolveError::NewtonDiverged { x, residual })
    }

    /// Smallest-modulus root found from a fixed set of seeds.
    fn anchor(&self, x: f64, tol: &Tolerances) -> Result<Point, SolveError> {
        let mut seeds = vec![Complex64::new(0.0, 0.0)];
        for r in [0.5, 1.0, 2.0, 3.0] {
            for k in 0..8 {
                seeds.push(Complex64::from_polar(r, k as f64 * std::f64::consts::FRAC_PI_4));
            }
        }
        let mut best: Option<Point> = None;
        for s in seeds {
            if let Ok(p) = self.newton(x, s, tol) {
                if best.as_ref().is_none_or(|b| p.u.norm() < b.u.norm() - 1e-9) {
                    best = Some(p);
                }
            }
        }
        best.ok_or(SolveError::NoAnchor(x))
    }

    /// Continue from `(x0, p)` to `x1`, halving the step when the corrector
    /// fails or jumps away from the predictor.
    fn advance(&self, x0: f64, p: &Point, x1: f64, depth: u32, tol: &Tolerances) -> Result<Point, SolveError> {
        let h = x1 - x0;
        let pred = p.u + p.du * h;
        let attempt = self.newton(x1, pred, tol);
        let err = match attempt {
            Ok(q) if (q.u - pred).norm() <= 0.05 * (1.0 + p.u.norm()) => return Ok(q),
            Ok(q) => SolveError::NewtonDiverged { x: x1, residual: q.residual },
            Err(e) => e,
        };
        if depth == 0 || h.abs() <= 1e-12 * (1.0 + x0.abs()) {
            return Err(err);
        }
        let xm = x0 + h / 2.0;
        let mid = self.advance(x0, p, xm, depth - 1, tol)?;
        self.advance(xm, &mid, x1, depth - 1, tol)
    }
}

/// Solve `G(x, u) = 0` along the grid by Newton continuation. The anchor
/// seeds the first point; without one the smallest-modulus root is used.
pub fn invert_to_trajectory(
    sol: &ComplexSolution,
    bindings: &Bindings,
    grid: &[f64],
    anchor: Option<Complex64>,
    tol: &Tolerances,
) -> Result<Trajectory, SolveError> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolveError::BadGrid);
    }
    let rel = Relation::new(sol, bindings)?;
    let first = match anchor {
        Some(u) => rel.newton(grid[0], u, tol)?,
        None => rel.anchor(grid[0], tol)?,
    };
    let jac0 = first.jac.max(1.0);
    let mut pts = vec![first];
    for w in grid.windows(2) {
        let prev = pts.last().unwrap();
        match rel.advance(w[0], prev, w[1], 40, tol) {
            Ok(p) => pts.push(p),
            // A vanishing Jacobian along the path is a fold or branch point.
            Err(SolveError::NewtonDiverged { x, .. }) if prev.jac < 1e-4 * jac0 => {
                return Err(SolveError::BranchAmbiguity { x, jacobian: prev.jac })
            }
            Err(e) => return Err(e),
        }
    }
    let f = pts.iter().map(|p| [p.u.re, p.u.im]).collect();
    let df = pts.iter().map(|p| [p.du.re, p.du.im]).collect();
    let diag = pts.iter().map(|p| p.residual).collect();
    Trajectory::new(grid.to_vec(), f, Some(df), diag).map_err(|_| SolveError::BadGrid)
}
