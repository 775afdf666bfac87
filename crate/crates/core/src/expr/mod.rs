//! Exact symbolic expressions.
//!
//! [`Expr`] is the public tree form. All algebra goes through [`RatFn`], a
//! canonical rational function over Gaussian rationals whose indeterminates
//! are symbols and opaque elementary-function applications; converting back
//! gives the normal form.

mod coeff;
mod eval;
mod poly;
mod ratfn;
mod symbol;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Serialize, Serializer};

pub use coeff::{rational_from_decimal, CRat};
#[allow(unused_imports)]
pub(crate) use coeff::rat_to_f64;
pub use eval::{CompiledExpr, EvalError};
pub use poly::{Atom, Func, Monomial, Poly};
pub use ratfn::RatFn;
pub use symbol::{Role, Symbol, SymbolTable, SymbolTableError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("exponent too large")]
    ExponentTooLarge,
    #[error("{0} evaluated at its branch point")]
    BranchPoint(&'static str),
}

/// Expression tree. Build with the associated constructors, which flatten
/// nested sums and products and fold constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(CRat),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(CRat::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(CRat::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(CRat::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Const(CRat::ratio(n, d))
    }

    /// The imaginary unit.
    pub fn i() -> Expr {
        Expr::Const(CRat::i())
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Symbol::new(name))
    }

    pub fn as_const(&self) -> Option<&CRat> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        self.as_const().is_some_and(CRat::is_zero)
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        let mut c = CRat::zero();
        for t in terms {
            match t {
                Expr::Add(inner) => {
                    for u in inner {
                        match u {
                            Expr::Const(k) => c = &c + &k,
                            other => flat.push(other),
                        }
                    }
                }
                Expr::Const(k) => c = &c + &k,
                other => flat.push(other),
            }
        }
        if !c.is_zero() {
            flat.push(Expr::Const(c));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::Add(flat),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(factors.len());
        let mut c = CRat::one();
        for f in factors {
            match f {
                Expr::Mul(inner) => {
                    for u in inner {
                        match u {
                            Expr::Const(k) => c = &c * &k,
                            other => flat.push(other),
                        }
                    }
                }
                Expr::Const(k) => c = &c * &k,
                other => flat.push(other),
            }
        }
        if c.is_zero() {
            return Expr::zero();
        }
        if !c.is_one() {
            flat.insert(0, Expr::Const(c));
        }
        match flat.len() {
            0 => Expr::one(),
            1 => flat.pop().unwrap(),
            _ => Expr::Mul(flat),
        }
    }

    pub fn pow(base: Expr, k: i64) -> Expr {
        match (base, k) {
            (_, 0) => Expr::one(),
            (b, 1) => b,
            (Expr::Const(c), k) => match c.pow(k) {
                Some(v) => Expr::Const(v),
                // 0 to a negative power: keep it symbolic so normalization reports it
                None => Expr::Pow(Box::new(Expr::Const(c)), k),
            },
            (Expr::Pow(b, j), k) => match j.checked_mul(k) {
                Some(jk) => Expr::pow(*b, jk),
                None => Expr::Pow(Box::new(Expr::Pow(b, j)), k),
            },
            (b, k) => Expr::Pow(Box::new(b), k),
        }
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Mul(mut fs) => {
                if let Some(Expr::Const(c)) = fs.first() {
                    let n = -c;
                    if n.is_one() {
                        fs.remove(0);
                    } else {
                        fs[0] = Expr::Const(n);
                    }
                    return Expr::mul(fs);
                }
                fs.insert(0, Expr::int(-1));
                Expr::Mul(fs)
            }
            other => Expr::Mul(vec![Expr::int(-1), other]),
        }
    }

    pub fn recip(e: Expr) -> Expr {
        Expr::pow(e, -1)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn to_ratfn(&self) -> Result<RatFn, ExprError> {
        match self {
            Expr::Const(c) => Ok(RatFn::constant(c.clone())),
            Expr::Sym(s) => Ok(RatFn::symbol(s)),
            Expr::Add(ts) => {
                let mut acc = RatFn::zero();
                for t in ts {
                    acc = acc.add(&t.to_ratfn()?);
                }
                Ok(acc)
            }
            Expr::Mul(fs) => {
                let mut acc = RatFn::one();
                for f in fs {
                    acc = acc.mul(&f.to_ratfn()?);
                }
                Ok(acc)
            }
            Expr::Pow(b, k) => b.to_ratfn()?.pow(*k),
            Expr::Call(f, a) => RatFn::call(*f, a.to_ratfn()?),
        }
    }

    /// Canonical form: equal rational functions give identical trees.
    pub fn normalize(&self) -> Result<Expr, ExprError> {
        Ok(self.to_ratfn()?.to_expr())
    }

    /// True when the expression is identically zero as a rational function.
    pub fn is_zero(&self) -> Result<bool, ExprError> {
        Ok(self.to_ratfn()?.is_zero())
    }

    /// Exact partial derivative, normalized.
    pub fn differentiate(&self, s: &Symbol) -> Result<Expr, ExprError> {
        Ok(self.to_ratfn()?.diff(s)?.to_expr())
    }

    /// Simultaneous substitution followed by normalization.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr, ExprError> {
        let map = bindings
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.to_ratfn()?)))
            .collect::<Result<BTreeMap<_, _>, ExprError>>()?;
        Ok(self.to_ratfn()?.subs(&map)?.to_expr())
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Add(v) | Expr::Mul(v) => v.iter().for_each(|e| e.collect_symbols(out)),
            Expr::Pow(b, _) => b.collect_symbols(out),
            Expr::Call(_, a) => a.collect_symbols(out),
        }
    }

    pub fn contains_constant(&self, pred: &dyn Fn(&CRat) -> bool) -> bool {
        match self {
            Expr::Const(c) => pred(c),
            Expr::Sym(_) => false,
            Expr::Add(v) | Expr::Mul(v) => v.iter().any(|e| e.contains_constant(pred)),
            Expr::Pow(b, _) => b.contains_constant(pred),
            Expr::Call(_, a) => a.contains_constant(pred),
        }
    }

    /// Double-precision evaluation with principal branches.
    pub fn eval_complex(&self, values: &HashMap<Symbol, Complex64>) -> Result<Complex64, EvalError> {
        let names: Vec<Symbol> = self.free_symbols().into_iter().collect();
        let mut slots = Vec::with_capacity(names.len());
        for n in &names {
            slots.push(*values.get(n).ok_or_else(|| EvalError::Unbound(n.to_string()))?);
        }
        CompiledExpr::new(self, &names)?.eval(&slots)
    }

    fn is_negative_term(&self) -> bool {
        match self {
            Expr::Const(c) => c.is_negative(),
            Expr::Mul(fs) => matches!(fs.first(), Some(Expr::Const(c)) if c.is_negative()),
            _ => false,
        }
    }
}

impl RatFn {
    /// Tree form with terms in descending monomial order.
    pub fn to_expr(&self) -> Expr {
        let num = poly_to_expr(self.num());
        if self.den().is_one() {
            return num;
        }
        Expr::mul(vec![num, Expr::recip(poly_to_expr(self.den()))])
    }
}

fn atom_to_expr(a: &Atom) -> Expr {
    match a {
        Atom::Sym(s) => Expr::Sym(s.clone()),
        Atom::Call(f, arg) => Expr::call(*f, arg.to_expr()),
    }
}

fn poly_to_expr(p: &Poly) -> Expr {
    let terms: Vec<(&Monomial, &CRat)> = p.terms().collect();
    let mut out = Vec::with_capacity(terms.len());
    for (m, c) in terms.into_iter().rev() {
        let mut fs = vec![Expr::Const(c.clone())];
        for (a, e) in m.factors() {
            fs.push(Expr::pow(atom_to_expr(a), *e as i64));
        }
        out.push(Expr::mul(fs));
    }
    Expr::add(out)
}

impl From<&Symbol> for Expr {
    fn from(s: &Symbol) -> Expr {
        Expr::Sym(s.clone())
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<CRat> for Expr {
    fn from(c: CRat) -> Expr {
        Expr::Const(c)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::add(vec![self, o])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::add(vec![self, Expr::neg(o)])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::mul(vec![self, o])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        Expr::mul(vec![self, Expr::recip(o)])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

// Printing. The output is accepted by the parser; binding strength is
// sum < product < unary minus < power.

fn const_needs_parens(c: &CRat) -> bool {
    !c.re.is_integer() || !c.im.is_integer() || c.is_negative() || (!c.is_real() && !c.re.is_zero())
}

fn write_atomic(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Sym(_) | Expr::Call(..) => write!(f, "{e}"),
        Expr::Const(c) if !const_needs_parens(c) && c.is_real() => write!(f, "{e}"),
        _ => write!(f, "({e})"),
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Add(_) => write!(f, "({e})"),
        Expr::Const(c) if !c.is_real() => write!(f, "({e})"),
        Expr::Const(c) if c.is_negative() => write!(f, "({e})"),
        Expr::Pow(_, k) if *k < 0 => write!(f, "({e})"),
        Expr::Mul(_) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

fn write_product(f: &mut fmt::Formatter<'_>, fs: &[Expr]) -> fmt::Result {
    let (lead, rest) = match fs.first() {
        Some(Expr::Const(c)) => (Some(c), &fs[1..]),
        _ => (None, fs),
    };
    let numer: Vec<&Expr> = rest.iter().filter(|e| !matches!(e, Expr::Pow(_, k) if *k < 0)).collect();
    let denom: Vec<(&Expr, i64)> = rest
        .iter()
        .filter_map(|e| match e {
            Expr::Pow(b, k) if *k < 0 => Some((b.as_ref(), -k)),
            _ => None,
        })
        .collect();
    let mut first = true;
    if let Some(c) = lead {
        if (-c).is_one() && !numer.is_empty() {
            f.write_str("-")?;
        } else if c.is_real() {
            write!(f, "{c}")?;
            first = false;
        } else {
            write!(f, "({c})")?;
            first = false;
        }
    }
    for e in &numer {
        if !first {
            f.write_str("*")?;
        }
        write_factor(f, e)?;
        first = false;
    }
    if first {
        f.write_str("1")?;
    }
    for (b, k) in denom {
        f.write_str("/")?;
        write_atomic(f, b)?;
        if k != 1 {
            write!(f, "^{k}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Pow(b, k) => {
                write_atomic(f, b)?;
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Expr::Mul(fs) => write_product(f, fs),
            Expr::Add(ts) => {
                for (n, t) in ts.iter().enumerate() {
                    let neg = t.is_negative_term();
                    let shown = if neg { Expr::neg(t.clone()) } else { t.clone() };
                    match (n, neg) {
                        (0, true) => f.write_str("-")?,
                        (0, false) => {}
                        (_, true) => f.write_str(" - ")?,
                        (_, false) => f.write_str(" + ")?,
                    }
                    match &shown {
                        Expr::Const(c) if !c.is_real() && !c.re.is_zero() => write!(f, "({c})")?,
                        other => write!(f, "{other}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: &str) -> Expr {
        Expr::sym(n)
    }

    #[test]
    fn binomial_identity_normalizes_to_zero() {
        let (a, b) = (s("f1"), s("f2"));
        let e = Expr::pow(a.clone() + b.clone(), 2)
            - Expr::pow(a.clone(), 2)
            - Expr::int(2) * a * b.clone()
            - Expr::pow(b, 2);
        assert_eq!(e.normalize().unwrap(), Expr::zero());
    }

    #[test]
    fn cancellation() {
        assert_eq!((s("x") / s("x")).normalize().unwrap(), Expr::one());
        assert_eq!((Expr::one() / (s("x") - s("x"))).normalize(), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn derivative_of_product() {
        let e = Expr::pow(s("x"), 2) * s("f1");
        let d = e.differentiate(&Symbol::new("x")).unwrap();
        assert_eq!(d, (Expr::int(2) * s("x") * s("f1")).normalize().unwrap());
    }

    #[test]
    fn derivative_through_arctan() {
        let e = Expr::call(Func::Arctan, s("f1") / s("f2"));
        let d = e.differentiate(&Symbol::new("f1")).unwrap();
        let expected = (Expr::one() / s("f2")) / (Expr::one() + Expr::pow(s("f1") / s("f2"), 2));
        assert!((d - expected).is_zero().unwrap());
    }

    #[test]
    fn conjugate_split_substitution() {
        // f1 -> (u+v)/2, f2 -> (u-v)/(2i) in f1^2 - f2^2 gives (u^2+v^2)/2
        let mut b = BTreeMap::new();
        b.insert(Symbol::new("f1"), (s("u") + s("v")) / Expr::int(2));
        b.insert(Symbol::new("f2"), (s("u") - s("v")) / (Expr::int(2) * Expr::i()));
        let e = Expr::pow(s("f1"), 2) - Expr::pow(s("f2"), 2);
        let got = e.substitute(&b).unwrap();
        let want = ((Expr::pow(s("u"), 2) + Expr::pow(s("v"), 2)) / Expr::int(2)).normalize().unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn hodograph_rename() {
        let mut b = BTreeMap::new();
        b.insert(Symbol::new("u"), s("chi"));
        b.insert(Symbol::new("x"), s("U"));
        let got = (s("x") * s("u")).substitute(&b).unwrap();
        assert_eq!(got, (s("U") * s("chi")).normalize().unwrap());
    }

    #[test]
    fn evaluation() {
        let mut v = HashMap::new();
        v.insert(Symbol::new("x"), Complex64::new(2.0, 0.0));
        assert_eq!((Expr::pow(s("x"), 2) + Expr::one()).eval_complex(&v).unwrap(), Complex64::new(5.0, 0.0));
        let e = Expr::pow(s("f1'"), 3) - Expr::int(3) * s("f1'") * Expr::pow(s("f2'"), 2);
        v.insert(Symbol::new("f1'"), Complex64::new(1.0, 0.0));
        v.insert(Symbol::new("f2'"), Complex64::new(1.0, 0.0));
        assert_eq!(e.eval_complex(&v).unwrap(), Complex64::new(-2.0, 0.0));
    }

    #[test]
    fn printing() {
        let e = (Expr::pow(s("f1'"), 3) - Expr::int(3) * s("f1'") * Expr::pow(s("f2'"), 2)).normalize().unwrap();
        assert_eq!(e.to_string(), "f1'^3 - 3*f1'*f2'^2");
        let r = (s("x") - Expr::one() / s("u")).normalize().unwrap();
        assert_eq!(r.to_string(), "(u*x - 1)/u");
    }
}
