//! Numeric evaluation over `Complex64` with variables bound to slots.

use num_complex::Complex64;

use super::poly::Func;
use super::symbol::Symbol;
use super::Expr;

/// Magnitude below which a divisor counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("symbol `{0}` has no value")]
    Unbound(String),
    #[error("division by zero (pole)")]
    Pole,
    #[error("{0} evaluated at its branch point 0")]
    BranchPoint(&'static str),
}

#[derive(Clone, Debug)]
enum Node {
    Const(Complex64),
    Var(usize),
    Add(Vec<Node>),
    Mul(Vec<Node>),
    Pow(Box<Node>, i64),
    Call(Func, Box<Node>),
}

/// An expression prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    root: Node,
}

impl CompiledExpr {
    /// Compile `e`, binding each symbol to its index in `vars`.
    pub fn new(e: &Expr, vars: &[Symbol]) -> Result<Self, EvalError> {
        Ok(CompiledExpr { root: compile(e, vars)? })
    }

    pub fn eval(&self, vals: &[Complex64]) -> Result<Complex64, EvalError> {
        eval(&self.root, vals)
    }
}

fn compile(e: &Expr, vars: &[Symbol]) -> Result<Node, EvalError> {
    Ok(match e {
        Expr::Const(c) => Node::Const(c.to_c64()),
        Expr::Sym(s) => Node::Var(
            vars.iter().position(|v| v == s).ok_or_else(|| EvalError::Unbound(s.to_string()))?,
        ),
        Expr::Add(ts) => Node::Add(ts.iter().map(|t| compile(t, vars)).collect::<Result<_, _>>()?),
        Expr::Mul(fs) => Node::Mul(fs.iter().map(|t| compile(t, vars)).collect::<Result<_, _>>()?),
        Expr::Pow(b, k) => Node::Pow(Box::new(compile(b, vars)?), *k),
        Expr::Call(f, a) => Node::Call(*f, Box::new(compile(a, vars)?)),
    })
}

fn eval(n: &Node, vals: &[Complex64]) -> Result<Complex64, EvalError> {
    Ok(match n {
        Node::Const(c) => *c,
        Node::Var(i) => vals[*i],
        Node::Add(ts) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in ts {
                acc += eval(t, vals)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = Complex64::new(1.0, 0.0);
            for f in fs {
                acc *= eval(f, vals)?;
            }
            acc
        }
        Node::Pow(b, k) => {
            let v = eval(b, vals)?;
            if *k < 0 {
                if v.norm() < POLE_TOLERANCE {
                    return Err(EvalError::Pole);
                }
                v.inv().powi(i32::try_from(-k).unwrap_or(i32::MAX))
            } else {
                v.powi(i32::try_from(*k).unwrap_or(i32::MAX))
            }
        }
        Node::Call(f, a) => {
            let v = eval(a, vals)?;
            match f {
                Func::Exp => v.exp(),
                Func::Log if v.norm() == 0.0 => return Err(EvalError::BranchPoint("log")),
                Func::Log => v.ln(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Arctan => v.atan(),
                Func::Sqrt if v.norm() == 0.0 => return Err(EvalError::BranchPoint("sqrt")),
                Func::Sqrt => v.sqrt(),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_cos_at_origin() {
        let e = Expr::call(Func::Exp, Expr::sym("f1")) * Expr::call(Func::Cos, Expr::sym("f2"));
        let vars = [Symbol::new("f1"), Symbol::new("f2")];
        let c = CompiledExpr::new(&e, &vars).unwrap();
        assert_eq!(c.eval(&[Complex64::new(0.0, 0.0); 2]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn poles_and_branch_points() {
        let vars = [Symbol::new("x")];
        let zero = [Complex64::new(0.0, 0.0)];
        let r = CompiledExpr::new(&Expr::recip(Expr::sym("x")), &vars).unwrap();
        assert_eq!(r.eval(&zero), Err(EvalError::Pole));
        let l = CompiledExpr::new(&Expr::call(Func::Log, Expr::sym("x")), &vars).unwrap();
        assert_eq!(l.eval(&zero), Err(EvalError::BranchPoint("log")));
        assert!(CompiledExpr::new(&Expr::sym("y"), &vars).is_err());
    }
}
