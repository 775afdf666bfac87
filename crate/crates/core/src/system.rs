//! Real systems `f1'' = w1(x, f1, f2, f1', f2')`, `f2'' = w2(...)`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::expr::{CompiledExpr, EvalError, Expr, ExprError, RatFn, Symbol};
use crate::parser::{parse_system, NamedField, ParseError, SystemDocument};

/// Canonical variable names used by every analysis.
pub mod vars {
    use crate::expr::Symbol;

    pub fn x() -> Symbol {
        Symbol::new("x")
    }
    pub fn f1() -> Symbol {
        Symbol::new("f1")
    }
    pub fn f2() -> Symbol {
        Symbol::new("f2")
    }
    pub fn df1() -> Symbol {
        Symbol::new("f1'")
    }
    pub fn df2() -> Symbol {
        Symbol::new("f2'")
    }
    pub fn deps() -> [Symbol; 2] {
        [f1(), f2()]
    }
    pub fn derivs() -> [Symbol; 2] {
        [df1(), df2()]
    }
    /// `x, f1, f2, f1', f2'`: the slot order of compiled systems.
    pub fn state() -> [Symbol; 5] {
        [x(), f1(), f2(), df1(), df2()]
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SystemError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("symbol `{0}` is neither a state variable nor a declared parameter")]
    UndeclaredSymbol(String),
    #[error("parameter name `{0}` clashes with a canonical variable")]
    ParameterClash(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeSystem {
    pub name: Option<String>,
    params: Vec<Symbol>,
    omega: [Expr; 2],
    rat: [RatFn; 2],
    /// Generators declared in the source document.
    pub fields: Vec<NamedField>,
}

impl OdeSystem {
    pub fn new(omega1: Expr, omega2: Expr, params: Vec<Symbol>) -> Result<Self, SystemError> {
        let rat = [omega1.to_ratfn()?, omega2.to_ratfn()?];
        let allowed: Vec<Symbol> = vars::state().into_iter().chain(params.iter().cloned()).collect();
        for r in &rat {
            for s in r.free_symbols() {
                if !allowed.contains(&s) {
                    return Err(SystemError::UndeclaredSymbol(s.to_string()));
                }
            }
        }
        Ok(OdeSystem {
            name: None,
            params,
            omega: [rat[0].to_expr(), rat[1].to_expr()],
            rat,
            fields: Vec::new(),
        })
    }

    pub fn from_ratfns(r1: RatFn, r2: RatFn, params: Vec<Symbol>) -> Result<Self, SystemError> {
        OdeSystem::new(r1.to_expr(), r2.to_expr(), params)
    }

    pub fn parse(text: &str) -> Result<Self, SystemError> {
        OdeSystem::from_document(&parse_system(text)?)
    }

    /// Rename the document's variables to `x, f1, f2`.
    pub fn from_document(doc: &SystemDocument) -> Result<Self, SystemError> {
        let canon = vars::state();
        let declared = [
            doc.indep.clone(),
            doc.deps[0].clone(),
            doc.deps[1].clone(),
            doc.deps[0].primed(),
            doc.deps[1].primed(),
        ];
        for p in &doc.params {
            if canon.contains(p) && !declared.contains(p) {
                return Err(SystemError::ParameterClash(p.to_string()));
            }
        }
        let map: BTreeMap<Symbol, Expr> = declared
            .iter()
            .zip(canon.iter())
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.clone(), Expr::Sym(b.clone())))
            .collect();
        let mut sys = OdeSystem::new(doc.rhs[0].substitute(&map)?, doc.rhs[1].substitute(&map)?, doc.params.clone())?;
        sys.name = doc.name.clone();
        for nf in &doc.vector_fields {
            sys.fields.push(NamedField { name: nf.name.clone(), field: nf.field.substitute(&map)? });
        }
        Ok(sys)
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn omega(&self, i: usize) -> &Expr {
        &self.omega[i]
    }

    pub fn omegas(&self) -> &[Expr; 2] {
        &self.omega
    }

    pub fn rhs(&self, i: usize) -> &RatFn {
        &self.rat[i]
    }

    pub fn rhs_pair(&self) -> &[RatFn; 2] {
        &self.rat
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    /// Substitute values for parameters; bound parameters are dropped.
    pub fn bind(&self, values: &BTreeMap<Symbol, Expr>) -> Result<Self, SystemError> {
        let params = self.params.iter().filter(|p| !values.contains_key(*p)).cloned().collect();
        let mut s = OdeSystem::new(self.omega[0].substitute(values)?, self.omega[1].substitute(values)?, params)?;
        s.name = self.name.clone();
        Ok(s)
    }

    pub fn to_document(&self) -> SystemDocument {
        let [x, f1, f2, ..] = vars::state();
        SystemDocument {
            name: self.name.clone(),
            indep: x,
            deps: [f1, f2],
            params: self.params.clone(),
            rhs: self.omega.clone(),
            vector_fields: self.fields.clone(),
        }
    }

    /// Numeric form with slots `x, f1, f2, f1', f2'` followed by the
    /// parameters in declaration order.
    pub fn compile(&self) -> Result<CompiledSystem, EvalError> {
        let slots: Vec<Symbol> = vars::state().into_iter().chain(self.params.iter().cloned()).collect();
        Ok(CompiledSystem {
            w: [CompiledExpr::new(&self.omega[0], &slots)?, CompiledExpr::new(&self.omega[1], &slots)?],
            nparams: self.params.len(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct CompiledSystem {
    w: [CompiledExpr; 2],
    nparams: usize,
}

impl CompiledSystem {
    pub fn nparams(&self) -> usize {
        self.nparams
    }

    /// Right-hand sides at a real state; the imaginary parts of complex
    /// parameters are carried through.
    pub fn eval(&self, x: f64, state: &[f64; 4], params: &[Complex64]) -> Result<[Complex64; 2], EvalError> {
        let mut slots = Vec::with_capacity(5 + params.len());
        slots.push(Complex64::new(x, 0.0));
        slots.extend(state.iter().map(|v| Complex64::new(*v, 0.0)));
        slots.extend_from_slice(params);
        Ok([self.w[0].eval(&slots)?, self.w[1].eval(&slots)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renames_document_variables() {
        let s = OdeSystem::parse("system s\nvars t, y, z\neq1: y'' = t*z'\neq2: z'' = y\nvf A: xi = 1; eta1 = z; eta2 = 0").unwrap();
        assert_eq!(s.omega(0), &(Expr::sym("x") * Expr::sym("f2'")).normalize().unwrap());
        assert_eq!(s.fields[0].field.eta1, Expr::sym("f2"));
    }

    #[test]
    fn rejects_unknown_symbols() {
        let err = OdeSystem::new(Expr::sym("q"), Expr::zero(), vec![]).unwrap_err();
        assert!(matches!(err, SystemError::UndeclaredSymbol(s) if s == "q"));
    }
}
