use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// An interned-by-value symbol name such as `x`, `f1` or `f1'`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The first-derivative symbol `name'`.
    pub fn primed(&self) -> Symbol {
        Symbol::new(&format!("{}'", self.0))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Independent,
    Dependent,
    /// First derivative of the dependent variable at the given table index.
    Derivative(usize),
    Parameter,
}

#[derive(Clone, Debug, thiserror::Error, PartialEq, Eq)]
pub enum SymbolTableError {
    #[error("symbol `{0}` declared twice")]
    Duplicate(String),
    #[error("derivative `{0}` must refer to a dependent variable")]
    BadDerivative(String),
}

/// Ordered symbol declarations with their roles.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SymbolTable {
    entries: Vec<(Symbol, Role)>,
}

impl SymbolTable {
    pub fn new() -> Self {
        SymbolTable::default()
    }

    /// Table for an ODE in `indep` with the given dependent variables; each
    /// dependent variable gets its primed derivative symbol.
    pub fn for_ode(indep: &str, deps: &[&str], params: &[Symbol]) -> Result<Self, SymbolTableError> {
        let mut t = SymbolTable::new();
        t.declare(Symbol::new(indep), Role::Independent)?;
        for d in deps {
            let idx = t.declare(Symbol::new(d), Role::Dependent)?;
            t.declare(Symbol::new(d).primed(), Role::Derivative(idx))?;
        }
        for p in params {
            t.declare(p.clone(), Role::Parameter)?;
        }
        Ok(t)
    }

    pub fn declare(&mut self, sym: Symbol, role: Role) -> Result<usize, SymbolTableError> {
        if self.contains(&sym) {
            return Err(SymbolTableError::Duplicate(sym.to_string()));
        }
        if let Role::Derivative(base) = role {
            if !matches!(self.entries.get(base), Some((_, Role::Dependent))) {
                return Err(SymbolTableError::BadDerivative(sym.to_string()));
            }
        }
        self.entries.push((sym, role));
        Ok(self.entries.len() - 1)
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.entries.iter().any(|(s, _)| s == sym)
    }

    pub fn role(&self, sym: &Symbol) -> Option<Role> {
        self.entries.iter().find(|(s, _)| s == sym).map(|(_, r)| *r)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn with_role(&self, role: Role) -> Vec<Symbol> {
        self.entries.iter().filter(|(_, r)| *r == role).map(|(s, _)| s.clone()).collect()
    }

    pub fn parameters(&self) -> Vec<Symbol> {
        self.with_role(Role::Parameter)
    }

    /// Base dependent variable of a derivative symbol.
    pub fn base_of(&self, sym: &Symbol) -> Option<&Symbol> {
        match self.role(sym)? {
            Role::Derivative(i) => self.entries.get(i).map(|(s, _)| s),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_link_to_base() {
        let t = SymbolTable::for_ode("x", &["f1", "f2"], &[Symbol::new("c1")]).unwrap();
        assert_eq!(t.base_of(&Symbol::new("f2'")).unwrap().name(), "f2");
        assert_eq!(t.role(&Symbol::new("c1")), Some(Role::Parameter));
        assert_eq!(t.parameters().len(), 1);
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = SymbolTable::for_ode("x", &["x"], &[]).unwrap_err();
        assert_eq!(err, SymbolTableError::Duplicate("x".into()));
    }
}
