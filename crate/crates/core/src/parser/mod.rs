//! The `.odesys` text format: expressions, vector fields and ODE documents.
//!
//! ```text
//! system sys3
//! vars x, f1, f2
//! eq1: f1'' = f1'^3 - 3*f1'*f2'^2
//! eq2: f2'' = 3*f1'^2*f2' - f2'^3
//! vf X1: xi = 1; eta1 = 0; eta2 = 0
//! ```
//!
//! The full grammar is in `docs/dsl.md`.

mod lexer;

use std::collections::HashSet;
use std::fmt;

use crate::expr::{rational_from_decimal, CRat, Expr, ExprError, Func, Symbol};
use crate::symmetry::VectorField;
use lexer::{tokenize, Tok, Token};

const KEYWORDS: [&str; 8] = ["system", "complex", "vars", "params", "eq1", "eq2", "eq", "vf"];

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("expected {}, found {found}", expected.join(" or "))]
    Syntax { expected: Vec<String>, found: String },
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
    #[error("exponent must be an integer")]
    NonIntegerExponent,
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("second derivative `{0}` is not allowed on the right-hand side")]
    SecondDerivative(String),
    #[error("the imaginary unit `i` is only allowed in complex documents")]
    ImaginaryUnit,
    #[error("`{0}` is a reserved word")]
    Reserved(String),
    #[error("`{0}` declared twice")]
    Duplicate(String),
    #[error("missing equation `{0}`")]
    MissingEquation(&'static str),
    #[error("left-hand side must be `{0}`")]
    BadLeftSide(String),
    #[error("wrong number of variables: expected {0}")]
    VarCount(&'static str),
    #[error("vector field is missing component `{0}`")]
    MissingComponent(&'static str),
    #[error("document kind mismatch: expected a `{0}` document")]
    WrongKind(&'static str),
    #[error("{0}")]
    Algebra(ExprError),
}

/// A named generator attached to a document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedField {
    pub name: String,
    pub field: VectorField,
}

/// A real system `f1'' = w1, f2'' = w2` with right-hand sides in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemDocument {
    pub name: Option<String>,
    pub indep: Symbol,
    pub deps: [Symbol; 2],
    pub params: Vec<Symbol>,
    pub rhs: [Expr; 2],
    pub vector_fields: Vec<NamedField>,
}

/// A scalar complex ODE `u'' = w(x, u, u')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexDocument {
    pub name: Option<String>,
    pub indep: Symbol,
    pub dep: Symbol,
    pub params: Vec<Symbol>,
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    System(SystemDocument),
    Complex(ComplexDocument),
}

/// Parse a standalone expression. Any identifier is accepted as a symbol
/// and `i` denotes the imaginary unit.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text, Scope::open(true))?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parse `xi = ...; eta1 = ...; eta2 = ...` (components in any order).
pub fn parse_vector_field(text: &str) -> Result<VectorField, ParseError> {
    let mut p = Parser::new(text, Scope::open(false))?;
    let f = p.field_components()?;
    p.expect_eof()?;
    Ok(f)
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    Parser::new(text, Scope::open(false))?.document()
}

pub fn parse_system(text: &str) -> Result<SystemDocument, ParseError> {
    match parse_document(text)? {
        Document::System(d) => Ok(d),
        Document::Complex(_) => Err(ParseError { line: 1, col: 1, kind: ParseErrorKind::WrongKind("system") }),
    }
}

pub fn parse_complex_ode(text: &str) -> Result<ComplexDocument, ParseError> {
    match parse_document(text)? {
        Document::Complex(d) => Ok(d),
        Document::System(_) => Err(ParseError { line: 1, col: 1, kind: ParseErrorKind::WrongKind("complex") }),
    }
}

struct Scope {
    /// `None` accepts every identifier.
    allowed: Option<HashSet<String>>,
    allow_i: bool,
    allow_second: bool,
}

impl Scope {
    fn open(allow_i: bool) -> Scope {
        Scope { allowed: None, allow_i, allow_second: true }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scope: Scope,
}

fn syntax(t: &Token, expected: &[&str]) -> ParseError {
    ParseError {
        line: t.line,
        col: t.col,
        kind: ParseErrorKind::Syntax {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        },
    }
}

fn err_at(t: &Token, kind: ParseErrorKind) -> ParseError {
    ParseError { line: t.line, col: t.col, kind }
}

impl Parser {
    fn new(text: &str, scope: Scope) -> Result<Parser, ParseError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, scope })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(syntax(self.peek(), &[name]))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(syntax(self.peek(), &["operator", "end of input"]))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s, 0) if s == kw)
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term()?);
            } else if self.eat(&Tok::Minus) {
                terms.push(Expr::neg(self.term()?));
            } else {
                return Ok(Expr::add(terms));
            }
        }
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = Expr::mul(vec![acc, self.unary()?]);
            } else if self.eat(&Tok::Slash) {
                acc = Expr::mul(vec![acc, Expr::recip(self.unary()?)]);
            } else {
                return Ok(acc);
            }
        }
    }

    // unary := ('-' | '+') unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::neg(self.unary()?));
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    // power := primary ('^' exponent)?
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let paren = self.eat(&Tok::LParen);
        let neg = self.eat(&Tok::Minus);
        let t = self.bump();
        let k: i64 = match &t.tok {
            Tok::Number(n) => n.parse().map_err(|_| err_at(&t, ParseErrorKind::NonIntegerExponent))?,
            _ => return Err(syntax(&t, &["integer exponent"])),
        };
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(Expr::pow(base, if neg { -k } else { k }))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Number(n) => {
                let r = rational_from_decimal(n).ok_or_else(|| err_at(&t, ParseErrorKind::InvalidNumber(n.clone())))?;
                Ok(Expr::Const(CRat::real(r)))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name, primes) => {
                if *primes == 0 {
                    if let Some(f) = Func::from_name(name) {
                        self.expect(Tok::LParen, "`(`")?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        return Ok(Expr::call(f, arg));
                    }
                    if name == "i" {
                        return if self.scope.allow_i {
                            Ok(Expr::i())
                        } else {
                            Err(err_at(&t, ParseErrorKind::ImaginaryUnit))
                        };
                    }
                    if KEYWORDS.contains(&name.as_str()) {
                        return Err(err_at(&t, ParseErrorKind::Reserved(name.clone())));
                    }
                }
                let full = format!("{name}{}", "'".repeat(*primes));
                if *primes >= 2 && !self.scope.allow_second {
                    return Err(err_at(&t, ParseErrorKind::SecondDerivative(full)));
                }
                if let Some(allowed) = &self.scope.allowed {
                    if !allowed.contains(&full) {
                        return Err(err_at(&t, ParseErrorKind::UndeclaredSymbol(full)));
                    }
                }
                Ok(Expr::Sym(Symbol::new(&full)))
            }
            _ => Err(syntax(&t, &["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s, 0) if !KEYWORDS.contains(&s.as_str()) && Func::from_name(s).is_none() => {
                if s == "i" {
                    return Err(err_at(&t, ParseErrorKind::Reserved(s.clone())));
                }
                Ok((s.clone(), t))
            }
            Tok::Ident(s, 0) => Err(err_at(&t, ParseErrorKind::Reserved(s.clone()))),
            _ => Err(syntax(&t, &[what])),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<(String, Token)>, ParseError> {
        let mut out = vec![self.ident("identifier")?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident("identifier")?);
        }
        Ok(out)
    }

    fn field_components(&mut self) -> Result<VectorField, ParseError> {
        let mut comps: [Option<Expr>; 3] = [None, None, None];
        let names = ["xi", "eta1", "eta2"];
        loop {
            let t = self.bump();
            let idx = match &t.tok {
                Tok::Ident(s, 0) => names.iter().position(|n| n == s),
                _ => None,
            }
            .ok_or_else(|| syntax(&t, &["`xi`", "`eta1`", "`eta2`"]))?;
            if comps[idx].is_some() {
                return Err(err_at(&t, ParseErrorKind::Duplicate(names[idx].to_string())));
            }
            self.expect(Tok::Eq, "`=`")?;
            let e = self.expr()?;
            comps[idx] = Some(e.normalize().map_err(|e| err_at(&t, ParseErrorKind::Algebra(e)))?);
            if comps.iter().all(Option::is_some) {
                self.eat(&Tok::Semi);
                break;
            }
            if !self.eat(&Tok::Semi) {
                let missing = names[comps.iter().position(Option::is_none).unwrap()];
                return Err(err_at(self.peek(), ParseErrorKind::MissingComponent(missing)));
            }
        }
        let [xi, eta1, eta2] = comps.map(Option::unwrap);
        Ok(VectorField::new(xi, eta1, eta2))
    }

    fn document(&mut self) -> Result<Document, ParseError> {
        let head = self.bump();
        let complex = match &head.tok {
            Tok::Ident(s, 0) if s == "system" => false,
            Tok::Ident(s, 0) if s == "complex" => true,
            _ => return Err(syntax(&head, &["`system`", "`complex`"])),
        };
        let name = match &self.peek().tok {
            Tok::Ident(s, 0) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Some(s)
            }
            _ => None,
        };
        let mut vars: Vec<String> = if complex { vec!["x".into(), "u".into()] } else { vec!["x".into(), "f1".into(), "f2".into()] };
        if self.at_keyword("vars") {
            let kw = self.bump();
            let list = self.ident_list()?;
            if list.len() != vars.len() {
                return Err(err_at(&kw, ParseErrorKind::VarCount(if complex { "x, u" } else { "x, f1, f2" })));
            }
            vars = list.into_iter().map(|(s, _)| s).collect();
        }
        let mut params = Vec::new();
        if self.at_keyword("params") {
            self.bump();
            for (p, t) in self.ident_list()? {
                if params.contains(&p) || vars.contains(&p) {
                    return Err(err_at(&t, ParseErrorKind::Duplicate(p)));
                }
                params.push(p);
            }
        }
        let mut seen = HashSet::new();
        for v in &vars {
            if !seen.insert(v.clone()) {
                return Err(err_at(&head, ParseErrorKind::Duplicate(v.clone())));
            }
        }
        let mut allowed: HashSet<String> = vars.iter().cloned().collect();
        for d in &vars[1..] {
            allowed.insert(format!("{d}'"));
        }
        allowed.extend(params.iter().cloned());
        self.scope = Scope { allowed: Some(allowed), allow_i: complex, allow_second: false };

        let eq_names: &[&'static str] = if complex { &["eq"] } else { &["eq1", "eq2"] };
        let mut rhs: Vec<Option<Expr>> = vec![None; eq_names.len()];
        let mut fields = Vec::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(s, 0) if eq_names.contains(&s.as_str()) => {
                    let k = eq_names.iter().position(|n| n == s).unwrap();
                    if rhs[k].is_some() {
                        return Err(err_at(&t, ParseErrorKind::Duplicate(s.clone())));
                    }
                    self.bump();
                    self.expect(Tok::Colon, "`:`")?;
                    let lhs = self.bump();
                    let dep = &vars[k + 1];
                    if lhs.tok != Tok::Ident(dep.clone(), 2) {
                        return Err(err_at(&lhs, ParseErrorKind::BadLeftSide(format!("{dep}''"))));
                    }
                    self.expect(Tok::Eq, "`=`")?;
                    let e = self.expr()?;
                    rhs[k] = Some(e.normalize().map_err(|e| err_at(&t, ParseErrorKind::Algebra(e)))?);
                }
                Tok::Ident(s, 0) if s == "vf" && !complex => {
                    self.bump();
                    let (name, nt) = self.ident("field name")?;
                    if fields.iter().any(|f: &NamedField| f.name == name) {
                        return Err(err_at(&nt, ParseErrorKind::Duplicate(name)));
                    }
                    self.expect(Tok::Colon, "`:`")?;
                    let saved = self.scope.allowed.clone();
                    if let Some(a) = &mut self.scope.allowed {
                        // generators are point fields: no derivatives
                        a.retain(|s| !s.ends_with('\''));
                    }
                    let field = self.field_components();
                    self.scope.allowed = saved;
                    fields.push(NamedField { name, field: field? });
                }
                _ => {
                    let mut exp: Vec<&str> = eq_names.to_vec();
                    if !complex {
                        exp.push("vf");
                    }
                    exp.push("end of input");
                    return Err(syntax(&t, &exp));
                }
            }
        }
        for (k, r) in rhs.iter().enumerate() {
            if r.is_none() {
                return Err(err_at(self.peek(), ParseErrorKind::MissingEquation(eq_names[k])));
            }
        }
        let rhs: Vec<Expr> = rhs.into_iter().map(Option::unwrap).collect();
        let params: Vec<Symbol> = params.iter().map(|p| Symbol::new(p)).collect();
        Ok(if complex {
            Document::Complex(ComplexDocument {
                name,
                indep: Symbol::new(&vars[0]),
                dep: Symbol::new(&vars[1]),
                params,
                rhs: rhs.into_iter().next().unwrap(),
            })
        } else {
            let mut it = rhs.into_iter();
            Document::System(SystemDocument {
                name,
                indep: Symbol::new(&vars[0]),
                deps: [Symbol::new(&vars[1]), Symbol::new(&vars[2])],
                params,
                rhs: [it.next().unwrap(), it.next().unwrap()],
                vector_fields: fields,
            })
        })
    }
}

fn write_header(f: &mut fmt::Formatter<'_>, kw: &str, name: &Option<String>, vars: &[&Symbol], params: &[Symbol]) -> fmt::Result {
    match name {
        Some(n) => writeln!(f, "{kw} {n}")?,
        None => writeln!(f, "{kw}")?,
    }
    let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    writeln!(f, "vars {}", vars.join(", "))?;
    if !params.is_empty() {
        let ps: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        writeln!(f, "params {}", ps.join(", "))?;
    }
    Ok(())
}

impl fmt::Display for SystemDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_header(f, "system", &self.name, &[&self.indep, &self.deps[0], &self.deps[1]], &self.params)?;
        writeln!(f, "eq1: {}'' = {}", self.deps[0], self.rhs[0])?;
        writeln!(f, "eq2: {}'' = {}", self.deps[1], self.rhs[1])?;
        for nf in &self.vector_fields {
            let v = &nf.field;
            writeln!(f, "vf {}: xi = {}; eta1 = {}; eta2 = {}", nf.name, v.xi, v.eta1, v.eta2)?;
        }
        Ok(())
    }
}

impl fmt::Display for ComplexDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_header(f, "complex", &self.name, &[&self.indep, &self.dep], &self.params)?;
        writeln!(f, "eq: {}'' = {}", self.dep, self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_expression_has_two_monomials() {
        let e = parse_expression("f1'^3 - 3*f1'*f2'^2").unwrap().normalize().unwrap();
        match e {
            Expr::Add(ts) => assert_eq!(ts.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn open_paren_error_position() {
        let err = parse_expression("(").unwrap_err();
        assert_eq!((err.line, err.col), (1, 2));
        assert!(matches!(err.kind, ParseErrorKind::Syntax { .. }));
    }

    #[test]
    fn reciprocal_difference() {
        let e = parse_expression("x - 1/u").unwrap();
        let expected = Expr::sym("x") - Expr::recip(Expr::sym("u"));
        assert_eq!(e, expected);
    }

    #[test]
    fn exponent_forms() {
        let a = parse_expression("x^-2").unwrap();
        let b = parse_expression("x^(-2)").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_expression("-x^2").unwrap(), Expr::neg(Expr::pow(Expr::sym("x"), 2)));
        assert!(parse_expression("x^0.5").is_err());
    }

    #[test]
    fn missing_equation() {
        let err = parse_system("system s\neq1: f1'' = f1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingEquation("eq2"));
    }

    #[test]
    fn second_derivative_rejected_on_rhs() {
        let err = parse_system("system s\neq1: f1'' = f2''\neq2: f2'' = 0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::SecondDerivative("f2''".into()));
        assert_eq!((err.line, err.col), (2, 13));
    }

    #[test]
    fn undeclared_symbol_and_imaginary_unit() {
        let err = parse_system("system s\neq1: f1'' = a*f1\neq2: f2'' = 0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndeclaredSymbol("a".into()));
        let err = parse_system("system s\neq1: f1'' = i*f1\neq2: f2'' = 0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ImaginaryUnit);
        let c = parse_complex_ode("complex c\neq: u'' = i*u'").unwrap();
        assert_eq!(c.rhs, (Expr::i() * Expr::sym("u'")).normalize().unwrap());
    }

    #[test]
    fn vector_fields() {
        let v = parse_vector_field("xi=x^2; eta1=-2*x*f1; eta2=-2*x*f2").unwrap();
        assert_eq!(v.xi, Expr::pow(Expr::sym("x"), 2));
        let err = parse_vector_field("xi = 1; eta1 = 0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingComponent("eta2"));
    }

    #[test]
    fn custom_variable_names_and_multiline_expressions() {
        let d = parse_system("system s\nvars t, y, z\nparams k\neq1: y'' = k*y' +\n   z\neq2: z'' = -y").unwrap();
        assert_eq!(d.deps[1].name(), "z");
        assert_eq!(d.rhs[0], parse_expression("k*y' + z").unwrap().normalize().unwrap());
    }
}
