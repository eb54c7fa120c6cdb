//! Closed-form chart functions `f(z, z̄)` and the symbol catalog.
//!
//! An [`Expr`] is a small expression tree over `z`, `z̄` and complex constants
//! that can be evaluated over any [`Scalar`], in particular over jets. Symbols
//! given as strings are parsed with [`Expr::parse`]:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names: `z`, `zbar`, `x1`, `x2`, `x3`, `r2` (= z z̄), `psi`, `i`, `pi`; functions
//! `exp`, `log`, `sqrt`, `re`, `im`, `conj`.

use crate::error::{Error, Result};
use crate::numkit::{hyperdual_jet, Jet, Scalar, C64};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(C64),
    Z,
    Zbar,
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Exp(Expr),
    Ln(Expr),
    Powi(Expr, i32),
    Powf(Expr, f64),
}

/// Immutable expression in `z` and `z̄`; cheap to clone.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Expr {
    fn node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn constant(c: C64) -> Self {
        Self::node(Node::Const(c))
    }

    pub fn real(c: f64) -> Self {
        Self::constant(C64::new(c, 0.0))
    }

    pub fn z() -> Self {
        Self::node(Node::Z)
    }

    pub fn zbar() -> Self {
        Self::node(Node::Zbar)
    }

    /// `z z̄`.
    pub fn r2() -> Self {
        Self::z() * Self::zbar()
    }

    pub fn exp(&self) -> Self {
        Self::node(Node::Exp(self.clone()))
    }

    pub fn ln(&self) -> Self {
        Self::node(Node::Ln(self.clone()))
    }

    pub fn powi(&self, n: i32) -> Self {
        Self::node(Node::Powi(self.clone(), n))
    }

    pub fn powf(&self, e: f64) -> Self {
        Self::node(Node::Powf(self.clone(), e))
    }

    pub fn as_constant(&self) -> Option<C64> {
        match &*self.0 {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Evaluate with `z` and `z̄` bound to the given scalars.
    pub fn eval<S: Scalar>(&self, z: &S, zbar: &S) -> S {
        match &*self.0 {
            Node::Const(c) => z.lift(*c),
            Node::Z => z.clone(),
            Node::Zbar => zbar.clone(),
            Node::Add(a, b) => a.eval(z, zbar) + b.eval(z, zbar),
            Node::Sub(a, b) => a.eval(z, zbar) - b.eval(z, zbar),
            Node::Mul(a, b) => a.eval(z, zbar) * b.eval(z, zbar),
            Node::Div(a, b) => a.eval(z, zbar) / b.eval(z, zbar),
            Node::Neg(a) => -a.eval(z, zbar),
            Node::Exp(a) => a.eval(z, zbar).exp(),
            Node::Ln(a) => a.eval(z, zbar).ln(),
            Node::Powi(a, n) => a.eval(z, zbar).powi(*n),
            Node::Powf(a, e) => a.eval(z, zbar).powf(*e),
        }
    }

    /// Value at a chart point.
    pub fn at(&self, z: C64) -> C64 {
        self.eval(&z, &z.conj())
    }

    /// Jet in `(z, z̄)` at `x`.
    pub fn jet(&self, x: C64, order: usize) -> Result<Jet> {
        hyperdual_jet(|z, zb| self.eval(z, zb), x, order)
    }

    /// The expression for `conj(f)`.
    pub fn conj(&self) -> Self {
        match &*self.0 {
            Node::Const(c) => Self::constant(c.conj()),
            Node::Z => Self::zbar(),
            Node::Zbar => Self::z(),
            Node::Add(a, b) => a.conj() + b.conj(),
            Node::Sub(a, b) => a.conj() - b.conj(),
            Node::Mul(a, b) => a.conj() * b.conj(),
            Node::Div(a, b) => a.conj() / b.conj(),
            Node::Neg(a) => -a.conj(),
            Node::Exp(a) => a.conj().exp(),
            Node::Ln(a) => a.conj().ln(),
            Node::Powi(a, n) => a.conj().powi(*n),
            Node::Powf(a, e) => a.conj().powf(*e),
        }
    }

    /// `∂f/∂z` (`var = 0`) or `∂f/∂z̄` (`var = 1`), treating `z`, `z̄` as independent.
    pub fn derivative(&self, var: usize) -> Self {
        let zero = || Self::real(0.0);
        match &*self.0 {
            Node::Const(_) => zero(),
            Node::Z => Self::real(if var == 0 { 1.0 } else { 0.0 }),
            Node::Zbar => Self::real(if var == 1 { 1.0 } else { 0.0 }),
            Node::Add(a, b) => a.derivative(var) + b.derivative(var),
            Node::Sub(a, b) => a.derivative(var) - b.derivative(var),
            Node::Mul(a, b) => a.derivative(var) * b.clone() + a.clone() * b.derivative(var),
            Node::Div(a, b) => (a.derivative(var) * b.clone() - a.clone() * b.derivative(var)) / b.powi(2),
            Node::Neg(a) => -a.derivative(var),
            Node::Exp(a) => self.clone() * a.derivative(var),
            Node::Ln(a) => a.derivative(var) / a.clone(),
            Node::Powi(a, n) => {
                if *n == 0 {
                    zero()
                } else {
                    Self::real(*n as f64) * a.powi(n - 1) * a.derivative(var)
                }
            }
            Node::Powf(a, e) => Self::real(*e) * a.powf(e - 1.0) * a.derivative(var),
        }
    }

    pub fn re(&self) -> Self {
        (self.clone() + self.conj()) * Self::real(0.5)
    }

    pub fn im(&self) -> Self {
        (self.clone() - self.conj()) * Self::constant(C64::new(0.0, -0.5))
    }

    /// Stereographic embedding coordinates of the unit sphere.
    pub fn x1() -> Self {
        (Self::z() + Self::zbar()) / (Self::real(1.0) + Self::r2())
    }

    pub fn x2() -> Self {
        (Self::z() - Self::zbar()) * Self::constant(C64::new(0.0, -1.0)) / (Self::real(1.0) + Self::r2())
    }

    pub fn x3() -> Self {
        (Self::real(1.0) - Self::r2()) / (Self::real(1.0) + Self::r2())
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) if c.im == 0.0 => write!(f, "{}", c.re),
            Node::Const(c) if c.re == 0.0 => write!(f, "({}*i)", c.im),
            Node::Const(c) => write!(f, "({}+{}*i)", c.re, c.im),
            Node::Z => write!(f, "z"),
            Node::Zbar => write!(f, "zbar"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/{b}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "log({a})"),
            Node::Powi(a, n) => write!(f, "{a}^{n}"),
            Node::Powf(a, e) => write!(f, "{a}^({e})"),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $node:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::node(Node::$node(self, rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::node(Node::Neg(self))
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: format!("{message} in '{}'", self.src),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    lhs = lhs * self.unary()?;
                }
                b'/' => {
                    self.pos += 1;
                    lhs = lhs / self.unary()?;
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let exponent = self.unary()?;
            let e = exponent
                .as_constant()
                .or_else(|| fold_constant(&exponent))
                .ok_or(Error::Parse {
                    offset: at,
                    message: format!("exponent must be a real constant in '{}'", self.src),
                })?;
            if e.im != 0.0 {
                return Err(Error::Parse {
                    offset: at,
                    message: format!("exponent must be a real constant in '{}'", self.src),
                });
            }
            let p = e.re;
            if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                return Ok(base.powi(p as i32));
            }
            return Ok(base.powf(p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'e' || self.bytes[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>().map(Expr::real).map_err(|_| Error::Parse {
            offset: start,
            message: format!("bad number '{text}' in '{}'", self.src),
        })
    }

    fn name(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.error("expected ')'"));
            }
            self.pos += 1;
            return match name {
                "exp" => Ok(arg.exp()),
                "log" | "ln" => Ok(arg.ln()),
                "sqrt" => Ok(arg.powf(0.5)),
                "re" => Ok(arg.re()),
                "im" => Ok(arg.im()),
                "conj" => Ok(arg.conj()),
                _ => Err(Error::Parse {
                    offset: start,
                    message: format!("unknown function '{name}' in '{}'", self.src),
                }),
            };
        }
        match name {
            "z" => Ok(Expr::z()),
            "zbar" | "zb" => Ok(Expr::zbar()),
            "x1" => Ok(Expr::x1()),
            "x2" => Ok(Expr::x2()),
            "x3" => Ok(Expr::x3()),
            "r2" => Ok(Expr::r2()),
            "psi" => Ok(Expr::z().re() / (Expr::real(1.0) + Expr::r2()).powi(2)),
            "i" => Ok(Expr::constant(C64::new(0.0, 1.0))),
            "pi" => Ok(Expr::real(std::f64::consts::PI)),
            _ => Err(Error::Parse {
                offset: start,
                message: format!("unknown name '{name}' in '{}'", self.src),
            }),
        }
    }
}

fn fold_constant(e: &Expr) -> Option<C64> {
    // An expression without z or z̄ evaluates to the same value everywhere.
    let a = e.at(C64::new(0.3, 0.1));
    let b = e.at(C64::new(-0.7, 0.4));
    if a == b && a.is_finite() {
        Some(a)
    } else {
        None
    }
}

/// Numeric evaluator for symbols without a closed form.
pub type SampledFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A named chart function used as a Toeplitz symbol.
#[derive(Clone)]
pub struct Symbol {
    pub name: String,
    body: SymbolBody,
}

#[derive(Clone)]
enum SymbolBody {
    Closed(Expr),
    Sampled(SampledFn),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            SymbolBody::Closed(e) => write!(f, "Symbol({} = {e})", self.name),
            SymbolBody::Sampled(_) => write!(f, "Symbol({}, sampled)", self.name),
        }
    }
}

impl Symbol {
    pub fn new(name: impl Into<String>, expr: Expr) -> Self {
        Self {
            name: name.into(),
            body: SymbolBody::Closed(expr),
        }
    }

    pub fn sampled(name: impl Into<String>, f: SampledFn) -> Self {
        Self {
            name: name.into(),
            body: SymbolBody::Sampled(f),
        }
    }

    /// Parse a catalog name or a formula.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(text.trim(), Expr::parse(text)?))
    }

    pub fn one() -> Self {
        Self::new("1", Expr::real(1.0))
    }

    pub fn at(&self, z: C64) -> C64 {
        match &self.body {
            SymbolBody::Closed(e) => e.at(z),
            SymbolBody::Sampled(f) => f(z),
        }
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.body {
            SymbolBody::Closed(e) => Some(e),
            SymbolBody::Sampled(_) => None,
        }
    }

    pub fn jet(&self, x: C64, order: usize) -> Result<Jet> {
        match &self.body {
            SymbolBody::Closed(e) => e.jet(x, order),
            SymbolBody::Sampled(_) => Err(Error::MissingJets(format!(
                "symbol '{}' has no closed form to differentiate",
                self.name
            ))),
        }
    }

    /// Pointwise product, kept in closed form when both factors are.
    pub fn product(&self, other: &Symbol) -> Symbol {
        let name = format!("({})*({})", self.name, other.name);
        match (&self.body, &other.body) {
            (SymbolBody::Closed(a), SymbolBody::Closed(b)) => Symbol::new(name, a.clone() * b.clone()),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Symbol::sampled(name, Arc::new(move |z| a.at(z) * b.at(z)))
            }
        }
    }

    pub fn conj(&self) -> Symbol {
        let name = format!("conj({})", self.name);
        match &self.body {
            SymbolBody::Closed(e) => Symbol::new(name, e.conj()),
            SymbolBody::Sampled(_) => {
                let a = self.clone();
                Symbol::sampled(name, Arc::new(move |z| a.at(z).conj()))
            }
        }
    }
}

/// Named entries of the built-in symbol catalog: `(name, formula, description)`.
pub const SYMBOL_CATALOG: &[(&str, &str, &str)] = &[
    ("1", "1", "constant function"),
    ("x1", "(z + zbar)/(1 + z*zbar)", "first sphere coordinate"),
    ("x2", "-i*(z - zbar)/(1 + z*zbar)", "second sphere coordinate"),
    ("x3", "(1 - z*zbar)/(1 + z*zbar)", "height function on the sphere"),
    ("r2", "z*zbar", "squared chart radius"),
    ("psi", "re(z)/(1 + z*zbar)^2", "default metric perturbation"),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-13 * (1.0 + b.norm())
    }

    #[test]
    fn parse_catalog_formulas_match_builders() {
        let z = C64::new(0.37, -0.81);
        for (name, formula, _) in SYMBOL_CATALOG {
            let by_name = Expr::parse(name).unwrap();
            let by_formula = Expr::parse(formula).unwrap();
            assert!(close(by_name.at(z), by_formula.at(z)), "{name}");
        }
        assert!(close(
            Expr::x3().at(z),
            (1.0 - z.norm_sqr()) / (1.0 + z.norm_sqr()) + C64::new(0.0, 0.0)
        ));
    }

    #[test]
    fn sphere_coordinates_are_unit() {
        let z = C64::new(-1.3, 0.4);
        let s: f64 = [Expr::x1(), Expr::x2(), Expr::x3()]
            .iter()
            .map(|e| e.at(z).re.powi(2))
            .sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert!(Expr::x2().at(z).im.abs() < 1e-15);
    }

    #[test]
    fn precedence_and_powers() {
        let e = Expr::parse("1 + 2*3^2 - -4/2").unwrap();
        assert!(close(e.at(C64::new(0.0, 0.0)), C64::new(21.0, 0.0)));
        let e = Expr::parse("z^2*zbar").unwrap();
        let z = C64::new(0.5, 0.5);
        assert!(close(e.at(z), z * z * z.conj()));
        let e = Expr::parse("r2^(1/2)").unwrap();
        assert!(close(e.at(z), C64::new(z.norm(), 0.0)));
        let e = Expr::parse("exp(-2.5e-1*r2)").unwrap();
        assert!(close(e.at(z), C64::new((-0.25 * z.norm_sqr()).exp(), 0.0)));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match Expr::parse("z + foo") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("(z").is_err());
        assert!(Expr::parse("z^z").is_err());
        assert!(Expr::parse("").is_err());
    }

    #[test]
    fn conj_and_re() {
        let e = Expr::parse("re(z^2)").unwrap();
        let z = C64::new(0.3, 0.9);
        assert!(close(e.at(z), C64::new((z * z).re, 0.0)));
        assert!(close(Expr::parse("conj(i*z)").unwrap().at(z), (C64::i() * z).conj()));
    }

    #[test]
    fn jet_of_expression() {
        let e = Expr::parse("log(1 + r2)/2").unwrap();
        let j = e.jet(C64::new(0.0, 0.0), 4).unwrap();
        assert!(close(j.partial(&[1, 1]), C64::new(0.5, 0.0)));
    }

    #[test]
    fn symbolic_derivative_matches_jets() {
        let e = Expr::parse("exp(x1) * log(2 + r2)^2 / (1 + z^3)").unwrap();
        let x = C64::new(0.21, -0.34);
        let j = e.jet(x, 2).unwrap();
        assert!(close(e.derivative(0).at(x), j.partial(&[1, 0])));
        assert!(close(e.derivative(1).at(x), j.partial(&[0, 1])));
        assert!(close(e.derivative(0).derivative(1).at(x), j.partial(&[1, 1])));
    }
}
