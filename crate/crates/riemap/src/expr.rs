//! Expression DSL for chart data: metric components, complex-structure
//! components and map components are all real scalar expressions in the
//! declared coordinate names.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Precedence is `^` > unary minus > `*`,`/` > `+`,`-`, with `^`
//! right-associative, so `-x^2` is `-(x^2)` and `2^-3` is `2^(-3)`.
//! Known functions: sin, cos, tan, exp, log (natural), sqrt, sinh, cosh.
//! `pi` is a constant. Integer exponents are detected syntactically and
//! evaluated by repeated multiplication so jets stay exact.

use crate::error::{Error, Result};
use crate::jet::ScalarJet2;
use serde::{Deserialize, Serialize};
use std::fmt;

/// How derivative data (gradients, Hessians) is produced.
///
/// `Jets` propagates exact second-order forward jets. `FiniteDiff` is the
/// independent oracle: central differences of plain values with steps
/// [`FD_STEP_GRADIENT`] and [`FD_STEP_HESSIAN`]. It is never the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivMode {
    #[serde(rename = "ad")]
    Jets,
    #[serde(rename = "fd")]
    FiniteDiff,
}

impl DerivMode {
    pub fn name(self) -> &'static str {
        match self {
            DerivMode::Jets => "ad",
            DerivMode::FiniteDiff => "fd",
        }
    }
}

impl fmt::Display for DerivMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Central-difference step for gradients in finite-difference mode.
pub const FD_STEP_GRADIENT: f64 = 1e-5;
/// Central-difference step for Hessians in finite-difference mode.
pub const FD_STEP_HESSIAN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl UnaryFn {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "tan" => UnaryFn::Tan,
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sqrt" => UnaryFn::Sqrt,
            "sinh" => UnaryFn::Sinh,
            "cosh" => UnaryFn::Cosh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Sinh => "sinh",
            UnaryFn::Cosh => "cosh",
        }
    }
}

/// Names that the parser reserves; coordinates must not shadow them.
pub fn reserved_names() -> &'static [&'static str] {
    &[
        "sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "pi",
    ]
}

#[derive(Debug, Clone, PartialEq)]
enum NodeKind {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Func(UnaryFn, Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    PowInt(Box<Node>, i32),
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    kind: NodeKind,
    span: (usize, usize),
}

/// A parsed expression over a fixed coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    root: Node,
    coords: Vec<String>,
    source: String,
}

impl ExprAst {
    /// Parses `source` over the given coordinate names.
    pub fn parse(source: &str, coords: &[String]) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            coords,
            source,
        };
        let root = parser.expr()?;
        if parser.pos < tokens.len() {
            let tok = &tokens[parser.pos];
            return Err(Error::Syntax {
                offset: tok.start,
                message: format!("unexpected `{}`", tok.text(source)),
            });
        }
        Ok(Self {
            root,
            coords: coords.to_vec(),
            source: source.to_string(),
        })
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn check_arity(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.coords.len() {
            return Err(Error::Dimension {
                context: format!("point for `{self}`"),
                expected: self.coords.len(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Plain value at `p` (the cheap path; equals `eval_jet(p).value`).
    pub fn eval_value(&self, p: &[f64]) -> Result<f64> {
        self.check_arity(p)?;
        eval_value_node(&self.root, p, &self.source)
    }

    /// Value, gradient and Hessian at `p` via forward jets.
    pub fn eval_jet(&self, p: &[f64]) -> Result<ScalarJet2> {
        self.check_arity(p)?;
        eval_jet_node(&self.root, p, &self.source)
    }

    /// Finite-difference oracle for [`eval_jet`](Self::eval_jet): central
    /// differences with the given gradient and Hessian steps.
    pub fn eval_jet_fd(&self, p: &[f64], h_grad: f64, h_hess: f64) -> Result<ScalarJet2> {
        self.check_arity(p)?;
        let n = p.len();
        let value = self.eval_value(p)?;
        let mut shifted = p.to_vec();
        let at = |q: &mut Vec<f64>, i: usize, di: f64, j: usize, dj: f64| -> Result<f64> {
            q.copy_from_slice(p);
            q[i] += di;
            q[j] += dj;
            self.eval_value(q)
        };
        let mut jet = ScalarJet2::constant(n, value);
        for i in 0..n {
            let fp = at(&mut shifted, i, h_grad, i, 0.0)?;
            let fm = at(&mut shifted, i, -h_grad, i, 0.0)?;
            jet.gradient[i] = (fp - fm) / (2.0 * h_grad);
        }
        for i in 0..n {
            let fp = at(&mut shifted, i, h_hess, i, 0.0)?;
            let fm = at(&mut shifted, i, -h_hess, i, 0.0)?;
            jet.hessian[(i, i)] = (fp - 2.0 * value + fm) / (h_hess * h_hess);
            for j in (i + 1)..n {
                let fpp = at(&mut shifted, i, h_hess, j, h_hess)?;
                let fpm = at(&mut shifted, i, h_hess, j, -h_hess)?;
                let fmp = at(&mut shifted, i, -h_hess, j, h_hess)?;
                let fmm = at(&mut shifted, i, -h_hess, j, -h_hess)?;
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h_hess * h_hess);
                jet.hessian[(i, j)] = v;
                jet.hessian[(j, i)] = v;
            }
        }
        Ok(jet)
    }

    /// Jet in the requested derivative mode.
    pub fn eval_jet_mode(&self, p: &[f64], mode: DerivMode) -> Result<ScalarJet2> {
        match mode {
            DerivMode::Jets => self.eval_jet(p),
            DerivMode::FiniteDiff => self.eval_jet_fd(p, FD_STEP_GRADIENT, FD_STEP_HESSIAN),
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print_node(&self.root, &self.coords, f)
    }
}

fn print_node(node: &Node, coords: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match &node.kind {
        NodeKind::Const(c) => {
            if c.is_sign_negative() {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        NodeKind::Var(i) => f.write_str(&coords[*i]),
        NodeKind::Neg(a) => {
            f.write_str("(-")?;
            print_node(a, coords, f)?;
            f.write_str(")")
        }
        NodeKind::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            print_node(a, coords, f)?;
            f.write_str(")")
        }
        NodeKind::Add(a, b) => print_binary(a, " + ", b, coords, f),
        NodeKind::Sub(a, b) => print_binary(a, " - ", b, coords, f),
        NodeKind::Mul(a, b) => print_binary(a, "*", b, coords, f),
        NodeKind::Div(a, b) => print_binary(a, "/", b, coords, f),
        NodeKind::Pow(a, b) => print_binary(a, "^", b, coords, f),
        NodeKind::PowInt(a, n) => {
            f.write_str("(")?;
            print_node(a, coords, f)?;
            if *n < 0 {
                write!(f, "^({n}))")
            } else {
                write!(f, "^{n})")
            }
        }
    }
}

fn print_binary(
    a: &Node,
    op: &str,
    b: &Node,
    coords: &[String],
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    f.write_str("(")?;
    print_node(a, coords, f)?;
    f.write_str(op)?;
    print_node(b, coords, f)?;
    f.write_str(")")
}

// ----------------------------------------------------------------------------
// Tokenizer
// ----------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum TokenKind {
    Number(f64),
    Name,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, Copy)]
struct Token {
    kind: TokenKind,
    start: usize,
    end: usize,
}

impl Token {
    fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.start..self.end]
    }
}

fn tokenize(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' => {
                let kind = match b {
                    b'+' => TokenKind::Plus,
                    b'-' => TokenKind::Minus,
                    b'*' => TokenKind::Star,
                    b'/' => TokenKind::Slash,
                    b'^' => TokenKind::Caret,
                    b'(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                i += 1;
                tokens.push(Token {
                    kind,
                    start,
                    end: i,
                });
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(Error::Syntax {
                            offset: i,
                            message: "expected digits after decimal point".into(),
                        });
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("invalid number `{text}`"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    start,
                    end: i,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Name,
                    start,
                    end: i,
                });
            }
            _ => {
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{}`", &source[i..i + 1]),
                });
            }
        }
    }
    Ok(tokens)
}

// ----------------------------------------------------------------------------
// Parser
// ----------------------------------------------------------------------------

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    coords: &'a [String],
    source: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).copied();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek().map(|t| t.kind == kind).unwrap_or(false) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token> {
        match self.bump() {
            Some(tok) if tok.kind == kind => Ok(tok),
            Some(tok) => Err(Error::Syntax {
                offset: tok.start,
                message: format!("expected {what}, found `{}`", tok.text(self.source)),
            }),
            None => Err(Error::Syntax {
                offset: self.source.len(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().map(|t| t.kind) {
                Some(TokenKind::Plus) => TokenKind::Plus,
                Some(TokenKind::Minus) => TokenKind::Minus,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            let span = (lhs.span.0, rhs.span.1);
            let kind = if op == TokenKind::Plus {
                NodeKind::Add(Box::new(lhs), Box::new(rhs))
            } else {
                NodeKind::Sub(Box::new(lhs), Box::new(rhs))
            };
            lhs = Node { kind, span };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().map(|t| t.kind) {
                Some(TokenKind::Star) => TokenKind::Star,
                Some(TokenKind::Slash) => TokenKind::Slash,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            let span = (lhs.span.0, rhs.span.1);
            let kind = if op == TokenKind::Star {
                NodeKind::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                NodeKind::Div(Box::new(lhs), Box::new(rhs))
            };
            lhs = Node { kind, span };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node> {
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Minus {
                let start = tok.start;
                self.pos += 1;
                let inner = self.factor()?;
                let span = (start, inner.span.1);
                // fold a negated literal into a constant
                let kind = if let NodeKind::Const(c) = inner.kind {
                    NodeKind::Const(-c)
                } else {
                    NodeKind::Neg(Box::new(inner))
                };
                return Ok(Node { kind, span });
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if !self.eat(TokenKind::Caret) {
            return Ok(base);
        }
        let exponent = self.factor()?;
        let span = (base.span.0, exponent.span.1);
        // syntactically-integer exponents use repeated multiplication
        if let NodeKind::Const(c) = exponent.kind {
            if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
                return Ok(Node {
                    kind: NodeKind::PowInt(Box::new(base), c as i32),
                    span,
                });
            }
        }
        Ok(Node {
            kind: NodeKind::Pow(Box::new(base), Box::new(exponent)),
            span,
        })
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.bump().ok_or_else(|| Error::Syntax {
            offset: self.source.len(),
            message: "expected expression, found end of input".into(),
        })?;
        match tok.kind {
            TokenKind::Number(value) => Ok(Node {
                kind: NodeKind::Const(value),
                span: (tok.start, tok.end),
            }),
            TokenKind::LParen => {
                let inner = self.expr()?;
                let close = self.expect(TokenKind::RParen, "`)`")?;
                Ok(Node {
                    kind: inner.kind,
                    span: (tok.start, close.end),
                })
            }
            TokenKind::Name => {
                let name = tok.text(self.source);
                if self.peek().map(|t| t.kind) == Some(TokenKind::LParen) {
                    let func = UnaryFn::from_name(name).ok_or(Error::UnknownIdentifier {
                        name: name.to_string(),
                        offset: tok.start,
                    })?;
                    self.pos += 1; // consume '('
                    let arg = self.expr()?;
                    let close = self.expect(TokenKind::RParen, "`)`")?;
                    return Ok(Node {
                        kind: NodeKind::Func(func, Box::new(arg)),
                        span: (tok.start, close.end),
                    });
                }
                if let Some(index) = self.coords.iter().position(|c| c == name) {
                    return Ok(Node {
                        kind: NodeKind::Var(index),
                        span: (tok.start, tok.end),
                    });
                }
                if name == "pi" {
                    return Ok(Node {
                        kind: NodeKind::Const(std::f64::consts::PI),
                        span: (tok.start, tok.end),
                    });
                }
                Err(Error::UnknownIdentifier {
                    name: name.to_string(),
                    offset: tok.start,
                })
            }
            _ => Err(Error::Syntax {
                offset: tok.start,
                message: format!("expected expression, found `{}`", tok.text(self.source)),
            }),
        }
    }
}

// ----------------------------------------------------------------------------
// Evaluation
// ----------------------------------------------------------------------------

fn domain_error(node: &Node, source: &str, message: impl Into<String>) -> Error {
    Error::Domain {
        node: source[node.span.0..node.span.1].to_string(),
        message: message.into(),
    }
}

fn eval_value_node(node: &Node, p: &[f64], source: &str) -> Result<f64> {
    Ok(match &node.kind {
        NodeKind::Const(c) => *c,
        NodeKind::Var(i) => p[*i],
        NodeKind::Neg(a) => -eval_value_node(a, p, source)?,
        NodeKind::Add(a, b) => eval_value_node(a, p, source)? + eval_value_node(b, p, source)?,
        NodeKind::Sub(a, b) => eval_value_node(a, p, source)? - eval_value_node(b, p, source)?,
        NodeKind::Mul(a, b) => eval_value_node(a, p, source)? * eval_value_node(b, p, source)?,
        NodeKind::Div(a, b) => {
            let denom = eval_value_node(b, p, source)?;
            if denom == 0.0 {
                return Err(domain_error(node, source, "division by zero"));
            }
            eval_value_node(a, p, source)? / denom
        }
        NodeKind::Pow(a, b) => {
            let base = eval_value_node(a, p, source)?;
            if base <= 0.0 {
                return Err(domain_error(
                    node,
                    source,
                    format!("non-integer power of non-positive base {base}"),
                ));
            }
            base.powf(eval_value_node(b, p, source)?)
        }
        NodeKind::PowInt(a, exp) => {
            let base = eval_value_node(a, p, source)?;
            if *exp < 0 && base == 0.0 {
                return Err(domain_error(node, source, "zero raised to a negative power"));
            }
            base.powi(*exp)
        }
        NodeKind::Func(func, a) => {
            let x = eval_value_node(a, p, source)?;
            match func {
                UnaryFn::Sin => x.sin(),
                UnaryFn::Cos => x.cos(),
                UnaryFn::Tan => x.tan(),
                UnaryFn::Exp => x.exp(),
                UnaryFn::Log => {
                    if x <= 0.0 {
                        return Err(domain_error(node, source, format!("log of {x}")));
                    }
                    x.ln()
                }
                UnaryFn::Sqrt => {
                    if x < 0.0 {
                        return Err(domain_error(node, source, format!("sqrt of {x}")));
                    }
                    x.sqrt()
                }
                UnaryFn::Sinh => x.sinh(),
                UnaryFn::Cosh => x.cosh(),
            }
        }
    })
}

fn eval_jet_node(node: &Node, p: &[f64], source: &str) -> Result<ScalarJet2> {
    let n = p.len();
    Ok(match &node.kind {
        NodeKind::Const(c) => ScalarJet2::constant(n, *c),
        NodeKind::Var(i) => ScalarJet2::variable(n, *i, p[*i]),
        NodeKind::Neg(a) => eval_jet_node(a, p, source)?.neg(),
        NodeKind::Add(a, b) => eval_jet_node(a, p, source)?.add(&eval_jet_node(b, p, source)?),
        NodeKind::Sub(a, b) => eval_jet_node(a, p, source)?.sub(&eval_jet_node(b, p, source)?),
        NodeKind::Mul(a, b) => eval_jet_node(a, p, source)?.mul(&eval_jet_node(b, p, source)?),
        NodeKind::Div(a, b) => {
            let denom = eval_jet_node(b, p, source)?;
            if denom.value == 0.0 {
                return Err(domain_error(node, source, "division by zero"));
            }
            eval_jet_node(a, p, source)?.div(&denom)
        }
        NodeKind::Pow(a, b) => {
            let base = eval_jet_node(a, p, source)?;
            if base.value <= 0.0 {
                return Err(domain_error(
                    node,
                    source,
                    format!("non-integer power of non-positive base {}", base.value),
                ));
            }
            let exponent = eval_jet_node(b, p, source)?;
            // a^b = exp(b log a)
            let log_base = base.compose(base.value.ln(), 1.0 / base.value, -1.0 / (base.value * base.value));
            let prod = exponent.mul(&log_base);
            let v = prod.value.exp();
            prod.compose(v, v, v)
        }
        NodeKind::PowInt(a, exp) => {
            let base = eval_jet_node(a, p, source)?;
            if *exp < 0 && base.value == 0.0 {
                return Err(domain_error(node, source, "zero raised to a negative power"));
            }
            base.powi(*exp)
        }
        NodeKind::Func(func, a) => {
            let x = eval_jet_node(a, p, source)?;
            let v = x.value;
            match func {
                UnaryFn::Sin => x.compose(v.sin(), v.cos(), -v.sin()),
                UnaryFn::Cos => x.compose(v.cos(), -v.sin(), -v.cos()),
                UnaryFn::Tan => {
                    let t = v.tan();
                    let sec2 = 1.0 + t * t;
                    x.compose(t, sec2, 2.0 * t * sec2)
                }
                UnaryFn::Exp => {
                    let e = v.exp();
                    x.compose(e, e, e)
                }
                UnaryFn::Log => {
                    if v <= 0.0 {
                        return Err(domain_error(node, source, format!("log of {v}")));
                    }
                    x.compose(v.ln(), 1.0 / v, -1.0 / (v * v))
                }
                UnaryFn::Sqrt => {
                    if v <= 0.0 {
                        return Err(domain_error(
                            node,
                            source,
                            format!("sqrt of {v} (jet needs a positive argument)"),
                        ));
                    }
                    let s = v.sqrt();
                    x.compose(s, 0.5 / s, -0.25 / (s * v))
                }
                UnaryFn::Sinh => x.compose(v.sinh(), v.cosh(), v.sinh()),
                UnaryFn::Cosh => x.compose(v.cosh(), v.sinh(), v.cosh()),
            }
        }
    })
}
