//! Scalar coefficient expressions in the parameter `g`.
//!
//! The grammar is deliberately small and closed under differentiation:
//! real literals, the symbol `g`, binary `+` `-` `*`, unary `-`, `sin(.)`,
//! `cos(.)`, and nonnegative integer powers `(.)^n`. Conventional precedence
//! applies and parentheses group subexpressions.

use std::fmt;
use std::str::FromStr;

/// Parse error with a 1-based column into the source string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ExprError {}

/// Expression tree over the parameter `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientExpr {
    Constant(f64),
    Parameter,
    Add(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Sub(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Mul(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Neg(Box<CoefficientExpr>),
    Sin(Box<CoefficientExpr>),
    Cos(Box<CoefficientExpr>),
    Pow(Box<CoefficientExpr>, u32),
}

use CoefficientExpr::*;

impl CoefficientExpr {
    pub fn constant(v: f64) -> Self {
        Constant(v)
    }

    pub fn parameter() -> Self {
        Parameter
    }

    fn as_constant(&self) -> Option<f64> {
        if let Constant(v) = self {
            Some(*v)
        } else {
            None
        }
    }

    pub fn sin(a: Self) -> Self {
        Sin(Box::new(a))
    }

    pub fn cos(a: Self) -> Self {
        Cos(Box::new(a))
    }

    pub fn pow(a: Self, n: u32) -> Self {
        match n {
            0 => Constant(1.0),
            1 => a,
            n => Pow(Box::new(a), n),
        }
    }

    /// Evaluates the expression at a parameter value.
    pub fn eval(&self, g: f64) -> f64 {
        match self {
            Constant(v) => *v,
            Parameter => g,
            Add(a, b) => a.eval(g) + b.eval(g),
            Sub(a, b) => a.eval(g) - b.eval(g),
            Mul(a, b) => a.eval(g) * b.eval(g),
            Neg(a) => -a.eval(g),
            Sin(a) => a.eval(g).sin(),
            Cos(a) => a.eval(g).cos(),
            Pow(a, n) => a.eval(g).powi(*n as i32),
        }
    }

    /// Exact symbolic derivative with respect to `g`, within the same grammar.
    pub fn derivative(&self) -> Self {
        match self {
            Constant(_) => Constant(0.0),
            Parameter => Constant(1.0),
            Add(a, b) => a.derivative() + b.derivative(),
            Sub(a, b) => a.derivative() - b.derivative(),
            Mul(a, b) => a.derivative() * (**b).clone() + (**a).clone() * b.derivative(),
            Neg(a) => -a.derivative(),
            Sin(a) => Self::cos((**a).clone()) * a.derivative(),
            Cos(a) => -(Self::sin((**a).clone()) * a.derivative()),
            Pow(_, 0) => Constant(0.0),
            Pow(a, n) => Constant(*n as f64) * Self::pow((**a).clone(), n - 1) * a.derivative(),
        }
    }

    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let tokens = tokenize(src)?;
        let end = src.chars().count() + 1;
        let mut parser = Parser {
            tokens,
            pos: 0,
            end,
        };
        let expr = parser.expression()?;
        match parser.peek() {
            None => Ok(expr),
            Some((tok, at)) => Err(ExprError {
                position: *at,
                message: format!("unexpected trailing input '{tok}'"),
            }),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) => 2,
            Neg(..) => 3,
            Pow(..) => 4,
            Constant(_) | Parameter | Sin(..) | Cos(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let own = self.precedence();
        if own < parent {
            write!(f, "(")?;
        }
        match self {
            Constant(v) => write!(f, "{v}")?,
            Parameter => write!(f, "g")?,
            Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 1)?;
            }
            Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " * ")?;
                b.fmt_prec(f, 3)?;
            }
            Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Sin(a) => {
                write!(f, "sin(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Cos(a) => {
                write!(f, "cos(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Pow(a, n) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{n}")?;
            }
        }
        if own < parent {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for CoefficientExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

// The arithmetic impls fold constants and drop zero/one factors so that
// derivative trees stay compact; no further simplification is attempted.

impl std::ops::Add for CoefficientExpr {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if let (Some(a), Some(b)) = (self.as_constant(), rhs.as_constant()) {
            return Constant(a + b);
        }
        if self.as_constant() == Some(0.0) {
            return rhs;
        }
        if rhs.as_constant() == Some(0.0) {
            return self;
        }
        Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for CoefficientExpr {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        if let (Some(a), Some(b)) = (self.as_constant(), rhs.as_constant()) {
            return Constant(a - b);
        }
        if rhs.as_constant() == Some(0.0) {
            return self;
        }
        if self.as_constant() == Some(0.0) {
            return -rhs;
        }
        Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for CoefficientExpr {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if let (Some(a), Some(b)) = (self.as_constant(), rhs.as_constant()) {
            return Constant(a * b);
        }
        if self.as_constant() == Some(0.0) || rhs.as_constant() == Some(0.0) {
            return Constant(0.0);
        }
        if self.as_constant() == Some(1.0) {
            return rhs;
        }
        if rhs.as_constant() == Some(1.0) {
            return self;
        }
        Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for CoefficientExpr {
    type Output = Self;

    fn neg(self) -> Self {
        match self {
            Constant(v) => Constant(-v),
            Neg(inner) => *inner,
            other => Neg(Box::new(other)),
        }
    }
}

impl FromStr for CoefficientExpr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Caret => write!(f, "^"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        let at = i + 1; // 1-based column
        let ch = chars[i];
        match ch {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => {
                tokens.push((Token::Plus, at));
                i += 1;
            }
            '-' => {
                tokens.push((Token::Minus, at));
                i += 1;
            }
            '*' => {
                tokens.push((Token::Star, at));
                i += 1;
            }
            '^' => {
                tokens.push((Token::Caret, at));
                i += 1;
            }
            '(' => {
                tokens.push((Token::LParen, at));
                i += 1;
            }
            ')' => {
                tokens.push((Token::RParen, at));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<f64>().map_err(|_| ExprError {
                    position: at,
                    message: format!("invalid number literal '{text}'"),
                })?;
                tokens.push((Token::Num(value), at));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                tokens.push((Token::Ident(text), at));
            }
            other => {
                return Err(ExprError {
                    position: at,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<(Token, usize)> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn end_position(&self) -> usize {
        self.end
    }

    fn expect_rparen(&mut self, opened_at: usize) -> Result<(), ExprError> {
        match self.next() {
            Some((Token::RParen, _)) => Ok(()),
            Some((tok, at)) => Err(ExprError {
                position: at,
                message: format!("expected ')', found '{tok}'"),
            }),
            None => Err(ExprError {
                position: self.end_position(),
                message: format!("unclosed '(' opened at column {opened_at}"),
            }),
        }
    }

    fn expression(&mut self) -> Result<CoefficientExpr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some((Token::Plus, _)) => {
                    self.next();
                    let rhs = self.term()?;
                    lhs = CoefficientExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some((Token::Minus, _)) => {
                    self.next();
                    let rhs = self.term()?;
                    lhs = CoefficientExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<CoefficientExpr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some((Token::Star, _)) = self.peek() {
            self.next();
            let rhs = self.unary()?;
            lhs = CoefficientExpr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<CoefficientExpr, ExprError> {
        if let Some((Token::Minus, _)) = self.peek() {
            self.next();
            let inner = self.unary()?;
            return Ok(CoefficientExpr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<CoefficientExpr, ExprError> {
        let base = self.atom()?;
        if let Some((Token::Caret, _)) = self.peek() {
            self.next();
            match self.next() {
                Some((Token::Num(v), at)) => {
                    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                        return Err(ExprError {
                            position: at,
                            message: format!("exponent must be a nonnegative integer, got {v}"),
                        });
                    }
                    return Ok(CoefficientExpr::Pow(Box::new(base), v as u32));
                }
                Some((tok, at)) => {
                    return Err(ExprError {
                        position: at,
                        message: format!("expected an integer exponent, found '{tok}'"),
                    })
                }
                None => {
                    return Err(ExprError {
                        position: self.end_position(),
                        message: "expected an integer exponent after '^'".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<CoefficientExpr, ExprError> {
        match self.next() {
            Some((Token::Num(v), _)) => Ok(CoefficientExpr::Constant(v)),
            Some((Token::Ident(name), at)) => match name.as_str() {
                "g" => Ok(CoefficientExpr::Parameter),
                "sin" | "cos" => {
                    let opened_at = match self.next() {
                        Some((Token::LParen, p)) => p,
                        Some((tok, p)) => {
                            return Err(ExprError {
                                position: p,
                                message: format!("expected '(' after '{name}', found '{tok}'"),
                            })
                        }
                        None => {
                            return Err(ExprError {
                                position: self.end_position(),
                                message: format!("expected '(' after '{name}'"),
                            })
                        }
                    };
                    let arg = self.expression()?;
                    self.expect_rparen(opened_at)?;
                    Ok(if name == "sin" {
                        CoefficientExpr::Sin(Box::new(arg))
                    } else {
                        CoefficientExpr::Cos(Box::new(arg))
                    })
                }
                other => Err(ExprError {
                    position: at,
                    message: format!("unknown identifier '{other}'"),
                }),
            },
            Some((Token::LParen, opened_at)) => {
                let inner = self.expression()?;
                self.expect_rparen(opened_at)?;
                Ok(inner)
            }
            Some((tok, at)) => Err(ExprError {
                position: at,
                message: format!("expected a value, found '{tok}'"),
            }),
            None => Err(ExprError {
                position: self.end_position(),
                message: "unexpected end of expression".into(),
            }),
        }
    }
}
