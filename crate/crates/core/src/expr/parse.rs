//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := base ("^" number)?
//! base   := number | "r" | "e" | func "(" expr ")" | "(" expr ")" | "-" factor
//! func   := "exp" | "ln" | "abs" | "min" | "max"     (min/max take two arguments)
//! ```
//!
//! The exponent of `^` must be constant. A signed number or a parenthesised
//! constant expression such as `r^(-1.5+0.25)` is accepted there; anything
//! mentioning `r` is rejected.

use std::fmt;

use super::Expr;

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    Expected(&'static str),
    UnknownIdentifier(String),
    NonConstantExponent,
    Arity { func: &'static str, expected: usize },
    BadNumber,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "syntax error at offset {}: unexpected '{c}'", self.offset)
            }
            ParseErrorKind::UnexpectedEnd => {
                write!(f, "syntax error at offset {}: unexpected end of input", self.offset)
            }
            ParseErrorKind::Expected(what) => {
                write!(f, "syntax error at offset {}: expected {what}", self.offset)
            }
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier '{name}' at offset {}", self.offset)
            }
            ParseErrorKind::NonConstantExponent => {
                write!(f, "non-constant exponent at offset {}", self.offset)
            }
            ParseErrorKind::Arity { func, expected } => write!(
                f,
                "'{func}' takes {expected} argument{} (offset {})",
                if *expected == 1 { "" } else { "s" },
                self.offset
            ),
            ParseErrorKind::BadNumber => write!(f, "malformed number at offset {}", self.offset),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

#[derive(Clone, Copy)]
enum Func {
    Exp,
    Ln,
    Abs,
    Min,
    Max,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, offset: self.pos }
    }

    fn unexpected(&self) -> ParseError {
        match self.text[self.pos..].chars().next() {
            Some(c) => self.error(ParseErrorKind::UnexpectedChar(c)),
            None => self.error(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expect(&mut self, byte: u8, what: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Expected(what)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(lhs.into(), self.term()?.into());
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(lhs.into(), self.term()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(lhs.into(), self.factor()?.into());
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(lhs.into(), self.factor()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let p = self.exponent()?;
            return Ok(Expr::Pow(base.into(), p));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.exponent()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let start = self.pos;
                let inner = self.expr()?;
                self.expect(b')', "')'")?;
                if !inner.is_constant() {
                    return Err(ParseError { kind: ParseErrorKind::NonConstantExponent, offset: start });
                }
                // A constant expression evaluates identically at any point.
                inner.eval(1.0).map_err(|_| ParseError {
                    kind: ParseErrorKind::NonConstantExponent,
                    offset: start,
                })
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                if name == "e" {
                    Ok(std::f64::consts::E)
                } else if name == "r" {
                    Err(ParseError { kind: ParseErrorKind::NonConstantExponent, offset: start })
                } else {
                    Err(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
                        offset: start,
                    })
                }
            }
            Some(_) => Err(self.error(ParseErrorKind::Expected("exponent"))),
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'-') => {
                self.pos += 1;
                let literal = matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.');
                Ok(match self.factor()? {
                    // Negative literals are stored as constants.
                    Expr::Const(c) if literal => Expr::Const(-c),
                    other => Expr::Neg(other.into()),
                })
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                let func = match name {
                    "r" => return Ok(Expr::Var),
                    "e" => return Ok(Expr::Const(std::f64::consts::E)),
                    "exp" => Func::Exp,
                    "ln" => Func::Ln,
                    "abs" => Func::Abs,
                    "min" => Func::Min,
                    "max" => Func::Max,
                    other => {
                        return Err(ParseError {
                            kind: ParseErrorKind::UnknownIdentifier(other.to_string()),
                            offset: start,
                        })
                    }
                };
                self.call(func)
            }
            Some(_) => Err(self.unexpected()),
        }
    }

    fn call(&mut self, func: Func) -> Result<Expr, ParseError> {
        self.expect(b'(', "'('")?;
        let first = self.expr()?;
        let (name, arity) = match func {
            Func::Exp => ("exp", 1),
            Func::Ln => ("ln", 1),
            Func::Abs => ("abs", 1),
            Func::Min => ("min", 2),
            Func::Max => ("max", 2),
        };
        let second = if self.peek() == Some(b',') {
            if arity == 1 {
                return Err(self.error(ParseErrorKind::Arity { func: name, expected: 1 }));
            }
            self.pos += 1;
            Some(self.expr()?)
        } else {
            None
        };
        if arity == 2 && second.is_none() {
            return Err(self.error(ParseErrorKind::Arity { func: name, expected: 2 }));
        }
        if self.peek() == Some(b',') {
            return Err(self.error(ParseErrorKind::Arity { func: name, expected: arity }));
        }
        self.expect(b')', "')'")?;
        let a = Box::new(first);
        Ok(match (func, second) {
            (Func::Exp, _) => Expr::Exp(a),
            (Func::Ln, _) => Expr::Ln(a),
            (Func::Abs, _) => Expr::Abs(a),
            (Func::Min, Some(b)) => Expr::Min(a, b.into()),
            (Func::Max, Some(b)) => Expr::Max(a, b.into()),
            _ => unreachable!("arity checked above"),
        })
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError { kind: ParseErrorKind::BadNumber, offset: start });
        }
        // Scientific suffix only when digits follow; a bare `e` is the constant.
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        match self.text[start..self.pos].parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ParseError { kind: ParseErrorKind::BadNumber, offset: start }),
        }
    }
}
