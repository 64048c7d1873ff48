//! Closed-form real functions of one positive variable.
//!
//! Expressions are parsed from a small grammar (see [`parse`]), evaluated
//! with explicit domain errors, and differentiated symbolically. Every
//! function the rest of the crate consumes (the log-weight, the multiplier,
//! custom N-functions, test functions) passes through this module.

mod diff;
mod display;
mod logeval;
mod parse;

use std::fmt;

pub use logeval::LogValue;
pub use parse::{parse, ParseError, ParseErrorKind};

/// Abstract syntax tree. `Var` is the single variable `r`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    LnNonPositive,
    DivisionByZero,
    /// Negative base raised to a non-integer power.
    PowNegativeBase,
    NotANumber,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainKind::LnNonPositive => "ln of a non-positive value",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::PowNegativeBase => "negative base with non-integer exponent",
            DomainKind::NotANumber => "result is not a number",
        };
        f.write_str(s)
    }
}

/// Evaluation failure, carrying the point at which the expression was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
#[error("domain error at r = {at:e}: {kind}")]
pub struct EvalError {
    pub kind: DomainKind,
    pub at: f64,
}

impl Expr {
    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    /// Parse `text`; shorthand for [`parse`].
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse(text)
    }

    pub fn eval(&self, r: f64) -> Result<f64, EvalError> {
        let v = self.eval_raw(r)?;
        if v.is_nan() {
            return Err(EvalError { kind: DomainKind::NotANumber, at: r });
        }
        Ok(v)
    }

    fn eval_raw(&self, r: f64) -> Result<f64, EvalError> {
        let err = |kind| EvalError { kind, at: r };
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => r,
            Expr::Add(a, b) => a.eval_raw(r)? + b.eval_raw(r)?,
            Expr::Sub(a, b) => a.eval_raw(r)? - b.eval_raw(r)?,
            Expr::Mul(a, b) => a.eval_raw(r)? * b.eval_raw(r)?,
            Expr::Div(a, b) => {
                let num = a.eval_raw(r)?;
                let den = b.eval_raw(r)?;
                if den == 0.0 {
                    return Err(err(DomainKind::DivisionByZero));
                }
                num / den
            }
            Expr::Neg(a) => -a.eval_raw(r)?,
            Expr::Pow(a, p) => pow_checked(a.eval_raw(r)?, *p).map_err(err)?,
            Expr::Exp(a) => a.eval_raw(r)?.exp(),
            Expr::Ln(a) => {
                let x = a.eval_raw(r)?;
                if !(x > 0.0) {
                    return Err(err(DomainKind::LnNonPositive));
                }
                x.ln()
            }
            Expr::Abs(a) => a.eval_raw(r)?.abs(),
            Expr::Min(a, b) => a.eval_raw(r)?.min(b.eval_raw(r)?),
            Expr::Max(a, b) => a.eval_raw(r)?.max(b.eval_raw(r)?),
        };
        if v.is_nan() {
            return Err(err(DomainKind::NotANumber));
        }
        Ok(v)
    }

    /// First-order estimate of the absolute rounding error of `eval(r)`.
    pub fn rounding_error(&self, r: f64) -> Result<f64, EvalError> {
        Ok(f64::EPSILON * self.noise(r)?.1)
    }

    /// Value and propagated error bound in units of machine epsilon.
    fn noise(&self, r: f64) -> Result<(f64, f64), EvalError> {
        let v = self.eval_raw(r)?;
        let own = v.abs();
        let n = match self {
            Expr::Const(_) | Expr::Var => own,
            Expr::Add(a, b) | Expr::Sub(a, b) => a.noise(r)?.1 + b.noise(r)?.1 + own,
            Expr::Mul(a, b) => {
                let ((x, nx), (y, ny)) = (a.noise(r)?, b.noise(r)?);
                y.abs() * nx + x.abs() * ny + own
            }
            Expr::Div(a, b) => {
                let ((x, nx), (y, ny)) = (a.noise(r)?, b.noise(r)?);
                nx / y.abs() + x.abs() * ny / (y * y) + own
            }
            Expr::Neg(a) | Expr::Abs(a) => a.noise(r)?.1,
            Expr::Pow(a, p) => {
                let (x, nx) = a.noise(r)?;
                if x == 0.0 { own } else { p.abs() * own * nx / x.abs() + own }
            }
            Expr::Exp(a) => own * a.noise(r)?.1 + own,
            Expr::Ln(a) => {
                let (x, nx) = a.noise(r)?;
                nx / x.abs() + own
            }
            Expr::Min(a, b) | Expr::Max(a, b) => {
                let ((x, nx), (y, ny)) = (a.noise(r)?, b.noise(r)?);
                if x == v { nx } else { ny }.max(if x == y { nx.max(ny) } else { 0.0 })
            }
        };
        Ok((v, n))
    }

    /// True when the expression does not mention `r`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => a.is_constant() && b.is_constant(),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Ln(a) | Expr::Abs(a) => {
                a.is_constant()
            }
        }
    }

    /// Symbolic derivative with respect to `r`.
    pub fn differentiate(&self) -> Expr {
        diff::derivative(self)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => 1 + a.size() + b.size(),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Ln(a) | Expr::Abs(a) => {
                1 + a.size()
            }
        }
    }

    /// Replace every occurrence of `r` by `inner`.
    pub fn compose(&self, inner: &Expr) -> Expr {
        let c = |e: &Expr| Box::new(e.compose(inner));
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var => inner.clone(),
            Expr::Add(a, b) => Expr::Add(c(a), c(b)),
            Expr::Sub(a, b) => Expr::Sub(c(a), c(b)),
            Expr::Mul(a, b) => Expr::Mul(c(a), c(b)),
            Expr::Div(a, b) => Expr::Div(c(a), c(b)),
            Expr::Neg(a) => Expr::Neg(c(a)),
            Expr::Pow(a, p) => Expr::Pow(c(a), *p),
            Expr::Exp(a) => Expr::Exp(c(a)),
            Expr::Ln(a) => Expr::Ln(c(a)),
            Expr::Abs(a) => Expr::Abs(c(a)),
            Expr::Min(a, b) => Expr::Min(c(a), c(b)),
            Expr::Max(a, b) => Expr::Max(c(a), c(b)),
        }
    }
}

pub(crate) fn pow_checked(x: f64, p: f64) -> Result<f64, DomainKind> {
    if p == 0.0 {
        return Ok(1.0);
    }
    if x == 0.0 && p < 0.0 {
        return Err(DomainKind::DivisionByZero);
    }
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        return Ok(x.powi(p as i32));
    }
    if x < 0.0 {
        return Err(DomainKind::PowNegativeBase);
    }
    Ok(x.powf(p))
}

// Simplifying constructors. They fold constants and drop neutral elements so
// that derivatives stay readable; they never change the value of the
// expression where it is defined.

fn folded(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => folded(x + y).unwrap_or(Expr::Add(a.into(), b.into())),
        (Expr::Const(x), _) if *x == 0.0 => b,
        (_, Expr::Const(y)) if *y == 0.0 => a,
        (_, Expr::Neg(inner)) => sub(a, (**inner).clone()),
        _ => Expr::Add(a.into(), b.into()),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => folded(x - y).unwrap_or(Expr::Sub(a.into(), b.into())),
        (_, Expr::Const(y)) if *y == 0.0 => a,
        (Expr::Const(x), _) if *x == 0.0 => neg(b),
        _ => Expr::Sub(a.into(), b.into()),
    }
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => Expr::Const(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(other.into()),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => folded(x * y).unwrap_or(Expr::Mul(a.into(), b.into())),
        (Expr::Const(x), _) if *x == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(y)) if *y == 0.0 => Expr::Const(0.0),
        (Expr::Const(x), _) if *x == 1.0 => b,
        (_, Expr::Const(y)) if *y == 1.0 => a,
        (Expr::Const(x), _) if *x == -1.0 => neg(b),
        (_, Expr::Const(y)) if *y == -1.0 => neg(a),
        // Keep constants on the left.
        (_, Expr::Const(_)) => mul(b, a),
        (Expr::Const(x), Expr::Mul(l, rest)) => match **l {
            Expr::Const(y) => mul(Expr::Const(x * y), (**rest).clone()),
            _ => Expr::Mul(a.into(), b.into()),
        },
        (Expr::Const(x), Expr::Div(num, den)) => match **num {
            Expr::Const(y) => div(Expr::Const(x * y), (**den).clone()),
            _ => Expr::Mul(a.into(), b.into()),
        },
        (Expr::Const(x), Expr::Neg(inner)) => mul(Expr::Const(-x), (**inner).clone()),
        _ => Expr::Mul(a.into(), b.into()),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => {
            folded(x / y).unwrap_or(Expr::Div(a.into(), b.into()))
        }
        (_, Expr::Const(y)) if *y == 1.0 => a,
        (Expr::Const(x), _) if *x == 0.0 => Expr::Const(0.0),
        _ => Expr::Div(a.into(), b.into()),
    }
}

pub(crate) fn pow(a: Expr, p: f64) -> Expr {
    if p == 0.0 {
        return Expr::Const(1.0);
    }
    if p == 1.0 {
        return a;
    }
    match a {
        Expr::Const(x) => match pow_checked(x, p) {
            Ok(v) if v.is_finite() => Expr::Const(v),
            _ => Expr::Pow(Box::new(Expr::Const(x)), p),
        },
        other => Expr::Pow(other.into(), p),
    }
}
