//! Functions of r that are either grammar expressions or native closures
//! (for closed forms outside the grammar, such as the Laplace function).

use std::fmt;
use std::sync::Arc;

use crate::expr::{EvalError, Expr, LogValue};

type NativeFn = dyn Fn(f64) -> Result<f64, EvalError> + Send + Sync;

#[derive(Clone)]
pub enum Func {
    Expr(Arc<Expr>),
    Native { name: String, f: Arc<NativeFn> },
}

impl Func {
    pub fn expr(e: Expr) -> Self {
        Func::Expr(Arc::new(e))
    }

    pub fn native(name: impl Into<String>, f: impl Fn(f64) -> Result<f64, EvalError> + Send + Sync + 'static) -> Self {
        Func::Native { name: name.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, r: f64) -> Result<f64, EvalError> {
        match self {
            Func::Expr(e) => e.eval(r),
            Func::Native { f, .. } => f(r),
        }
    }

    /// Sign and ln|value|; grammar expressions avoid intermediate overflow.
    pub fn eval_ln(&self, r: f64) -> Result<LogValue, EvalError> {
        match self {
            Func::Expr(e) => e.eval_ln(r),
            Func::Native { f, .. } => Ok(LogValue::from_f64(f(r)?)),
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            Func::Expr(e) => Some(e),
            Func::Native { .. } => None,
        }
    }

    /// Symbolic derivative, available for grammar expressions only.
    pub fn differentiate(&self) -> Option<Func> {
        self.as_expr().map(|e| Func::expr(e.differentiate()))
    }

    /// Grammar text, or the native function's name.
    pub fn describe(&self) -> String {
        match self {
            Func::Expr(e) => e.to_string(),
            Func::Native { name, .. } => name.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.as_expr(), Some(Expr::Const(c)) if *c == 0.0)
    }
}

impl From<Expr> for Func {
    fn from(e: Expr) -> Self {
        Func::expr(e)
    }
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Func::Expr(e) => write!(f, "Func::Expr({e})"),
            Func::Native { name, .. } => write!(f, "Func::Native({name})"),
        }
    }
}
