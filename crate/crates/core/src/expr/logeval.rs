//! Evaluation in sign/log form, so that products of huge and tiny factors
//! do not overflow before they are combined.

use super::{DomainKind, EvalError, Expr};

/// `sign · e^{ln}`; zero is `sign == 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub sign: i8,
    pub ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { sign: 0, ln: f64::NEG_INFINITY };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogValue { sign: if v > 0.0 { 1 } else { -1 }, ln: v.abs().ln() }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 { 0.0 } else { self.sign as f64 * self.ln.exp() }
    }

    fn neg(self) -> Self {
        LogValue { sign: -self.sign, ln: self.ln }
    }

    fn add(self, o: Self) -> Self {
        if self.sign == 0 {
            return o;
        }
        if o.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln >= o.ln { (self, o) } else { (o, self) };
        if big.ln == f64::INFINITY {
            return big;
        }
        let d = small.ln - big.ln;
        if big.sign == small.sign {
            LogValue { sign: big.sign, ln: big.ln + d.exp().ln_1p() }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            LogValue { sign: big.sign, ln: big.ln + (-d.exp()).ln_1p() }
        }
    }

    fn mul(self, o: Self) -> Self {
        if self.sign == 0 || o.sign == 0 {
            return Self::ZERO;
        }
        LogValue { sign: self.sign * o.sign, ln: self.ln + o.ln }
    }

    /// Ordering key; larger means larger value.
    fn less(self, o: Self) -> bool {
        if self.sign != o.sign {
            return self.sign < o.sign;
        }
        match self.sign {
            1 => self.ln < o.ln,
            -1 => self.ln > o.ln,
            _ => false,
        }
    }
}

impl Expr {
    /// Value of the expression as sign and ln|value|.
    pub fn eval_ln(&self, r: f64) -> Result<LogValue, EvalError> {
        let err = |kind| EvalError { kind, at: r };
        let v = match self {
            Expr::Const(c) => LogValue::from_f64(*c),
            Expr::Var => LogValue::from_f64(r),
            Expr::Add(a, b) => a.eval_ln(r)?.add(b.eval_ln(r)?),
            Expr::Sub(a, b) => a.eval_ln(r)?.add(b.eval_ln(r)?.neg()),
            Expr::Mul(a, b) => a.eval_ln(r)?.mul(b.eval_ln(r)?),
            Expr::Div(a, b) => {
                let num = a.eval_ln(r)?;
                let den = b.eval_ln(r)?;
                if den.sign == 0 {
                    return Err(err(DomainKind::DivisionByZero));
                }
                num.mul(LogValue { sign: den.sign, ln: -den.ln })
            }
            Expr::Neg(a) => a.eval_ln(r)?.neg(),
            Expr::Pow(a, p) => {
                let x = a.eval_ln(r)?;
                if *p == 0.0 {
                    LogValue::from_f64(1.0)
                } else if x.sign == 0 {
                    if *p < 0.0 {
                        return Err(err(DomainKind::DivisionByZero));
                    }
                    LogValue::ZERO
                } else {
                    let integer = p.fract() == 0.0;
                    if x.sign < 0 && !integer {
                        return Err(err(DomainKind::PowNegativeBase));
                    }
                    let odd = integer && (p.abs() % 2.0) == 1.0;
                    LogValue { sign: if x.sign < 0 && odd { -1 } else { 1 }, ln: p * x.ln }
                }
            }
            Expr::Exp(a) => {
                let x = a.eval_ln(r)?.to_f64();
                if x == f64::NEG_INFINITY { LogValue::ZERO } else { LogValue { sign: 1, ln: x } }
            }
            Expr::Ln(a) => {
                let x = a.eval_ln(r)?;
                if x.sign <= 0 {
                    return Err(err(DomainKind::LnNonPositive));
                }
                LogValue::from_f64(x.ln)
            }
            Expr::Abs(a) => {
                let x = a.eval_ln(r)?;
                LogValue { sign: x.sign.abs(), ln: x.ln }
            }
            Expr::Min(a, b) => {
                let (x, y) = (a.eval_ln(r)?, b.eval_ln(r)?);
                if y.less(x) { y } else { x }
            }
            Expr::Max(a, b) => {
                let (x, y) = (a.eval_ln(r)?, b.eval_ln(r)?);
                if x.less(y) { y } else { x }
            }
        };
        if v.ln.is_nan() {
            return Err(err(DomainKind::NotANumber));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(text: &str, r: f64) {
        let e = Expr::parse(text).unwrap();
        let lin = e.eval(r).unwrap();
        let lg = e.eval_ln(r).unwrap().to_f64();
        assert!((lin - lg).abs() <= 1e-12 * lin.abs().max(1.0), "{text} at {r}: {lin} vs {lg}");
    }

    #[test]
    fn agrees_with_linear_evaluation() {
        for t in ["r^2 - 3*r + 1", "exp(-r)*(1+r)^(-2)", "max(0, min(1, 2-r))", "ln(1+r)/r", "abs(r-2)^3", "(r-3)^3", "-r^(-1.5)"] {
            for r in [0.1, 0.5, 1.0, 1.7, 2.5, 10.0] {
                check(t, r);
            }
        }
    }

    #[test]
    fn survives_overflowing_factors() {
        let e = Expr::parse("r^(-2.4)*r^4").unwrap();
        let v = e.eval_ln(1e-250).unwrap();
        assert!((v.ln - 1.6 * (1e-250f64).ln()).abs() < 1e-9);
        let z = Expr::parse("r^(-1.4)*max(0, 1-r)").unwrap().eval_ln(3.0).unwrap();
        assert_eq!(z.sign, 0);
        let g = Expr::parse("exp(r^2/2)*exp(-r^2)").unwrap().eval_ln(1e3).unwrap();
        assert!((g.ln + 5e5).abs() < 1e-6);
    }
}
