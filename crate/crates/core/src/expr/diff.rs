//! Symbolic differentiation.
//!
//! Kinks of `abs`, `min` and `max` are differentiated through the sign factor
//! `abs(u)/u`, so the derivative is undefined exactly at the kink and fails to
//! evaluate there with a domain error.

use super::{add, div, mul, neg, pow, sub, Expr};

fn sign_of(u: &Expr) -> Expr {
    div(Expr::Abs(Box::new(u.clone())), u.clone())
}

pub(super) fn derivative(e: &Expr) -> Expr {
    if e.is_constant() {
        return Expr::Const(0.0);
    }
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Add(a, b) => add(derivative(a), derivative(b)),
        Expr::Sub(a, b) => sub(derivative(a), derivative(b)),
        Expr::Neg(a) => neg(derivative(a)),
        Expr::Mul(a, b) => {
            if a.is_constant() {
                mul((**a).clone(), derivative(b))
            } else if b.is_constant() {
                mul((**b).clone(), derivative(a))
            } else {
                add(mul(derivative(a), (**b).clone()), mul((**a).clone(), derivative(b)))
            }
        }
        Expr::Div(a, b) => {
            if b.is_constant() {
                div(derivative(a), (**b).clone())
            } else if a.is_constant() {
                neg(div(mul((**a).clone(), derivative(b)), pow((**b).clone(), 2.0)))
            } else {
                div(
                    sub(mul(derivative(a), (**b).clone()), mul((**a).clone(), derivative(b))),
                    pow((**b).clone(), 2.0),
                )
            }
        }
        Expr::Pow(a, p) => mul(mul(Expr::Const(*p), pow((**a).clone(), p - 1.0)), derivative(a)),
        Expr::Exp(a) => mul(Expr::Exp(a.clone()), derivative(a)),
        Expr::Ln(a) => div(derivative(a), (**a).clone()),
        Expr::Abs(a) => mul(derivative(a), sign_of(a)),
        Expr::Min(a, b) | Expr::Max(a, b) => {
            // s = sign(b - a); min' = (1+s)/2 a' + (1-s)/2 b', max swaps the weights
            let s = sign_of(&sub((**b).clone(), (**a).clone()));
            let w_plus = mul(Expr::Const(0.5), add(Expr::Const(1.0), s.clone()));
            let w_minus = mul(Expr::Const(0.5), sub(Expr::Const(1.0), s));
            let (wa, wb) = if matches!(e, Expr::Min(..)) { (w_plus, w_minus) } else { (w_minus, w_plus) };
            add(mul(wa, derivative(a)), mul(wb, derivative(b)))
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, DomainKind};

    #[test]
    fn log_weight_derivative_is_exact() {
        let d = parse("-4*ln(r)").unwrap().differentiate();
        assert_eq!(d, parse("-4/r").unwrap());
    }

    #[test]
    fn quadratic_derivative_is_exact() {
        let d = parse("-0.5*r^2").unwrap().differentiate();
        assert_eq!(d, parse("-r").unwrap());
    }

    #[test]
    fn min_picks_active_branch() {
        let d = parse("min(r, 1)").unwrap().differentiate();
        assert_eq!(d.eval(0.5).unwrap(), 1.0);
        assert_eq!(d.eval(2.0).unwrap(), 0.0);
        assert_eq!(d.eval(1.0).unwrap_err().kind, DomainKind::DivisionByZero);
        let d = parse("max(r, 1)").unwrap().differentiate();
        assert_eq!(d.eval(0.5).unwrap(), 0.0);
        assert_eq!(d.eval(2.0).unwrap(), 1.0);
    }

    #[test]
    fn abs_has_sign_derivative() {
        let d = parse("abs(r - 2)").unwrap().differentiate();
        assert_eq!(d.eval(1.0).unwrap(), -1.0);
        assert_eq!(d.eval(3.0).unwrap(), 1.0);
    }
}
