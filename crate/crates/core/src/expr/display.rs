//! Serialization back to grammar text. `parse(&e.to_string())` reproduces
//! `e` structurally.

use std::fmt;

use super::Expr;

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => PREC_SUM,
        Expr::Mul(..) | Expr::Div(..) => PREC_PRODUCT,
        Expr::Neg(_) => PREC_UNARY,
        Expr::Const(c) if c.is_sign_negative() && *c != 0.0 => PREC_UNARY,
        Expr::Pow(..) => PREC_POWER,
        _ => PREC_ATOM,
    }
}

pub(super) fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c == std::f64::consts::E {
        f.write_str("e")
    } else if c == 0.0 {
        f.write_str("0")
    } else if c.fract() == 0.0 && c.abs() < 1e15 {
        write!(f, "{}", c as i64)
    } else {
        write!(f, "{c:?}")
    }
}

fn write(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    let paren = prec(e) < min_prec;
    if paren {
        f.write_str("(")?;
    }
    match e {
        Expr::Const(c) => write_number(f, *c)?,
        Expr::Var => f.write_str("r")?,
        Expr::Add(a, b) => {
            write(f, a, PREC_SUM)?;
            f.write_str(" + ")?;
            write(f, b, PREC_PRODUCT)?;
        }
        Expr::Sub(a, b) => {
            write(f, a, PREC_SUM)?;
            f.write_str(" - ")?;
            write(f, b, PREC_PRODUCT)?;
        }
        Expr::Mul(a, b) => {
            write(f, a, PREC_PRODUCT)?;
            f.write_str("*")?;
            write(f, b, PREC_UNARY)?;
        }
        Expr::Div(a, b) => {
            write(f, a, PREC_PRODUCT)?;
            f.write_str("/")?;
            write(f, b, PREC_UNARY)?;
        }
        Expr::Neg(a) => {
            f.write_str("-")?;
            match **a {
                // "-2" would read back as a literal
                Expr::Const(c) if c != std::f64::consts::E && !(c.is_sign_negative() && c != 0.0) => {
                    f.write_str("(")?;
                    write_number(f, c)?;
                    f.write_str(")")?;
                }
                _ => write(f, a, PREC_UNARY)?,
            }
        }
        Expr::Pow(a, p) => {
            write(f, a, PREC_ATOM)?;
            f.write_str("^")?;
            if *p < 0.0 {
                f.write_str("(")?;
                write_number(f, *p)?;
                f.write_str(")")?;
            } else {
                write_number(f, *p)?;
            }
        }
        Expr::Exp(a) => call(f, "exp", a)?,
        Expr::Ln(a) => call(f, "ln", a)?,
        Expr::Abs(a) => call(f, "abs", a)?,
        Expr::Min(a, b) => call2(f, "min", a, b)?,
        Expr::Max(a, b) => call2(f, "max", a, b)?,
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

fn call(f: &mut fmt::Formatter<'_>, name: &str, a: &Expr) -> fmt::Result {
    write!(f, "{name}(")?;
    write(f, a, PREC_SUM)?;
    f.write_str(")")
}

fn call2(f: &mut fmt::Formatter<'_>, name: &str, a: &Expr, b: &Expr) -> fmt::Result {
    write!(f, "{name}(")?;
    write(f, a, PREC_SUM)?;
    f.write_str(", ")?;
    write(f, b, PREC_SUM)?;
    f.write_str(")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write(f, self, PREC_SUM)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[test]
    fn prints_minimal_parentheses() {
        for (src, want) in [
            ("-4/r", "-4/r"),
            ("r - (r + 1)", "r - (r + 1)"),
            ("(-r)^2", "(-r)^2"),
            ("-r^2", "-r^2"),
            ("r^(-2)", "r^(-2)"),
            ("2*(r + 1)", "2*(r + 1)"),
            ("min(r, 1)*e", "min(r, 1)*e"),
        ] {
            assert_eq!(parse(src).unwrap().to_string(), want, "{src}");
        }
    }
}
