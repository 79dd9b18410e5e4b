//! Coefficient expressions in the single variable `t`.
//!
//! The grammar is deliberately small: numbers, `t`, named parameters,
//! `+ - * / ^`, unary minus, `exp(..)` and `log(..)` (natural log, `ln` is
//! accepted as an alias). `^` binds tightest and associates to the right,
//! so `-t^2` is `-(t^2)` and `2^3^2` is `2^9`.

mod family;
mod parse;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

pub use family::{make_family, Coefficients, FamilyError, FamilyKind, FamilySpec};
pub use parse::{parse, parse_with_params, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    UnboundParameter(String),
    /// Log of a non-positive number, division by zero, or a negative base
    /// raised to a non-integer power.
    Domain {
        t: f64,
        what: &'static str,
    },
    NonFinite {
        t: f64,
    },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundParameter(name) => write!(f, "parameter `{name}` has no value"),
            EvalError::Domain { t, what } => write!(f, "{what} at t = {t}"),
            EvalError::NonFinite { t } => write!(f, "expression is not finite at t = {t}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    /// Evaluates at `t`. Every parameter must have been bound first.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let v = self.eval_raw(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t })
        }
    }

    // Intermediate infinities are allowed (1/exp(1000) is a fine zero); only
    // the final value has to be finite.
    fn eval_raw(&self, t: f64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Param(name) => return Err(EvalError::UnboundParameter(name.clone())),
            Expr::Neg(a) => -a.eval_raw(t)?,
            Expr::Add(a, b) => a.eval_raw(t)? + b.eval_raw(t)?,
            Expr::Sub(a, b) => a.eval_raw(t)? - b.eval_raw(t)?,
            Expr::Mul(a, b) => a.eval_raw(t)? * b.eval_raw(t)?,
            Expr::Div(a, b) => {
                let num = a.eval_raw(t)?;
                let den = b.eval_raw(t)?;
                if den == 0.0 {
                    return Err(EvalError::Domain { t, what: "division by zero" });
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval_raw(t)?;
                let ex = b.eval_raw(t)?;
                if base < 0.0 && ex != math::floor(ex) {
                    return Err(EvalError::Domain { t, what: "negative base with fractional exponent" });
                }
                if base == 0.0 && ex < 0.0 {
                    return Err(EvalError::Domain { t, what: "zero raised to a negative power" });
                }
                math::pow(base, ex)
            }
            Expr::Exp(a) => math::exp(a.eval_raw(t)?),
            Expr::Log(a) => {
                let x = a.eval_raw(t)?;
                if x <= 0.0 {
                    return Err(EvalError::Domain { t, what: "log of a non-positive number" });
                }
                math::ln(x)
            }
        })
    }

    /// Replaces every parameter called `name` with `value`.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(n) if n == name => Some(value.clone()),
            _ => None,
        })
    }

    /// Binds parameters to numbers. Unlisted parameters stay symbolic.
    pub fn bind(&self, params: &[(&str, f64)]) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(n) => params.iter().find(|(k, _)| k == n).map(|(_, v)| Expr::Const(*v)),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        let un = |a: &Expr| Box::new(a.map_leaves(f));
        match self {
            Expr::Const(_) | Expr::Var | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(un(a)),
            Expr::Add(a, b) => Expr::Add(un(a), un(b)),
            Expr::Sub(a, b) => Expr::Sub(un(a), un(b)),
            Expr::Mul(a, b) => Expr::Mul(un(a), un(b)),
            Expr::Div(a, b) => Expr::Div(un(a), un(b)),
            Expr::Pow(a, b) => Expr::Pow(un(a), un(b)),
            Expr::Exp(a) => Expr::Exp(un(a)),
            Expr::Log(a) => Expr::Log(un(a)),
        }
    }

    /// Names of the parameters still present, sorted and deduplicated.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(n) = e {
                out.push(n.clone());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    pub fn depends_on_t(&self) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= matches!(e, Expr::Var));
        hit
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var | Expr::Param(_) => {}
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

// Printing inserts only the parentheses the parser needs to rebuild the
// same tree, so parse -> print -> parse is the identity on parsed trees.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("t"),
            Expr::Param(n) => f.write_str(n),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_child(f, 4)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                b.fmt_child(f, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.fmt_child(f, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                b.fmt_child(f, 3)
            }
            Expr::Pow(a, b) => {
                a.fmt_child(f, 5)?;
                f.write_str("^")?;
                b.fmt_child(f, 3)
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
        }
    }
}

// Small constructors used by the family builders.
pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    Expr::Add(Box::new(a), Box::new(b))
}
pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    Expr::Sub(Box::new(a), Box::new(b))
}
pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    Expr::Mul(Box::new(a), Box::new(b))
}
pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    Expr::Div(Box::new(a), Box::new(b))
}
pub(crate) fn pow(a: Expr, b: Expr) -> Expr {
    Expr::Pow(Box::new(a), Box::new(b))
}
pub(crate) fn log(a: Expr) -> Expr {
    Expr::Log(Box::new(a))
}
pub(crate) fn exp(a: Expr) -> Expr {
    Expr::Exp(Box::new(a))
}
pub(crate) fn neg(a: Expr) -> Expr {
    Expr::Neg(Box::new(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_simple_polynomial() {
        let e = parse("2/t^3").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 0.25);
    }

    #[test]
    fn domain_errors_are_reported() {
        let e = parse("log(t)").unwrap();
        assert!(matches!(e.eval(0.0), Err(EvalError::Domain { .. })));
        let e = parse("1/(t-1)").unwrap();
        assert!(matches!(e.eval(1.0), Err(EvalError::Domain { .. })));
        let e = parse("exp(t)").unwrap();
        assert!(matches!(e.eval(1000.0), Err(EvalError::NonFinite { .. })));
    }

    #[test]
    fn intermediate_overflow_may_cancel() {
        let e = parse("1/exp(t)").unwrap();
        assert_eq!(e.eval(1000.0).unwrap(), 0.0);
    }

    #[test]
    fn unbound_parameter_is_an_error() {
        let e = parse("k/t^2").unwrap();
        assert!(matches!(e.eval(1.0), Err(EvalError::UnboundParameter(_))));
        assert_eq!(e.bind(&[("k", 2.0)]).eval(1.0).unwrap(), 2.0);
    }

    #[test]
    fn printing_keeps_structure() {
        for src in ["-t^2", "(-t)^2", "a - (b - c)", "a - b - c", "2^3^2", "(2^3)^2", "-(a*b)", "t^-1", "exp(-t)/(1 + t)"] {
            let e = parse(src).unwrap();
            let again = parse(&alloc::format!("{e}")).unwrap();
            assert_eq!(e, again, "{src} printed as {e}");
        }
        assert_eq!(parse("2^3^2").unwrap().eval(0.0).unwrap(), 512.0);
        assert_eq!(parse("-t^2").unwrap().eval(3.0).unwrap(), -9.0);
    }
}
