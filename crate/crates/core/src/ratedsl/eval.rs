//! Expression evaluation with strict domain checking.
//!
//! Evaluation is IEEE double precision, but domain violations (logarithm of a
//! non-positive number, division by zero, square root of a negative number,
//! `0^negative`, fractional power of a negative base) are reported as errors
//! instead of propagating NaN.

use super::{BinOp, Expr, Func1, Func2, Var};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    Unbound(Var),
    #[error("division by zero")]
    DivisionByZero,
    #[error("ln of non-positive argument {0}")]
    LogNonPositive(f64),
    #[error("sqrt of negative argument {0}")]
    SqrtNegative(f64),
    #[error("zero raised to negative power {0}")]
    PowZeroNegative(f64),
    #[error("negative base {0} raised to non-integer power {1}")]
    PowNegativeBase(f64, f64),
}

/// Partial map from variable name to value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    vals: [f64; 5],
    bound: [bool; 5],
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn with(mut self, v: Var, x: f64) -> Bindings {
        self.set(v, x);
        self
    }

    pub fn set(&mut self, v: Var, x: f64) {
        self.vals[v.slot()] = x;
        self.bound[v.slot()] = true;
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        self.bound[v.slot()].then(|| self.vals[v.slot()])
    }

    pub(crate) fn lookup(&self, slot: usize) -> Result<f64, EvalError> {
        if self.bound[slot] {
            Ok(self.vals[slot])
        } else {
            Err(EvalError::Unbound(Var::ALL[slot]))
        }
    }
}

pub(crate) fn apply_bin(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinOp::Add => Ok(a + b),
        BinOp::Sub => Ok(a - b),
        BinOp::Mul => Ok(a * b),
        BinOp::Div => {
            if b == 0.0 {
                Err(EvalError::DivisionByZero)
            } else {
                Ok(a / b)
            }
        }
        BinOp::Pow => {
            if a == 0.0 && b < 0.0 {
                Err(EvalError::PowZeroNegative(b))
            } else if a < 0.0 && b.fract() != 0.0 {
                Err(EvalError::PowNegativeBase(a, b))
            } else {
                Ok(a.powf(b))
            }
        }
    }
}

pub(crate) fn apply_func1(f: Func1, x: f64) -> Result<f64, EvalError> {
    match f {
        Func1::Sin => Ok(x.sin()),
        Func1::Cos => Ok(x.cos()),
        Func1::Exp => Ok(x.exp()),
        Func1::Ln => {
            if x <= 0.0 {
                Err(EvalError::LogNonPositive(x))
            } else {
                Ok(x.ln())
            }
        }
        Func1::Sqrt => {
            if x < 0.0 {
                Err(EvalError::SqrtNegative(x))
            } else {
                Ok(x.sqrt())
            }
        }
        Func1::Abs => Ok(x.abs()),
        Func1::Sign => Ok(sign(x)),
    }
}

pub(crate) fn apply_func2(f: Func2, a: f64, b: f64) -> f64 {
    match f {
        Func2::Max => a.max(b),
        Func2::Min => a.min(b),
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Evaluate `e` under `b`; every referenced variable must be bound.
pub fn eval_expr(e: &Expr, b: &Bindings) -> Result<f64, EvalError> {
    match e {
        Expr::Num(x) => Ok(*x),
        Expr::Var(v) => b.lookup(v.slot()),
        Expr::Neg(a) => Ok(-eval_expr(a, b)?),
        Expr::Bin(op, l, r) => apply_bin(*op, eval_expr(l, b)?, eval_expr(r, b)?),
        Expr::Unary(f, a) => apply_func1(*f, eval_expr(a, b)?),
        Expr::Binary(f, l, r) => Ok(apply_func2(*f, eval_expr(l, b)?, eval_expr(r, b)?)),
    }
}
