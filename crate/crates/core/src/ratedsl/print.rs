//! Canonical printer. `parse(print(e))` reproduces `e` structurally, which is
//! what makes derivative expressions storable back into config files.

use super::{BinOp, Expr};
use std::fmt;

// binding strength used for parenthesization
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, _, _) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, _, _) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, _, _) => 4,
        Expr::Num(x) if *x < 0.0 => 3,
        _ => 5,
    }
}

fn op_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Pow => "^",
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, need: u8) -> fmt::Result {
    if prec(child) < need {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, 3)
            }
            Expr::Bin(op, l, r) => {
                let p = prec(self);
                match op {
                    // right-associative: parenthesise a left child of equal precedence
                    BinOp::Pow => {
                        if prec(l) <= p {
                            write!(f, "({l})")?;
                        } else {
                            write!(f, "{l}")?;
                        }
                        f.write_str("^")?;
                        write_child(f, r, p)
                    }
                    // left-associative: a right child of equal precedence needs
                    // parens so that structure survives reparsing
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        write_child(f, l, p)?;
                        f.write_str(op_str(*op))?;
                        write_child(f, r, p + 1)
                    }
                }
            }
            Expr::Unary(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(func, a, b) => write!(f, "{}({a},{b})", func.name()),
        }
    }
}
