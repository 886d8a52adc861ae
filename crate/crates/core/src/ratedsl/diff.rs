//! Symbolic differentiation, closed over the expression grammar.
//!
//! The kink functions differentiate through `sign`: `abs(u)' = sign(u)·u'`
//! with `sign(0) = 0`, and `max`/`min` select branch derivatives via
//! `sign(u-v)` (averaging the two one-sided derivatives at a tie). The value
//! at a kink point itself is therefore a convention, not a limit.

use super::{BinOp, Expr, Func1, Func2, Var};

/// Exact symbolic partial derivative of `e` with respect to `v`.
///
/// The result is constant-folded but otherwise unsimplified; mixed partials
/// are obtained by composing calls.
pub fn diff_expr(e: &Expr, v: Var) -> Expr {
    d(e, v).fold()
}

fn d(e: &Expr, v: Var) -> Expr {
    match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Var(u) => Expr::Num(if *u == v { 1.0 } else { 0.0 }),
        Expr::Neg(a) => Expr::neg(d(a, v)),
        Expr::Bin(BinOp::Add, a, b) => Expr::bin(BinOp::Add, d(a, v), d(b, v)),
        Expr::Bin(BinOp::Sub, a, b) => Expr::bin(BinOp::Sub, d(a, v), d(b, v)),
        Expr::Bin(BinOp::Mul, a, b) => Expr::bin(
            BinOp::Add,
            Expr::bin(BinOp::Mul, d(a, v), (**b).clone()),
            Expr::bin(BinOp::Mul, (**a).clone(), d(b, v)),
        ),
        Expr::Bin(BinOp::Div, a, b) => Expr::bin(
            BinOp::Div,
            Expr::bin(
                BinOp::Sub,
                Expr::bin(BinOp::Mul, d(a, v), (**b).clone()),
                Expr::bin(BinOp::Mul, (**a).clone(), d(b, v)),
            ),
            Expr::bin(BinOp::Pow, (**b).clone(), Expr::Num(2.0)),
        ),
        Expr::Bin(BinOp::Pow, a, b) => match &**b {
            // power rule for a literal exponent: n * a^(n-1) * a'
            Expr::Num(n) => Expr::bin(
                BinOp::Mul,
                Expr::bin(
                    BinOp::Mul,
                    Expr::Num(*n),
                    Expr::bin(BinOp::Pow, (**a).clone(), Expr::Num(n - 1.0)),
                ),
                d(a, v),
            ),
            // general rule: a^b * (b' ln a + b a'/a), defined for a > 0
            _ => Expr::bin(
                BinOp::Mul,
                e.clone(),
                Expr::bin(
                    BinOp::Add,
                    Expr::bin(BinOp::Mul, d(b, v), Expr::unary(Func1::Ln, (**a).clone())),
                    Expr::bin(
                        BinOp::Div,
                        Expr::bin(BinOp::Mul, (**b).clone(), d(a, v)),
                        (**a).clone(),
                    ),
                ),
            ),
        },
        Expr::Unary(f, a) => {
            let inner = d(a, v);
            let outer = match f {
                Func1::Sin => Expr::unary(Func1::Cos, (**a).clone()),
                Func1::Cos => Expr::neg(Expr::unary(Func1::Sin, (**a).clone())),
                Func1::Exp => Expr::unary(Func1::Exp, (**a).clone()),
                Func1::Ln => Expr::bin(BinOp::Div, Expr::Num(1.0), (**a).clone()),
                Func1::Sqrt => Expr::bin(
                    BinOp::Div,
                    Expr::Num(0.5),
                    Expr::unary(Func1::Sqrt, (**a).clone()),
                ),
                Func1::Abs => Expr::unary(Func1::Sign, (**a).clone()),
                Func1::Sign => Expr::Num(0.0),
            };
            Expr::bin(BinOp::Mul, outer, inner)
        }
        Expr::Binary(f, a, b) => {
            // max(u,v)' = (1+sign(u-v))/2 * u' + (1-sign(u-v))/2 * v'
            let s = Expr::unary(
                Func1::Sign,
                Expr::bin(BinOp::Sub, (**a).clone(), (**b).clone()),
            );
            let (wa, wb) = match f {
                Func2::Max => (half_shift(s.clone(), BinOp::Add), half_shift(s, BinOp::Sub)),
                Func2::Min => (half_shift(s.clone(), BinOp::Sub), half_shift(s, BinOp::Add)),
            };
            Expr::bin(
                BinOp::Add,
                Expr::bin(BinOp::Mul, wa, d(a, v)),
                Expr::bin(BinOp::Mul, wb, d(b, v)),
            )
        }
    }
}

// (1 ± sign(...)) / 2
fn half_shift(s: Expr, op: BinOp) -> Expr {
    Expr::bin(BinOp::Div, Expr::bin(op, Expr::Num(1.0), s), Expr::Num(2.0))
}
