//! Flat postfix form for fast repeated evaluation.
//!
//! Tree walking is too slow for the quadrature loops (a reproduction-number
//! evaluation alone touches the fertility expression a million times), so
//! rate expressions are flattened once into a postfix program executed on a
//! small value stack. Semantics are identical to [`super::eval_expr`]; the
//! scalar kernels are shared.

use super::eval::{apply_bin, apply_func1, apply_func2};
use super::{BinOp, Bindings, EvalError, Expr, Func1, Func2};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Num(f64),
    Load(u8),
    Neg,
    Bin(BinOp),
    Func1(Func1),
    Func2(Func2),
}

/// Compiled form of an [`Expr`].
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    depth: usize,
}

const INLINE_STACK: usize = 64;

impl Compiled {
    pub fn new(e: &Expr) -> Compiled {
        let mut ops = Vec::new();
        let depth = flatten(e, &mut ops, 0);
        Compiled { ops, depth }
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        if self.depth <= INLINE_STACK {
            let mut stack = [0.0f64; INLINE_STACK];
            self.run(b, &mut stack)
        } else {
            let mut stack = vec![0.0f64; self.depth];
            self.run(b, &mut stack)
        }
    }

    fn run(&self, b: &Bindings, stack: &mut [f64]) -> Result<f64, EvalError> {
        let mut top = 0usize;
        for op in &self.ops {
            match op {
                Op::Num(x) => {
                    stack[top] = *x;
                    top += 1;
                }
                Op::Load(slot) => {
                    stack[top] = b.lookup(*slot as usize)?;
                    top += 1;
                }
                Op::Neg => stack[top - 1] = -stack[top - 1],
                Op::Bin(op) => {
                    top -= 1;
                    stack[top - 1] = apply_bin(*op, stack[top - 1], stack[top])?;
                }
                Op::Func1(f) => stack[top - 1] = apply_func1(*f, stack[top - 1])?,
                Op::Func2(f) => {
                    top -= 1;
                    stack[top - 1] = apply_func2(*f, stack[top - 1], stack[top]);
                }
            }
        }
        debug_assert_eq!(top, 1);
        Ok(stack[0])
    }
}

// post-order emission; returns the stack depth needed for this subtree when
// entered with `base` values already on the stack
fn flatten(e: &Expr, ops: &mut Vec<Op>, base: usize) -> usize {
    match e {
        Expr::Num(x) => {
            ops.push(Op::Num(*x));
            base + 1
        }
        Expr::Var(v) => {
            ops.push(Op::Load(v.slot() as u8));
            base + 1
        }
        Expr::Neg(a) => {
            let d = flatten(a, ops, base);
            ops.push(Op::Neg);
            d
        }
        Expr::Bin(op, a, b) => {
            let da = flatten(a, ops, base);
            let db = flatten(b, ops, base + 1);
            ops.push(Op::Bin(*op));
            da.max(db)
        }
        Expr::Unary(f, a) => {
            let d = flatten(a, ops, base);
            ops.push(Op::Func1(*f));
            d
        }
        Expr::Binary(f, a, b) => {
            let da = flatten(a, ops, base);
            let db = flatten(b, ops, base + 1);
            ops.push(Op::Func2(*f));
            da.max(db)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{eval_expr, parse_expr, Var};
    use super::*;

    #[test]
    fn matches_tree_evaluation() {
        let exprs = [
            "0.5*exp(tau)*(0.7+sin(2*s)^2)*max(0,1-Q)",
            "1/(1+s^2)-sqrt(abs(P-3))",
            "sign(s-1)*min(P,Q)+2^-s",
        ];
        for text in exprs {
            let e = parse_expr(text).unwrap();
            let c = Compiled::new(&e);
            for i in 0..20 {
                let x = -1.0 + 0.35 * i as f64;
                let b = Bindings::new()
                    .with(Var::Size, x)
                    .with(Var::Population, 1.0 + x * x)
                    .with(Var::Hierarchy, 0.5 * x + 1.0)
                    .with(Var::Tau, -0.1 * x.abs());
                match (eval_expr(&e, &b), c.eval(&b)) {
                    (Ok(a), Ok(bb)) => assert!(
                        (a - bb).abs() <= 1e-15 * a.abs().max(1.0),
                        "{text} at {x}: {a} vs {bb}"
                    ),
                    (Err(ea), Err(eb)) => assert_eq!(ea, eb),
                    (a, bb) => panic!("{text} at {x}: tree {a:?} vs compiled {bb:?}"),
                }
            }
        }
    }

    #[test]
    fn errors_propagate() {
        let e = parse_expr("ln(s)").unwrap();
        let c = Compiled::new(&e);
        assert!(c.eval(&Bindings::new().with(Var::Size, -1.0)).is_err());
        assert!(c.eval(&Bindings::new()).is_err());
    }
}
