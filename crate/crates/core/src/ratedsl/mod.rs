//! Expression DSL for the model's vital rates.
//!
//! Rate formulas (growth, mortality, fertility, hierarchy weight) are written
//! as plain text in configuration files, parsed into an [`Expr`] tree, and
//! then evaluated or symbolically differentiated. The variable set is fixed:
//! `s` (size), `P` (total population), `Q` (hierarchy variable), `tau`
//! (delay), `delta` (history coordinate). `pi` and `e` are predefined
//! constants.
//!
//! Piecewise "zero otherwise" cutoffs are expressed with `max`/`min`, e.g.
//! `max(0, 1-Q)`; there is no conditional syntax. Differentiation is closed
//! over the grammar: the derivative of `abs` is `sign` (with `sign(0) = 0`),
//! and `max`/`min` differentiate through `sign` of the argument difference.
//!
//! Expressions are immutable after parsing and evaluation is pure, so values
//! can be shared freely across threads.

mod compile;
mod diff;
mod eval;
mod parse;
mod print;

pub use compile::Compiled;
pub use diff::diff_expr;
pub use eval::{eval_expr, Bindings, EvalError};
pub use parse::{parse_expr, ParseError};

/// The five variables a rate expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Size,
    Population,
    Hierarchy,
    Tau,
    Delta,
}

impl Var {
    pub const ALL: [Var; 5] = [
        Var::Size,
        Var::Population,
        Var::Hierarchy,
        Var::Tau,
        Var::Delta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::Size => "s",
            Var::Population => "P",
            Var::Hierarchy => "Q",
            Var::Tau => "tau",
            Var::Delta => "delta",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "s" => Some(Var::Size),
            "P" => Some(Var::Population),
            "Q" => Some(Var::Hierarchy),
            "tau" => Some(Var::Tau),
            "delta" => Some(Var::Delta),
            _ => None,
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Var::Size => 0,
            Var::Population => 1,
            Var::Hierarchy => 2,
            Var::Tau => 3,
            Var::Delta => 4,
        }
    }
}

impl std::fmt::Display for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func1 {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sign,
}

impl Func1 {
    pub fn name(self) -> &'static str {
        match self {
            Func1::Sin => "sin",
            Func1::Cos => "cos",
            Func1::Exp => "exp",
            Func1::Ln => "ln",
            Func1::Sqrt => "sqrt",
            Func1::Abs => "abs",
            Func1::Sign => "sign",
        }
    }
}

/// Two-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func2 {
    Max,
    Min,
}

impl Func2 {
    pub fn name(self) -> &'static str {
        match self {
            Func2::Max => "max",
            Func2::Min => "min",
        }
    }
}

/// Parsed abstract syntax tree of a rate expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Unary(Func1, Box<Expr>),
    Binary(Func2, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn unary(f: Func1, a: Expr) -> Expr {
        Expr::Unary(f, Box::new(a))
    }

    pub fn binary(f: Func2, a: Expr, b: Expr) -> Expr {
        Expr::Binary(f, Box::new(a), Box::new(b))
    }

    /// True if the tree references `v` anywhere.
    pub fn references(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(u) => *u == v,
            Expr::Neg(a) | Expr::Unary(_, a) => a.references(v),
            Expr::Bin(_, a, b) | Expr::Binary(_, a, b) => a.references(v) || b.references(v),
        }
    }

    /// Constant folding plus neutral-element cleanup.
    ///
    /// Literal-only subtrees are collapsed when the arithmetic is defined and
    /// finite; `0`/`1` identities are removed. Subtrees whose folding would
    /// hit a domain error (for instance `ln(-1)`) are left intact so that
    /// evaluation reports the error.
    // guards instead of float literal patterns; the latter are rejected
    // by the compiler
    #[allow(clippy::redundant_guards)]
    pub fn fold(self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Var(_) => self,
            Expr::Neg(a) => match a.fold() {
                Expr::Num(x) => Expr::Num(-x),
                a => Expr::neg(a),
            },
            Expr::Unary(f, a) => match a.fold() {
                Expr::Num(x) => match eval::apply_func1(f, x) {
                    Ok(y) if y.is_finite() => Expr::Num(y),
                    _ => Expr::unary(f, Expr::Num(x)),
                },
                a => Expr::unary(f, a),
            },
            Expr::Binary(f, a, b) => match (a.fold(), b.fold()) {
                (Expr::Num(x), Expr::Num(y)) => {
                    let z = eval::apply_func2(f, x, y);
                    if z.is_finite() {
                        Expr::Num(z)
                    } else {
                        Expr::binary(f, Expr::Num(x), Expr::Num(y))
                    }
                }
                (a, b) => Expr::binary(f, a, b),
            },
            Expr::Bin(op, a, b) => {
                let a = a.fold();
                let b = b.fold();
                if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
                    if let Ok(z) = eval::apply_bin(op, *x, *y) {
                        if z.is_finite() {
                            return Expr::Num(z);
                        }
                    }
                }
                match (op, a, b) {
                    (BinOp::Add, Expr::Num(x), b) if x == 0.0 => b,
                    (BinOp::Add, a, Expr::Num(y)) if y == 0.0 => a,
                    (BinOp::Sub, a, Expr::Num(y)) if y == 0.0 => a,
                    (BinOp::Sub, Expr::Num(x), b) if x == 0.0 => Expr::neg(b).fold(),
                    (BinOp::Mul, Expr::Num(x), _) if x == 0.0 => Expr::Num(0.0),
                    (BinOp::Mul, _, Expr::Num(y)) if y == 0.0 => Expr::Num(0.0),
                    (BinOp::Mul, Expr::Num(x), b) if x == 1.0 => b,
                    (BinOp::Mul, a, Expr::Num(y)) if y == 1.0 => a,
                    (BinOp::Mul, Expr::Num(x), b) if x == -1.0 => Expr::neg(b).fold(),
                    (BinOp::Mul, a, Expr::Num(y)) if y == -1.0 => Expr::neg(a).fold(),
                    (BinOp::Div, a, Expr::Num(y)) if y == 1.0 => a,
                    (BinOp::Pow, a, Expr::Num(y)) if y == 1.0 => a,
                    (BinOp::Pow, _, Expr::Num(y)) if y == 0.0 => Expr::Num(1.0),
                    (op, a, b) => Expr::bin(op, a, b),
                }
            }
        }
    }
}
