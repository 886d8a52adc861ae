//! Recursive-descent parser for rate expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" factor)?
//! atom   := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! `^` binds tightest and is right-associative; unary minus sits below `^`,
//! so `-x^2` parses as `-(x^2)` while `2^-3` is still accepted.

use super::{BinOp, Expr, Func1, Func2, Var};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
}

impl ParseError {
    fn new(message: impl Into<String>, offset: usize) -> ParseError {
        ParseError {
            message: message.into(),
            offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'/' => Tok::Slash,
                b'^' => Tok::Caret,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                b'0'..=b'9' | b'.' => {
                    out.push((lx.number(start)?, start));
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    out.push((lx.ident(start), start));
                    continue;
                }
                c => {
                    return Err(ParseError::new(
                        format!("unexpected character '{}'", c as char),
                        start,
                    ))
                }
            };
            lx.pos += 1;
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.src.len() && matches!(self.src[self.pos], b'0'..=b'9' | b'.') {
            self.pos += 1;
        }
        // exponent part: e / E followed by optional sign and digits
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mut look = self.pos + 1;
            if look < self.src.len() && matches!(self.src[look], b'+' | b'-') {
                look += 1;
            }
            if look < self.src.len() && self.src[look].is_ascii_digit() {
                self.pos = look;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ParseError::new(format!("invalid number literal '{text}'"), start))
    }

    fn ident(&mut self, start: usize) -> Tok {
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(
            std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .to_owned(),
        )
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

/// Parse an expression string into its AST.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::new("empty expression", 0));
    }
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if let Some((tok, off)) = p.peek() {
        return Err(ParseError::new(format!("unexpected token {tok:?}"), off));
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<(Tok, usize)> {
        self.toks.get(self.idx).cloned()
    }

    fn here(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |t| t.1)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek().map(|t| t.0) == Some(want.clone()) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::bin(BinOp::Add, lhs, self.term()?);
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::bin(BinOp::Sub, lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Expr::bin(BinOp::Mul, lhs, self.factor()?);
            } else if self.eat(&Tok::Slash) {
                lhs = Expr::bin(BinOp::Div, lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            // canonicalise a negated literal so printing round-trips
            return Ok(match self.factor()? {
                Expr::Num(x) => Expr::Num(-x),
                e => Expr::neg(e),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let exponent = self.factor()?;
            return Ok(Expr::bin(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let off = self.here();
        match self.bump() {
            Some((Tok::Num(x), _)) => Ok(Expr::Num(x)),
            Some((Tok::LParen, open_off)) => {
                let inner = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return Err(ParseError::new("unbalanced parenthesis", open_off));
                }
                Ok(inner)
            }
            Some((Tok::Ident(name), ident_off)) => {
                if self.eat(&Tok::LParen) {
                    self.call(&name, ident_off)
                } else {
                    match name.as_str() {
                        "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                        "e" => Ok(Expr::Num(std::f64::consts::E)),
                        _ => Var::from_name(&name).map(Expr::Var).ok_or_else(|| {
                            ParseError::new(format!("unknown identifier '{name}'"), ident_off)
                        }),
                    }
                }
            }
            Some((tok, off)) => Err(ParseError::new(
                format!("expected operand, found {tok:?}"),
                off,
            )),
            None => Err(ParseError::new("expected operand, found end of input", off)),
        }
    }

    fn call(&mut self, name: &str, ident_off: usize) -> Result<Expr, ParseError> {
        let mut args = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            args.push(self.expr()?);
        }
        if !self.eat(&Tok::RParen) {
            return Err(ParseError::new("unbalanced parenthesis", self.here()));
        }
        let func1 = match name {
            "sin" => Some(Func1::Sin),
            "cos" => Some(Func1::Cos),
            "exp" => Some(Func1::Exp),
            "ln" => Some(Func1::Ln),
            "sqrt" => Some(Func1::Sqrt),
            "abs" => Some(Func1::Abs),
            "sign" => Some(Func1::Sign),
            _ => None,
        };
        if let Some(f) = func1 {
            if args.len() != 1 {
                return Err(ParseError::new(
                    format!("{name} takes 1 argument, got {}", args.len()),
                    ident_off,
                ));
            }
            return Ok(Expr::unary(f, args.pop().unwrap()));
        }
        let func2 = match name {
            "max" => Some(Func2::Max),
            "min" => Some(Func2::Min),
            _ => None,
        };
        if let Some(f) = func2 {
            if args.len() != 2 {
                return Err(ParseError::new(
                    format!("{name} takes 2 arguments, got {}", args.len()),
                    ident_off,
                ));
            }
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            return Ok(Expr::binary(f, a, b));
        }
        Err(ParseError::new(
            format!("unknown function '{name}'"),
            ident_off,
        ))
    }
}
