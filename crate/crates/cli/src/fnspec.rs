//! Tiny expression language for test functions of `z`.
//!
//! Grammar:
//!
//! ```text
//! expr  = term (("+" | "-") term)*
//! term  = unary (("*" | "/") unary)*
//! unary = "-" unary | power
//! power = atom ("^" ["-" | "+"] number)?
//! atom  = number | "z" | "(" expr ")"
//!       | "exp(" expr ")" | "abs(" expr ")"
//!       | "const(" signed ")" | "fab(" signed "," signed ")"
//! ```
//!
//! `fab(a, b)` is `a |1 − b z|^{(n−2)/2}` and needs `n` at evaluation time.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at position {pos}: {message}")]
pub struct ParseError {
    /// Byte offset into the source.
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Z,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Abs(Box<Expr>),
    Fab(f64, f64),
}

impl Expr {
    pub fn eval(&self, z: f64, n: f64) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Z => z,
            Expr::Neg(a) => -a.eval(z, n),
            Expr::Add(a, b) => a.eval(z, n) + b.eval(z, n),
            Expr::Sub(a, b) => a.eval(z, n) - b.eval(z, n),
            Expr::Mul(a, b) => a.eval(z, n) * b.eval(z, n),
            Expr::Div(a, b) => a.eval(z, n) / b.eval(z, n),
            Expr::Pow(a, e) => a.eval(z, n).powf(*e),
            Expr::Exp(a) => a.eval(z, n).exp(),
            Expr::Abs(a) => a.eval(z, n).abs(),
            Expr::Fab(a, b) => a * (1.0 - b * z).abs().powf((n - 2.0) / 2.0),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < src.len() {
        return p.fail("unexpected trailing input");
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn fail<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            message: message.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(&format!("expected '{}'", c as char))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.signed()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < bytes.len() && matches!(bytes[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && matches!(bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = mark;
            }
        }
        if self.pos == start {
            return self.fail("expected a number");
        }
        self.src[start..self.pos].parse().map_err(|_| ParseError {
            pos: start,
            message: format!("malformed number '{}'", &self.src[start..self.pos]),
        })
    }

    fn signed(&mut self) -> Result<f64, ParseError> {
        if self.eat(b'-') {
            Ok(-self.number()?)
        } else {
            self.eat(b'+');
            self.number()
        }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident().to_string();
                if name == "z" {
                    return Ok(Expr::Z);
                }
                let known = matches!(name.as_str(), "exp" | "abs" | "const" | "fab");
                if !known {
                    self.pos = start;
                    return self.fail(&format!("unknown name '{name}'"));
                }
                self.expect(b'(')?;
                let e = match name.as_str() {
                    "exp" => Expr::Exp(Box::new(self.expr()?)),
                    "abs" => Expr::Abs(Box::new(self.expr()?)),
                    "const" => Expr::Num(self.signed()?),
                    _ => {
                        let a = self.signed()?;
                        self.expect(b',')?;
                        Expr::Fab(a, self.signed()?)
                    }
                };
                self.expect(b')')?;
                Ok(e)
            }
            Some(_) => self.fail("unexpected character"),
            None => self.fail("unexpected end of input"),
        }
    }
}
