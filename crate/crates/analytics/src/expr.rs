//! A small expression language for user-defined column transforms.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func    := log | exp | sqrt | abs | min | max
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)`.

use serde::{Deserialize, Serialize};

use crate::{Error, FeatureTable, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Log,
    Exp,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "log" => Func::Log,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Func::Min | Func::Max => n >= 2,
            _ => n == 1,
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, pos: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(self.pos, format!("expected `{}`", c as char))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                Op::Add
            } else if self.eat(b'-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                Op::Mul
            } else if self.eat(b'/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return self.err(self.pos, "unexpected end of expression"),
        };
        let c = self.src[start];
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut end = start;
            while end < self.src.len() && (self.src[end].is_ascii_digit() || self.src[end] == b'.') {
                end += 1;
            }
            if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                let mut k = end + 1;
                if k < self.src.len() && (self.src[k] == b'+' || self.src[k] == b'-') {
                    k += 1;
                }
                if k < self.src.len() && self.src[k].is_ascii_digit() {
                    while k < self.src.len() && self.src[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = std::str::from_utf8(&self.src[start..end]).expect("ascii");
            return match text.parse::<f64>() {
                Ok(v) => {
                    self.pos = end;
                    Ok(Expr::Num(v))
                }
                Err(_) => self.err(start, format!("malformed number `{text}`")),
            };
        }
        if c.is_ascii_alphabetic() {
            let mut end = start;
            while end < self.src.len() && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_') {
                end += 1;
            }
            let name = std::str::from_utf8(&self.src[start..end]).expect("ascii");
            self.pos = end;
            if name == "x" {
                return Ok(Expr::Var);
            }
            let Some(f) = Func::lookup(name) else {
                return self.err(start, format!("unknown identifier `{name}`"));
            };
            self.expect(b'(')?;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            self.expect(b')')?;
            if !f.arity_ok(args.len()) {
                return self.err(start, format!("wrong number of arguments to `{name}`"));
            }
            return Ok(Expr::Call(f, args));
        }
        self.err(start, format!("unexpected character `{}`", c as char))
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err(p.pos, "trailing input");
    }
    Ok(e)
}

impl Expr {
    /// Evaluates at `x`; the error string describes a domain violation.
    pub fn eval(&self, x: f64) -> std::result::Result<f64, String> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div if b == 0.0 => return Err("division by zero".into()),
                    Op::Div => a / b,
                    Op::Pow => {
                        let v = a.powf(b);
                        if !v.is_finite() {
                            return Err(format!("{a}^{b} is undefined"));
                        }
                        v
                    }
                }
            }
            Expr::Call(f, args) => {
                let v: Vec<f64> = args.iter().map(|a| a.eval(x)).collect::<std::result::Result<_, _>>()?;
                match f {
                    Func::Log if v[0] <= 0.0 => return Err(format!("log of non-positive value {}", v[0])),
                    Func::Log => v[0].ln(),
                    Func::Exp => {
                        let e = v[0].exp();
                        if !e.is_finite() {
                            return Err(format!("exp({}) overflows", v[0]));
                        }
                        e
                    }
                    Func::Sqrt if v[0] < 0.0 => return Err(format!("sqrt of negative value {}", v[0])),
                    Func::Sqrt => v[0].sqrt(),
                    Func::Abs => v[0].abs(),
                    Func::Min => v.iter().cloned().fold(f64::INFINITY, f64::min),
                    Func::Max => v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                }
            }
        })
    }
}

/// A parsed transform bound to the columns it rewrites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomTransform {
    pub expression: String,
    pub columns: Vec<String>,
}

impl CustomTransform {
    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable> {
        let e = parse(&self.expression)?;
        let idx = self.columns.iter().map(|c| table.column_index(c)).collect::<Result<Vec<_>>>()?;
        let mut out = table.clone();
        for (r, row) in out.values.iter_mut().enumerate() {
            for &j in &idx {
                row[j] = e.eval(row[j]).map_err(|message| Error::Domain {
                    row: table.row_ids[r].clone(),
                    column: table.columns[j].clone(),
                    message,
                })?;
            }
        }
        Ok(out)
    }
}

/// Applies `expression` to `columns` (all columns when empty).
pub fn custom_transform(table: &FeatureTable, expression: &str, columns: &[String]) -> Result<FeatureTable> {
    let columns = if columns.is_empty() { table.columns.clone() } else { columns.to_vec() };
    CustomTransform { expression: expression.to_string(), columns }.apply(table)
}
