//! A small expression language for coefficient functions in config files.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'? atom ('^' atom)?
//! atom   := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Variables are `a` (receiving age) and `alpha` (source age, kernels only).
//! Functions: `exp(x)`, `abs(x)`, `chi(lo, hi)` (indicator of `a` in `[lo, hi)`)
//! and `chi(x, lo, hi)`. Indicators are closed on the right at the maximum age.
//! Division by zero and non-finite powers evaluate to 0.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Age,
    SourceAge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Abs,
    Chi,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Point at which an expression is evaluated.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext {
    pub a: f64,
    pub alpha: f64,
    pub a_dagger: f64,
}

impl Expr {
    pub fn eval(&self, ctx: &EvalContext) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::Age) => ctx.a,
            Expr::Var(Var::SourceAge) => ctx.alpha,
            Expr::Neg(e) => -e.eval(ctx),
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(ctx), r.eval(ctx));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            0.0
                        } else {
                            l / r
                        }
                    }
                }
            }
            Expr::Pow(b, e) => {
                let v = b.eval(ctx).powf(e.eval(ctx));
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            }
            Expr::Call(Func::Exp, args) => args[0].eval(ctx).exp(),
            Expr::Call(Func::Abs, args) => args[0].eval(ctx).abs(),
            Expr::Call(Func::Chi, args) => {
                let (x, lo, hi) = match args.as_slice() {
                    [lo, hi] => (ctx.a, lo.eval(ctx), hi.eval(ctx)),
                    [x, lo, hi] => (x.eval(ctx), lo.eval(ctx), hi.eval(ctx)),
                    _ => unreachable!("arity checked by the parser"),
                };
                let inside = (lo <= x && x < hi) || (x == hi && hi >= ctx.a_dagger);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether the expression mentions `alpha`.
    pub fn uses_source_age(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == Var::SourceAge,
            Expr::Neg(e) => e.uses_source_age(),
            Expr::Bin(_, l, r) | Expr::Pow(l, r) => l.uses_source_age() || r.uses_source_age(),
            Expr::Call(_, args) => args.iter().any(Expr::uses_source_age),
        }
    }

    /// True when the expression is the literal zero.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    fn is_atom(&self) -> bool {
        matches!(self, Expr::Num(v) if *v >= 0.0) || matches!(self, Expr::Var(_) | Expr::Call(..))
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_atom() {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }

    fn fmt_factor(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Neg(_) | Expr::Pow(..) => write!(f, "{self}"),
            _ => self.fmt_atom(f),
        }
    }

    fn fmt_term(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => write!(f, "{self}"),
            _ => self.fmt_factor(f),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "({v:?})"),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::Age) => f.write_str("a"),
            Expr::Var(Var::SourceAge) => f.write_str("alpha"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                match e.as_ref() {
                    Expr::Pow(..) => write!(f, "{e}"),
                    _ => e.fmt_atom(f),
                }
            }
            Expr::Pow(b, e) => {
                b.fmt_atom(f)?;
                f.write_str("^")?;
                e.fmt_atom(f)
            }
            Expr::Bin(op, l, r) => match op {
                BinOp::Add | BinOp::Sub => {
                    write!(f, "{l}")?;
                    f.write_str(if *op == BinOp::Add { " + " } else { " - " })?;
                    r.fmt_term(f)
                }
                BinOp::Mul | BinOp::Div => {
                    l.fmt_term(f)?;
                    f.write_str(if *op == BinOp::Mul { "*" } else { "/" })?;
                    r.fmt_factor(f)
                }
            },
            Expr::Call(func, args) => {
                f.write_str(match func {
                    Func::Exp => "exp",
                    Func::Abs => "abs",
                    Func::Chi => "chi",
                })?;
                f.write_str("(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(Error::Syntax {
                offset: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, o)| o)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn error(&self, message: String) -> Error {
        Error::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let negate = self.eat('-');
        let mut e = self.atom()?;
        if self.eat('^') {
            let exponent = self.atom()?;
            e = Expr::Pow(Box::new(e), Box::new(exponent));
        }
        Ok(if negate { Expr::Neg(Box::new(e)) } else { e })
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let func = match name.as_str() {
                        "exp" => Func::Exp,
                        "abs" => Func::Abs,
                        "chi" => Func::Chi,
                        _ => return Err(Error::UnknownIdentifier { name, offset }),
                    };
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    let ok = match func {
                        Func::Exp | Func::Abs => args.len() == 1,
                        Func::Chi => args.len() == 2 || args.len() == 3,
                    };
                    if !ok {
                        return Err(Error::Syntax {
                            offset,
                            message: format!("wrong number of arguments to `{name}`"),
                        });
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    match name.as_str() {
                        "a" => Ok(Expr::Var(Var::Age)),
                        "alpha" => Ok(Expr::Var(Var::SourceAge)),
                        _ => Err(Error::UnknownIdentifier { name, offset }),
                    }
                }
            }
            Some(Tok::Sym(c)) => Err(self.error(format!("unexpected `{c}`"))),
            None => Err(self.error("unexpected end of input".into())),
        }
    }
}

pub fn parse_coefficient(source: &str) -> Result<Expr> {
    let toks = lex(source)?;
    if toks.is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: source.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input".into()));
    }
    Ok(e)
}
