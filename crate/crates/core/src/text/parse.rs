//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' nat)?
//! atom   := rational | 'eps' | 'xi' | 'G1' | 'G2' | jetvar | symbol
//!         | '(' expr ')' | 'inv(' expr ')'
//! jetvar := ('u'|'v'|'w') idx jets
//! jets   := '' | '_' 'x'+ | '_' nat | '[' nat ']'
//! ```
//!
//! Rationals are `a` or `a/b`. Parsing produces an [`Expr`] tree that is then
//! evaluated into a [`DiffPoly`] or, by the transforms module, into a series.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::ring::{DiffPoly, TruncationContext};
use crate::scalar::{Param, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational),
    Param(Param),
    Eps,
    /// Jet variable: letter, 0-based variable, order.
    Jet(char, usize, usize),
    /// A bare symbol such as `x`, `y` or `t1`; only meaningful for series.
    Symbol(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Inv(Box<Expr>),
}

impl Expr {
    /// Jet letters used anywhere in the tree.
    pub fn letters(&self, out: &mut Vec<char>) {
        match self {
            Expr::Jet(c, _, _) => {
                if !out.contains(c) {
                    out.push(*c)
                }
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.letters(out);
                b.letters(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Inv(a) => a.letters(out),
            _ => {}
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Jet(_, v, _) => Some(*v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Inv(a) => a.max_var(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Jet(char, usize, usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(q) => write!(f, "number {q}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Jet(c, v, k) => write!(f, "'{c}{}[{k}]'", v + 1),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Caret => write!(f, "'^'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((Tok::End, line, col));
                return Ok(out);
            };
            let tok = match c {
                '+' => {
                    self.bump();
                    Tok::Plus
                }
                '-' => {
                    self.bump();
                    Tok::Minus
                }
                '*' => {
                    self.bump();
                    Tok::Star
                }
                '^' => {
                    self.bump();
                    Tok::Caret
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                c if c.is_ascii_digit() => {
                    let num = self.digits();
                    let mut q = Rational::from_integer(num.parse::<BigInt>().unwrap());
                    if self.peek() == Some('/') {
                        self.bump();
                        let den = self.digits();
                        if den.is_empty() {
                            return Err(self.err(self.line, self.col, "expected denominator after '/'"));
                        }
                        let den: BigInt = den.parse().unwrap();
                        if den.is_zero() {
                            return Err(self.err(line, col, "zero denominator"));
                        }
                        q /= Rational::from_integer(den);
                    }
                    Tok::Num(q)
                }
                c if c.is_ascii_alphabetic() => {
                    let mut name = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.ident_or_jet(name, line, col)?
                }
                other => return Err(self.err(line, col, format!("unexpected character '{other}'"))),
            };
            out.push((tok, line, col));
        }
    }

    fn ident_or_jet(&mut self, name: String, line: usize, col: usize) -> Result<Tok, ParseError> {
        let first = name.chars().next().unwrap();
        let rest = &name[1..];
        let is_jet = matches!(first, 'u' | 'v' | 'w')
            && (rest.is_empty() || rest.chars().all(|c| c.is_ascii_digit()));
        if !is_jet {
            return Ok(Tok::Ident(name));
        }
        let var = if rest.is_empty() {
            0
        } else {
            let idx: usize = rest.parse().map_err(|_| self.err(line, col, "bad variable index"))?;
            if idx == 0 {
                return Err(self.err(line, col, "variable indices start at 1"));
            }
            idx - 1
        };
        let mut order = 0;
        match self.peek() {
            Some('_') => {
                self.bump();
                if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    order = self.digits().parse().unwrap();
                } else {
                    while self.peek() == Some('x') || self.peek() == Some('y') {
                        self.bump();
                        order += 1;
                    }
                    if order == 0 {
                        return Err(self.err(self.line, self.col, "expected 'x' or a number after '_'"));
                    }
                }
            }
            Some('[') => {
                self.bump();
                let d = self.digits();
                if d.is_empty() || self.peek() != Some(']') {
                    return Err(self.err(self.line, self.col, "expected '[n]'"));
                }
                self.bump();
                order = d.parse().unwrap();
            }
            _ => {}
        }
        Ok(Tok::Jet(first, var, order))
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].1, self.toks[self.pos].2)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {t}, found {}", self.peek())))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if *self.peek() == Tok::Minus {
            self.bump();
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            match self.bump() {
                Tok::Num(q) if q.is_integer() && q >= Rational::zero() => {
                    let e: u32 = q
                        .numer()
                        .try_into()
                        .map_err(|_| self.err("exponent too large"))?;
                    return Ok(Expr::Pow(Box::new(base), e));
                }
                t => return Err(self.err(format!("expected a natural exponent, found {t}"))),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let here = self.here();
        match self.bump() {
            Tok::Num(q) => Ok(Expr::Num(q)),
            Tok::Jet(c, v, k) => Ok(Expr::Jet(c, v, k)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Minus => Ok(Expr::Neg(Box::new(self.factor()?))),
            Tok::Ident(name) => match name.as_str() {
                "eps" => Ok(Expr::Eps),
                "inv" => {
                    self.expect(Tok::LParen)?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Inv(Box::new(e)))
                }
                other => match Param::from_name(other) {
                    Some(p) => Ok(Expr::Param(p)),
                    None => Ok(Expr::Symbol(other.to_string())),
                },
            },
            t => Err(ParseError {
                line: here.0,
                col: here.1,
                msg: format!("unexpected {t}"),
            }),
        }
    }
}

/// Parses source text into an expression tree.
pub fn parse_tree(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.err(format!("unexpected {} after expression", p.peek())));
    }
    Ok(e)
}

/// Evaluates a tree as a differential polynomial in `n_vars` variables.
pub fn eval_diffpoly(e: &Expr, n_vars: usize, ctx: TruncationContext) -> Result<DiffPoly, String> {
    Ok(match e {
        Expr::Num(q) => DiffPoly::constant(n_vars, ctx, q.clone()),
        Expr::Param(p) => DiffPoly::param(n_vars, ctx, *p),
        Expr::Eps => DiffPoly::eps_pow(n_vars, ctx, 1),
        Expr::Jet(c, v, k) => {
            if *v >= n_vars {
                return Err(format!("{c}{} out of range for {n_vars} variable(s)", v + 1));
            }
            DiffPoly::jet(n_vars, ctx, *v, *k)
        }
        Expr::Symbol(s) => return Err(format!("unknown symbol '{s}'")),
        Expr::Add(a, b) => &eval_diffpoly(a, n_vars, ctx)? + &eval_diffpoly(b, n_vars, ctx)?,
        Expr::Sub(a, b) => &eval_diffpoly(a, n_vars, ctx)? - &eval_diffpoly(b, n_vars, ctx)?,
        Expr::Mul(a, b) => &eval_diffpoly(a, n_vars, ctx)? * &eval_diffpoly(b, n_vars, ctx)?,
        Expr::Neg(a) => -&eval_diffpoly(a, n_vars, ctx)?,
        Expr::Pow(a, k) => eval_diffpoly(a, n_vars, ctx)?.pow(*k),
        Expr::Inv(a) => {
            let x = eval_diffpoly(a, n_vars, ctx)?;
            if !x.constant_term().is_one() {
                return Err("inv(...) requires constant term 1".to_string());
            }
            x.invert_unit().map_err(|e| e.to_string())?
        }
    })
}

/// Parses a differential polynomial. Returns the polynomial and the jet letter
/// it was written in (`u` when no jet occurs).
pub fn parse_expr_with_letter(
    src: &str,
    n_vars: usize,
    ctx: TruncationContext,
) -> Result<(DiffPoly, char), ParseError> {
    let tree = parse_tree(src)?;
    let mut letters = Vec::new();
    tree.letters(&mut letters);
    if letters.len() > 1 {
        return Err(ParseError {
            line: 1,
            col: 1,
            msg: format!("mixed jet letters {letters:?}"),
        });
    }
    let p = eval_diffpoly(&tree, n_vars, ctx).map_err(|msg| ParseError { line: 1, col: 1, msg })?;
    Ok((p, letters.first().copied().unwrap_or('u')))
}

pub fn parse_expr(src: &str, n_vars: usize, ctx: TruncationContext) -> Result<DiffPoly, ParseError> {
    parse_expr_with_letter(src, n_vars, ctx).map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::text::render_text;

    fn ctx() -> TruncationContext {
        TruncationContext::new(4, 6)
    }

    #[test]
    fn product_of_jets() {
        let p = parse_expr("u1*u1_x", 1, ctx()).unwrap();
        assert_eq!(p, &DiffPoly::var(1, ctx(), 0) * &DiffPoly::jet(1, ctx(), 0, 1));
    }

    #[test]
    fn kdv_p1() {
        let p = parse_expr("1/2*u1^2 + eps^2*1/12*u1[2]", 1, ctx()).unwrap();
        assert_eq!(render_text(&p, 'u'), "1/2*u1^2 + 1/12*eps^2*u1[2]");
        let q = parse_expr("1/2*u1^2 + 1/12*eps^2*u1_xx", 1, ctx()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn inverse_of_unit() {
        let p = parse_expr("inv(1+xi*u2)", 2, TruncationContext::new(0, 3)).unwrap();
        assert_eq!(render_text(&p, 'u'), "1 - xi*u2 + xi^2*u2^2 - xi^3*u2^3");
        assert!(parse_expr("inv(2+u1)", 1, ctx()).is_err());
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_expr("u1 +\n  * u1", 1, ctx()).unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(parse_expr("foo", 1, ctx()).is_err());
        assert!(parse_expr("u3", 2, ctx()).is_err());
        assert!(parse_expr("u1*v1", 1, ctx()).is_err());
    }

    #[test]
    fn leading_minus_and_subscripts() {
        let p = parse_expr("-u1_3 + u1[3]", 1, ctx()).unwrap();
        assert!(p.is_zero());
        let q = parse_expr("-1/2*xi*v1", 1, ctx()).unwrap();
        assert_eq!(q, DiffPoly::var(1, ctx(), 0).scalar_mul(&crate::scalar::ParamScalar::param(Param::Xi)).scale(&rat(-1, 2)));
    }
}
