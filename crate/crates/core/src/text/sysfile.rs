//! File formats built on the expression grammar.
//!
//! A system file holds one flow per line, `t<beta>_<d>: <expr>[, <expr>]`,
//! one expression per component. A map file holds one expression per line,
//! the image of the corresponding variable. A series file holds one series in
//! `x` and `eps` per line. Blank lines and lines starting with `#` are skipped
//! everywhere.

use crate::calculus::{EvolutionaryOp, EvolutionarySystem, FlowLabel};
use crate::ring::{DiffPoly, TruncationContext};
use crate::scalar::ParamScalar;
use crate::transforms::{MiuraTransform, Series};

use super::parse::{eval_diffpoly, parse_tree, Expr, ParseError};
use super::render::render_text;

fn err(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        msg: msg.into(),
    }
}

/// Moves an error reported inside a fragment to file coordinates.
fn relocate(e: ParseError, line: usize, col0: usize) -> ParseError {
    err(line, if e.line == 1 { e.col + col0 } else { e.col }, e.msg)
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn content_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// Splits at commas outside parentheses; yields `(byte offset, piece)`.
fn split_components(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

struct Parsed {
    line: usize,
    col: usize,
    tree: Expr,
}

fn parse_piece(line: usize, col0: usize, text: &str) -> Result<Parsed, ParseError> {
    let tree = parse_tree(text).map_err(|e| relocate(e, line, col0))?;
    Ok(Parsed { line, col: col0 + 1, tree })
}

/// Evaluates trees that must share one jet letter; the letter defaults to `u`.
fn eval_all(items: &[Parsed], n_vars: usize, ctx: TruncationContext) -> Result<(Vec<DiffPoly>, char), ParseError> {
    let mut letter: Option<char> = None;
    let mut out = Vec::with_capacity(items.len());
    for it in items {
        let mut ls = Vec::new();
        it.tree.letters(&mut ls);
        for l in ls {
            match letter {
                None => letter = Some(l),
                Some(c) if c != l => return Err(err(it.line, it.col, format!("jet letter '{l}' after '{c}'"))),
                _ => {}
            }
        }
        out.push(eval_diffpoly(&it.tree, n_vars, ctx).map_err(|m| err(it.line, it.col, m))?);
    }
    Ok((out, letter.unwrap_or('u')))
}

/// Reads a system file. The number of variables is the number of components
/// per line, which must be the same on every line.
pub fn parse_system(src: &str, ctx: TruncationContext) -> Result<EvolutionarySystem, ParseError> {
    let mut rows: Vec<(FlowLabel, usize, Vec<Parsed>)> = Vec::new();
    for (ln, text) in content_lines(src) {
        let (head, body) = text
            .split_once(':')
            .ok_or_else(|| err(ln, 1, "expected 't<beta>_<d>: <expr>[, <expr>]'"))?;
        let lead = head.len() - head.trim_start().len();
        let label: FlowLabel = head.trim().parse().map_err(|m: String| err(ln, lead + 1, m))?;
        if rows.iter().any(|(l, _, _)| *l == label) {
            return Err(err(ln, lead + 1, format!("flow {label} defined twice")));
        }
        let body_off = head.len() + 1;
        let items = split_components(body)
            .into_iter()
            .map(|(off, piece)| parse_piece(ln, body_off + off, piece))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some((_, first_ln, first)) = rows.first() {
            if first.len() != items.len() {
                return Err(err(
                    ln,
                    body_off + 1,
                    format!("{} component(s), line {first_ln} has {}", items.len(), first.len()),
                ));
            }
        }
        rows.push((label, ln, items));
    }
    let n = rows.first().map_or(1, |(_, _, items)| items.len());
    let all: Vec<Parsed> = rows.iter_mut().flat_map(|(_, _, items)| std::mem::take(items)).collect();
    let (polys, letter) = eval_all(&all, n, ctx)?;
    let mut s = EvolutionarySystem::new(n, letter);
    for ((label, ln, _), comps) in rows.iter().zip(polys.chunks(n)) {
        let op = EvolutionaryOp::new(comps.to_vec()).map_err(|e| err(*ln, 1, e.to_string()))?;
        s.insert(*label, op).map_err(|e| err(*ln, 1, e.to_string()))?;
    }
    Ok(s)
}

/// Writes a system in the format read by [`parse_system`].
pub fn render_system(s: &EvolutionarySystem) -> String {
    let mut out = String::new();
    for (label, h) in s.flows() {
        let comps: Vec<String> = h.components().iter().map(|p| render_text(p, s.letter())).collect();
        out.push_str(&format!("{label}: {}\n", comps.join(", ")));
    }
    out
}

/// Reads a map file: line `α` is the image `ũ^α` as a polynomial in `u`.
pub fn parse_miura_map(src: &str, ctx: TruncationContext) -> Result<MiuraTransform, ParseError> {
    let items = content_lines(src)
        .map(|(ln, text)| parse_piece(ln, 0, text))
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err(err(1, 1, "empty map file"));
    }
    let first = items[0].line;
    let (images, _) = eval_all(&items, items.len(), ctx)?;
    MiuraTransform::new(images).map_err(|e| err(first, 1, e.to_string()))
}

/// Evaluates a tree in `x` and `eps` as a series without time variables.
pub fn eval_series(e: &Expr, weight: u32) -> Result<Series, String> {
    let go = |a: &Expr| eval_series(a, weight);
    Ok(match e {
        Expr::Num(q) => Series::constant(0, weight, ParamScalar::from_rational(q.clone())),
        Expr::Param(p) => Series::constant(0, weight, ParamScalar::param(*p)),
        Expr::Eps => Series::eps(0, weight),
        Expr::Symbol(s) if s == "x" => Series::x(0, weight),
        Expr::Symbol(s) => return Err(format!("unknown symbol '{s}' in a series (only x and eps)")),
        Expr::Jet(c, v, _) => return Err(format!("jet variable {c}{} in a series", v + 1)),
        Expr::Add(a, b) => &go(a)? + &go(b)?,
        Expr::Sub(a, b) => &go(a)? - &go(b)?,
        Expr::Mul(a, b) => &go(a)? * &go(b)?,
        Expr::Neg(a) => -&go(a)?,
        Expr::Pow(a, k) => go(a)?.pow(*k),
        Expr::Inv(a) => {
            let s = go(a)?;
            if !s.constant_term().is_one() {
                return Err("inv(...) requires constant term 1".into());
            }
            // 1/(1 - r) = Σ r^k with r of positive weight.
            let r = &Series::one(0, weight) - &s;
            let mut acc = Series::one(0, weight);
            let mut p = Series::one(0, weight);
            for _ in 0..weight {
                p = &p * &r;
                acc = &acc + &p;
            }
            acc
        }
    })
}

/// Reads a series file: one component per line.
pub fn parse_series_file(src: &str, weight: u32) -> Result<Vec<Series>, ParseError> {
    content_lines(src)
        .map(|(ln, text)| {
            let it = parse_piece(ln, 0, text)?;
            eval_series(&it.tree, weight).map_err(|m| err(ln, 1, m))
        })
        .collect()
}
