use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::ring::{DiffPoly, Jet, Monomial};
use crate::scalar::{fmt_rational, param_factors, ParamMono, Param, ParamScalar, Rational};

/// Output format for [`render_expr`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

pub fn render_expr(p: &DiffPoly, letter: char, format: Format) -> String {
    match format {
        Format::Text => render_text(p, letter),
        Format::Json => serde_json::to_string(&to_json(p)).expect("json"),
    }
}

fn jet_factor(letter: char, j: Jet, mult: u16) -> String {
    let mut s = format!("{}{}", letter, j.var as usize + 1);
    if j.order > 0 {
        s.push_str(&format!("[{}]", j.order));
    }
    if mult > 1 {
        s.push_str(&format!("^{}", mult));
    }
    s
}

fn monomial_factors(m: &Monomial, letter: char) -> Vec<String> {
    let mut out = Vec::new();
    match m.eps() {
        0 => {}
        1 => out.push("eps".to_string()),
        e => out.push(format!("eps^{}", e)),
    }
    for &(j, mult) in m.jets() {
        out.push(jet_factor(letter, j, mult));
    }
    out
}

/// Canonical text: one summand per (monomial, parameter monomial) pair, in
/// monomial order and then parameter order, e.g. `1/2*u1^2 + 1/12*eps^2*u1[2]`.
pub fn render_text(p: &DiffPoly, letter: char) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut s = String::new();
    let mut first = true;
    for (m, c) in p.terms() {
        let tail = monomial_factors(m, letter);
        for (pm, q) in c.terms() {
            let neg = q.is_negative();
            if first {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            first = false;
            let a = q.abs();
            let mut factors = Vec::new();
            let params = param_factors(pm);
            if !a.is_one() || (params.is_empty() && tail.is_empty()) {
                factors.push(fmt_rational(&a));
            }
            factors.extend(params);
            factors.extend(tail.iter().cloned());
            s.push_str(&factors.join("*"));
        }
    }
    s
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct JsonCoeff {
    pub xi: u16,
    #[serde(rename = "G1")]
    pub g1: u16,
    #[serde(rename = "G2")]
    pub g2: u16,
    pub q: String,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct JsonTerm {
    pub eps: i32,
    /// `[var, order, multiplicity]`, variables counted from 1.
    pub jets: Vec<[u32; 3]>,
    pub coeff: Vec<JsonCoeff>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct JsonPoly {
    pub n_vars: usize,
    pub terms: Vec<JsonTerm>,
}

pub fn to_json(p: &DiffPoly) -> JsonPoly {
    JsonPoly {
        n_vars: p.n_vars(),
        terms: p
            .terms()
            .map(|(m, c)| JsonTerm {
                eps: m.eps(),
                jets: m
                    .jets()
                    .iter()
                    .map(|(j, k)| [j.var as u32 + 1, j.order as u32, *k as u32])
                    .collect(),
                coeff: c
                    .terms()
                    .iter()
                    .map(|(pm, q)| JsonCoeff {
                        xi: pm.exp(Param::Xi),
                        g1: pm.exp(Param::G1),
                        g2: pm.exp(Param::G2),
                        q: fmt_rational(q),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Inverse of [`to_json`], into the given context.
pub fn from_json(j: &JsonPoly, ctx: crate::ring::TruncationContext) -> Result<DiffPoly, String> {
    let mut terms = Vec::new();
    for t in &j.terms {
        let m = Monomial::new(
            t.eps,
            t.jets.iter().map(|[v, o, k]| {
                (Jet::new(*v as usize - 1, *o as usize), *k as u16)
            }),
        );
        let mut cs = Vec::new();
        for c in &t.coeff {
            let q: Rational = c.q.parse().map_err(|e| format!("bad rational {}: {e}", c.q))?;
            cs.push((ParamMono([c.xi, c.g1, c.g2]), q));
        }
        terms.push((m, ParamScalar::from_terms(cs)));
    }
    Ok(DiffPoly::from_terms(j.n_vars, ctx, terms))
}
