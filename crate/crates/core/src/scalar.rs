//! Exact coefficients: rational polynomials in the formal parameters `xi`, `G1`, `G2`.
//!
//! The parameters are never specialized to numbers during a computation, so a
//! single run covers the whole three-parameter family. They are also never
//! inverted: a `ParamScalar` is a polynomial, not a rational function.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Rational number with arbitrary precision.
pub type Rational = BigRational;

/// Builds a rational `num/den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// One of the three formal parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Xi,
    G1,
    G2,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::Xi, Param::G1, Param::G2];

    pub fn index(self) -> usize {
        match self {
            Param::Xi => 0,
            Param::G1 => 1,
            Param::G2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::Xi => "xi",
            Param::G1 => "G1",
            Param::G2 => "G2",
        }
    }

    pub fn from_name(s: &str) -> Option<Param> {
        match s {
            "xi" => Some(Param::Xi),
            "G1" => Some(Param::G1),
            "G2" => Some(Param::G2),
            _ => None,
        }
    }
}

/// Exponent vector `(xi, G1, G2)` of a parameter monomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ParamMono(pub [u16; 3]);

impl ParamMono {
    pub const ONE: ParamMono = ParamMono([0, 0, 0]);

    pub fn of(p: Param, e: u16) -> Self {
        let mut m = [0; 3];
        m[p.index()] = e;
        ParamMono(m)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exp(&self, p: Param) -> u16 {
        self.0[p.index()]
    }

    fn mul(self, other: ParamMono) -> ParamMono {
        ParamMono([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    fn divides(&self, other: &ParamMono) -> bool {
        (0..3).all(|i| self.0[i] <= other.0[i])
    }
}

impl Ord for ParamMono {
    /// Graded by total degree, then lexicographic in `(xi, G1, G2)`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for ParamMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite sum `Σ q · xi^a G1^b G2^c` with `q` rational.
///
/// Terms are kept sorted by [`ParamMono`] order with no zero coefficients, so
/// structural equality is mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ParamScalar {
    terms: Vec<(ParamMono, Rational)>,
}

impl ParamScalar {
    pub fn zero() -> Self {
        ParamScalar { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ParamScalar {
            terms: vec![(ParamMono::ONE, q)],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(int(n))
    }

    pub fn param(p: Param) -> Self {
        Self::monomial(Rational::one(), ParamMono::of(p, 1))
    }

    pub fn monomial(q: Rational, m: ParamMono) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ParamScalar { terms: vec![(m, q)] }
    }

    /// Builds from arbitrary (possibly repeated, possibly zero) terms.
    pub fn from_terms<I: IntoIterator<Item = (ParamMono, Rational)>>(it: I) -> Self {
        let mut terms: Vec<(ParamMono, Rational)> = it.into_iter().collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(ParamMono, Rational)> = Vec::with_capacity(terms.len());
        for (m, q) in terms {
            match out.last_mut() {
                Some((lm, lq)) if *lm == m => *lq += q,
                _ => out.push((m, q)),
            }
        }
        out.retain(|(_, q)| !q.is_zero());
        ParamScalar { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == ParamMono::ONE && self.terms[0].1.is_one()
    }

    pub fn terms(&self) -> &[(ParamMono, Rational)] {
        &self.terms
    }

    /// The value as a plain rational, if no parameter occurs.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, q)] if *m == ParamMono::ONE => Some(q.clone()),
            _ => None,
        }
    }

    /// The parameter-free part.
    pub fn constant_part(&self) -> Rational {
        self.terms
            .iter()
            .find(|(m, _)| *m == ParamMono::ONE)
            .map(|(_, q)| q.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ParamScalar {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, c * q))
                .collect(),
        }
    }

    /// Multiplies by a parameter monomial.
    pub fn shift(&self, by: ParamMono) -> Self {
        ParamScalar {
            terms: self.terms.iter().map(|(m, c)| (m.mul(by), c.clone())).collect(),
        }
    }

    /// Exact division by `q · mono`; `None` if some term is not divisible.
    pub fn div_exact(&self, q: &Rational, mono: ParamMono) -> Option<Self> {
        if q.is_zero() {
            return None;
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            if !mono.divides(m) {
                return None;
            }
            let mut e = m.0;
            for i in 0..3 {
                e[i] -= mono.0[i];
            }
            terms.push((ParamMono(e), c / q));
        }
        Some(ParamScalar::from_terms(terms))
    }

    /// Substitutes a rational value for one parameter.
    pub fn specialize(&self, p: Param, value: &Rational) -> Self {
        ParamScalar::from_terms(self.terms.iter().map(|(m, c)| {
            let e = m.exp(p);
            let mut rest = *m;
            rest.0[p.index()] = 0;
            let mut factor = Rational::one();
            for _ in 0..e {
                factor *= value;
            }
            (rest, c * factor)
        }))
    }

    /// Substitutes `p ↦ p · other_mono` (used by the `eps^2 ↦ G eps^2` rescaling).
    pub fn mul_param_pow(&self, p: Param, e: u16) -> Self {
        self.shift(ParamMono::of(p, e))
    }

    /// Negates the coefficient of one term; used for fault injection.
    pub fn flip_term(&self, index: usize) -> Self {
        let mut out = self.clone();
        if let Some((_, q)) = out.terms.get_mut(index) {
            *q = -q.clone();
        }
        out
    }
}

impl From<Rational> for ParamScalar {
    fn from(q: Rational) -> Self {
        ParamScalar::from_rational(q)
    }
}

impl From<i64> for ParamScalar {
    fn from(n: i64) -> Self {
        ParamScalar::from_int(n)
    }
}

impl<'a> Add<&'a ParamScalar> for &'a ParamScalar {
    type Output = ParamScalar;
    fn add(self, rhs: &ParamScalar) -> ParamScalar {
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < rhs.terms.len() {
            let (ma, qa) = &self.terms[i];
            let (mb, qb) = &rhs.terms[j];
            match ma.cmp(mb) {
                Ordering::Less => {
                    out.push((*ma, qa.clone()));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((*mb, qb.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let s = qa + qb;
                    if !s.is_zero() {
                        out.push((*ma, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&rhs.terms[j..]);
        ParamScalar { terms: out }
    }
}

impl<'a> Sub<&'a ParamScalar> for &'a ParamScalar {
    type Output = ParamScalar;
    fn sub(self, rhs: &ParamScalar) -> ParamScalar {
        self + &(-rhs)
    }
}

impl Neg for &ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        ParamScalar {
            terms: self.terms.iter().map(|(m, q)| (*m, -q.clone())).collect(),
        }
    }
}

impl Neg for ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        -&self
    }
}

impl<'a> Mul<&'a ParamScalar> for &'a ParamScalar {
    type Output = ParamScalar;
    fn mul(self, rhs: &ParamScalar) -> ParamScalar {
        if self.terms.len() == 1 && rhs.terms.len() == 1 {
            let (ma, qa) = &self.terms[0];
            let (mb, qb) = &rhs.terms[0];
            return ParamScalar {
                terms: vec![(ma.mul(*mb), qa * qb)],
            };
        }
        let mut prods = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, qa) in &self.terms {
            for (mb, qb) in &rhs.terms {
                prods.push((ma.mul(*mb), qa * qb));
            }
        }
        ParamScalar::from_terms(prods)
    }
}

impl AddAssign<&ParamScalar> for ParamScalar {
    fn add_assign(&mut self, rhs: &ParamScalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&ParamScalar> for ParamScalar {
    fn sub_assign(&mut self, rhs: &ParamScalar) {
        *self = &*self - rhs;
    }
}

/// Writes a rational as `p` or `p/q`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Factors of a parameter monomial, e.g. `["xi^2", "G1"]`.
pub(crate) fn param_factors(m: &ParamMono) -> Vec<String> {
    let mut out = Vec::new();
    for p in Param::ALL {
        match m.exp(p) {
            0 => {}
            1 => out.push(p.name().to_string()),
            e => out.push(format!("{}^{}", p.name(), e)),
        }
    }
    out
}

impl fmt::Display for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            if i > 0 {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            } else if neg {
                write!(f, "-")?;
            }
            let a = q.abs();
            let mut factors = Vec::new();
            if !a.is_one() || *m == ParamMono::ONE {
                factors.push(fmt_rational(&a));
            }
            factors.extend(param_factors(m));
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
