//! The algebra of differential polynomials under explicit truncation.
//!
//! A [`DiffPoly`] is a finite sum of [`Monomial`]s in the jet variables
//! `u^α_k` and `eps`, with [`ParamScalar`] coefficients. Every value carries a
//! [`TruncationContext`]: terms with `eps` exponent above `eps_max` or total
//! `u`-degree above `deg_max` are dropped. Both gradings are respected by
//! products and by `∂_x`, so every stored term is exact as long as the inputs
//! were exact in the same range.

mod monomial;
mod ops;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

pub use monomial::{Jet, Monomial};
pub use ops::{prolongation, substitute, substitute_jets};

use crate::scalar::{Param, ParamMono, ParamScalar, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("variable count mismatch: {0} vs {1}")]
    VarCountMismatch(usize, usize),
    #[error("constant term is not a nonzero rational, cannot invert")]
    NotInvertible,
    #[error("substitution image for {0} does not vanish at the origin")]
    ImageNotVanishing(String),
    #[error("odd power of eps in {0}, cannot rescale eps^2")]
    OddEpsPower(String),
    #[error("coefficient not divisible by {0}")]
    NotDivisible(String),
    #[error("polynomial depends on variables other than #{0}")]
    ForeignVariable(usize),
}

/// Bounds on stored terms: `eps` exponent `≤ eps_max`, `u`-degree `≤ deg_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct TruncationContext {
    pub eps_max: u32,
    pub deg_max: u32,
}

impl TruncationContext {
    pub fn new(eps_max: u32, deg_max: u32) -> Self {
        TruncationContext { eps_max, deg_max }
    }

    pub fn meet(self, other: TruncationContext) -> TruncationContext {
        TruncationContext {
            eps_max: self.eps_max.min(other.eps_max),
            deg_max: self.deg_max.min(other.deg_max),
        }
    }

    pub fn admits(&self, m: &Monomial) -> bool {
        m.eps() <= self.eps_max as i32 && m.u_degree() <= self.deg_max
    }

    pub fn with_deg(self, deg_max: u32) -> Self {
        TruncationContext { deg_max, ..self }
    }

    pub fn with_eps(self, eps_max: u32) -> Self {
        TruncationContext { eps_max, ..self }
    }
}

/// Element of the truncated differential-polynomial ring in `n_vars` variables.
#[derive(Clone, Debug)]
pub struct DiffPoly {
    n_vars: usize,
    ctx: TruncationContext,
    terms: BTreeMap<Monomial, ParamScalar>,
}

impl PartialEq for DiffPoly {
    fn eq(&self, other: &Self) -> bool {
        self.n_vars == other.n_vars && self.terms == other.terms
    }
}

impl Eq for DiffPoly {}

impl DiffPoly {
    pub fn zero(n_vars: usize, ctx: TruncationContext) -> Self {
        DiffPoly {
            n_vars,
            ctx,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        n_vars: usize,
        ctx: TruncationContext,
        terms: impl IntoIterator<Item = (Monomial, ParamScalar)>,
    ) -> Self {
        let mut p = DiffPoly::zero(n_vars, ctx);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn constant(n_vars: usize, ctx: TruncationContext, c: impl Into<ParamScalar>) -> Self {
        DiffPoly::from_terms(n_vars, ctx, [(Monomial::one(), c.into())])
    }

    pub fn one(n_vars: usize, ctx: TruncationContext) -> Self {
        DiffPoly::constant(n_vars, ctx, ParamScalar::one())
    }

    /// The jet variable `u^var_order`.
    pub fn jet(n_vars: usize, ctx: TruncationContext, var: usize, order: usize) -> Self {
        assert!(var < n_vars, "variable {var} out of range for {n_vars} variables");
        DiffPoly::from_terms(
            n_vars,
            ctx,
            [(Monomial::jet(Jet::new(var, order)), ParamScalar::one())],
        )
    }

    pub fn var(n_vars: usize, ctx: TruncationContext, var: usize) -> Self {
        DiffPoly::jet(n_vars, ctx, var, 0)
    }

    pub fn eps_pow(n_vars: usize, ctx: TruncationContext, e: i32) -> Self {
        DiffPoly::from_terms(n_vars, ctx, [(Monomial::eps_pow(e), ParamScalar::one())])
    }

    pub fn param(n_vars: usize, ctx: TruncationContext, p: Param) -> Self {
        DiffPoly::constant(n_vars, ctx, ParamScalar::param(p))
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn context(&self) -> TruncationContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ParamScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> ParamScalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: &ParamScalar) {
        if c.is_zero() || !self.ctx.admits(&m) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    fn check_vars(&self, other: &DiffPoly) -> Result<(), RingError> {
        if self.n_vars != other.n_vars {
            return Err(RingError::VarCountMismatch(self.n_vars, other.n_vars));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &DiffPoly) -> Result<DiffPoly, RingError> {
        self.check_vars(other)?;
        let mut out = self.truncated(other.ctx);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &DiffPoly) -> Result<DiffPoly, RingError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &DiffPoly) -> Result<DiffPoly, RingError> {
        self.check_vars(other)?;
        let ctx = self.ctx.meet(other.ctx);
        let mut acc: BTreeMap<Monomial, ParamScalar> = BTreeMap::new();
        let emax = ctx.eps_max as i32;
        let dmax = ctx.deg_max;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.eps() + mb.eps() > emax || ma.u_degree() + mb.u_degree() > dmax {
                    continue;
                }
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.get_mut(&m) {
                    Some(e) => *e += &c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(DiffPoly {
            n_vars: self.n_vars,
            ctx,
            terms: acc,
        })
    }

    pub fn scalar_mul(&self, s: &ParamScalar) -> DiffPoly {
        self.map_coeffs(|c| c * s)
    }

    pub fn scale(&self, q: &Rational) -> DiffPoly {
        self.map_coeffs(|c| c.scale(q))
    }

    pub fn map_coeffs(&self, f: impl Fn(&ParamScalar) -> ParamScalar) -> DiffPoly {
        let mut out = DiffPoly::zero(self.n_vars, self.ctx);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut acc = DiffPoly::one(self.n_vars, self.ctx);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Drops terms outside `ctx ∧ self.ctx`.
    pub fn truncated(&self, ctx: TruncationContext) -> DiffPoly {
        let ctx = self.ctx.meet(ctx);
        DiffPoly {
            n_vars: self.n_vars,
            ctx,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| ctx.admits(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Replaces the context without dropping or adding terms other than those
    /// outside the new bounds. Widening is only sound when the caller knows the
    /// polynomial is exact in the wider range, e.g. for closed-form polynomials.
    pub fn with_context(&self, ctx: TruncationContext) -> DiffPoly {
        let mut out = DiffPoly::zero(self.n_vars, ctx);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    /// The terms with `eps` exponent exactly `e`, kept as they are.
    pub fn eps_component(&self, e: i32) -> DiffPoly {
        self.filter(|m| m.eps() == e)
    }

    /// The `eps^0` part.
    pub fn dispersionless(&self) -> DiffPoly {
        self.eps_component(0)
    }

    /// The terms of `u`-degree exactly `d`.
    pub fn u_degree_component(&self, d: u32) -> DiffPoly {
        self.filter(|m| m.u_degree() == d)
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> DiffPoly {
        DiffPoly {
            n_vars: self.n_vars,
            ctx: self.ctx,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Multiplies every term by `eps^shift`.
    pub fn shift_eps(&self, shift: i32) -> DiffPoly {
        let mut out = DiffPoly::zero(self.n_vars, self.ctx);
        for (m, c) in &self.terms {
            out.add_term(m.with_eps(m.eps() + shift), c);
        }
        out
    }

    /// Value at `u^*_* = 0` (all `eps`-only terms).
    pub fn at_origin(&self) -> DiffPoly {
        self.filter(|m| m.u_degree() == 0)
    }

    pub fn vanishes_at_origin(&self) -> bool {
        self.terms.keys().all(|m| m.u_degree() > 0)
    }

    /// The coefficient of the empty monomial.
    pub fn constant_term(&self) -> ParamScalar {
        self.coeff(&Monomial::one())
    }

    pub fn max_order(&self, var: usize) -> Option<usize> {
        self.terms
            .keys()
            .filter_map(|m| m.max_order(var))
            .max()
            .map(|o| o as usize)
    }

    /// All jet variables occurring in some term.
    pub fn jets_present(&self) -> std::collections::BTreeSet<Jet> {
        self.terms
            .keys()
            .flat_map(|m| m.jets().iter().map(|(j, _)| *j))
            .collect()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.max_order(var).is_some()
    }

    pub fn min_eps(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.eps()).min()
    }

    pub fn max_eps(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.eps()).max()
    }

    pub fn max_u_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.u_degree()).max()
    }

    /// Sum of terms of differential degree `d`.
    pub fn degree_component(&self, d: i64) -> DiffPoly {
        self.filter(|m| m.diff_degree() == d)
    }

    pub fn is_homogeneous(&self, d: i64) -> bool {
        self.terms.keys().all(|m| m.diff_degree() == d)
    }

    /// Substitutes a rational value for a parameter.
    pub fn specialize(&self, p: Param, value: &Rational) -> DiffPoly {
        self.map_coeffs(|c| c.specialize(p, value))
    }

    /// `eps ↦ sqrt(G) eps`, realized as `eps^2 ↦ G eps^2`.
    pub fn rescale_eps(&self, g: Param) -> Result<DiffPoly, RingError> {
        let mut out = DiffPoly::zero(self.n_vars, self.ctx);
        for (m, c) in &self.terms {
            if m.eps().rem_euclid(2) != 0 || m.eps() < 0 {
                return Err(RingError::OddEpsPower(self.to_string()));
            }
            out.add_term(m.clone(), &c.mul_param_pow(g, (m.eps() / 2) as u16));
        }
        Ok(out)
    }

    /// Exact division by `q · mono`.
    pub fn div_exact(&self, q: &Rational, mono: ParamMono) -> Result<DiffPoly, RingError> {
        let mut out = DiffPoly::zero(self.n_vars, self.ctx);
        for (m, c) in &self.terms {
            let d = c
                .div_exact(q, mono)
                .ok_or_else(|| RingError::NotDivisible(ParamScalar::monomial(q.clone(), mono).to_string()))?;
            out.add_term(m.clone(), &d);
        }
        Ok(out)
    }

    /// Re-expresses in `n_new` variables with `map[old] = new`.
    pub fn embed(&self, n_new: usize, map: &[usize]) -> DiffPoly {
        assert_eq!(map.len(), self.n_vars);
        let mut out = DiffPoly::zero(n_new, self.ctx);
        for (m, c) in &self.terms {
            out.add_term(m.remap_vars(map), c);
        }
        out
    }

    /// Views a polynomial depending only on variable `var` as a one-variable
    /// polynomial.
    pub fn restrict_to(&self, var: usize) -> Result<DiffPoly, RingError> {
        for m in self.terms.keys() {
            if m.jets().iter().any(|(j, _)| j.var as usize != var) {
                return Err(RingError::ForeignVariable(var));
            }
        }
        let mut map = vec![0; self.n_vars];
        map[var] = 0;
        Ok(self.embed(1, &map))
    }

    /// Negates the coefficient of one parameter term of one monomial.
    pub fn flip_coefficient(&self, term: usize, param_term: usize) -> DiffPoly {
        let mut out = self.clone();
        if let Some((m, c)) = self.terms.iter().nth(term) {
            out.terms.insert(m.clone(), c.flip_term(param_term));
        }
        out
    }

    /// Multiplicative inverse of a unit `c + (terms vanishing at the origin)`,
    /// `c` a nonzero rational, by the geometric series. Exact to truncation.
    pub fn invert_unit(&self) -> Result<DiffPoly, RingError> {
        let c0 = self
            .constant_term()
            .as_rational()
            .filter(|q| !q.is_zero())
            .ok_or(RingError::NotInvertible)?;
        // a = c0 (1 + n), n without constant term
        let inv_c0 = Rational::one() / &c0;
        let mut n = self.scale(&inv_c0);
        n.add_term(Monomial::one(), &ParamScalar::from_rational(-Rational::one()));
        // Terms with eps < 0 or a degree-0 eps part would break termination.
        if n.terms.keys().any(|m| m.u_degree() == 0 && m.eps() <= 0) {
            return Err(RingError::NotInvertible);
        }
        let one = DiffPoly::one(self.n_vars, self.ctx);
        let mut acc = one.clone();
        let mut power = one;
        let steps = self.ctx.deg_max + self.ctx.eps_max + 1;
        for _ in 0..steps {
            power = &power * &(-&n);
            if power.is_zero() {
                break;
            }
            acc = &acc + &power;
        }
        Ok(acc.scale(&inv_c0))
    }

    pub fn inv(&self) -> DiffPoly {
        self.invert_unit().expect("invert_unit on a non-unit")
    }
}

impl<'a> Add<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_add(rhs).expect("DiffPoly addition")
    }
}

impl<'a> Sub<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_sub(rhs).expect("DiffPoly subtraction")
    }
}

impl<'a> Mul<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_mul(rhs).expect("DiffPoly multiplication")
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.map_coeffs(|c| -c)
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: DiffPoly) -> DiffPoly {
        &self + &rhs
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: DiffPoly) -> DiffPoly {
        &self - &rhs
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

/// Which ring operation [`arith`] performs.
#[derive(Clone, Debug)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    ScalarMul(ParamScalar),
}

/// Fallible entry point for the ring operations; the operator impls panic on
/// a variable-count mismatch instead.
pub fn arith(p: &DiffPoly, q: &DiffPoly, which: ArithOp) -> Result<DiffPoly, RingError> {
    match which {
        ArithOp::Add => p.try_add(q),
        ArithOp::Sub => p.try_sub(q),
        ArithOp::Mul => p.try_mul(q),
        ArithOp::ScalarMul(s) => Ok(p.scalar_mul(&s)),
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::render_text(self, 'u'))
    }
}
