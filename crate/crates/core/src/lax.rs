//! Pseudodifferential operators and the KdV hierarchy from its Lax operator.
//!
//! Operators are sums `Σ a_k D^k` where `D` is either `∂_x` or the scaled
//! derivation `eps ∂_x`. The KdV computations use the scaled form with
//! `L' = eps^2 L = D^2 + 2u`, which keeps every `eps` exponent non-negative so
//! that truncation in `eps` is exact; the flow is then read off as
//! `∂_x P_d = eps^{-1} [(L'^{d+1/2})_+, L'] / (2 (2d+1)!!)`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::calculus::{antiderivative, CalculusError, EvolutionaryOp, FlowLabel};
use crate::ring::{DiffPoly, TruncationContext};
use crate::scalar::{int, Param, Rational};
use crate::transforms::{reciprocal_push_flow, ReciprocalTransform, TransformError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LaxError {
    #[error("commutator has nonzero coefficient at order {0}")]
    NotOrderZero(i32),
    #[error("result has eps exponents outside the even non-negative range: {0}")]
    BadEpsPowers(String),
    #[error("requested depth {requested} is below the available depth {available}")]
    InsufficientDepth { requested: i32, available: i32 },
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Which derivation the operator powers refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// `∂_x`
    Plain,
    /// `eps ∂_x`
    Scaled,
}

/// `Σ_{k ≥ ord_min} a_k D^k` with one-variable coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoDiffOp {
    der: Derivation,
    ord_min: i32,
    ctx: TruncationContext,
    coeffs: BTreeMap<i32, DiffPoly>,
}

/// Generalized binomial coefficient `binom(n, l)` for any integer `n`.
pub fn binomial(n: i64, l: u32) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..l as i64 {
        num *= n - i;
        den *= i + 1;
    }
    Rational::new(num, den)
}

/// `(2d+1)!! = 1·3·…·(2d+1)`.
pub fn double_factorial_odd(d: u32) -> BigInt {
    (0..=d as i64).fold(BigInt::one(), |acc, i| acc * (2 * i + 1))
}

impl PseudoDiffOp {
    pub fn zero(der: Derivation, ord_min: i32, ctx: TruncationContext) -> Self {
        PseudoDiffOp {
            der,
            ord_min,
            ctx,
            coeffs: BTreeMap::new(),
        }
    }

    /// `a D^k`.
    pub fn term(der: Derivation, ord_min: i32, a: DiffPoly, k: i32) -> Self {
        let mut op = PseudoDiffOp::zero(der, ord_min, a.context());
        op.add_coeff(k, &a);
        op
    }

    /// `D^k`.
    pub fn d_pow(der: Derivation, ord_min: i32, ctx: TruncationContext, k: i32) -> Self {
        PseudoDiffOp::term(der, ord_min, DiffPoly::one(1, ctx), k)
    }

    /// Multiplication by `a`.
    pub fn mult(der: Derivation, ord_min: i32, a: DiffPoly) -> Self {
        PseudoDiffOp::term(der, ord_min, a, 0)
    }

    pub fn derivation(&self) -> Derivation {
        self.der
    }

    pub fn ord_min(&self) -> i32 {
        self.ord_min
    }

    pub fn with_ord_min(&self, ord_min: i32) -> Self {
        let mut out = self.clone();
        out.ord_min = ord_min;
        out.coeffs.retain(|k, _| *k >= ord_min);
        out
    }

    pub fn coeff(&self, k: i32) -> DiffPoly {
        self.coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| DiffPoly::zero(1, self.ctx))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i32, &DiffPoly)> {
        self.coeffs.iter().map(|(k, a)| (*k, a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_order(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    fn add_coeff(&mut self, k: i32, a: &DiffPoly) {
        if k < self.ord_min || a.is_zero() {
            return;
        }
        let sum = match self.coeffs.get(&k) {
            Some(old) => old + a,
            None => a.truncated(self.ctx),
        };
        if sum.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, sum);
        }
    }

    fn combine_meta(&self, other: &PseudoDiffOp) -> (i32, TruncationContext) {
        assert_eq!(self.der, other.der, "mixing plain and scaled operators");
        (self.ord_min.min(other.ord_min), self.ctx.meet(other.ctx))
    }

    /// Differential part `Σ_{k≥0} a_k D^k`.
    pub fn plus_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|k, _| *k >= 0);
        out
    }

    /// `Σ_{k<0} a_k D^k`.
    pub fn minus_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|k, _| *k < 0);
        out
    }

    /// `D^l a`: `∂_x^l a`, times `eps^l` in the scaled form.
    fn d_apply(&self, a: &DiffPoly, l: u32) -> DiffPoly {
        let p = a.dx_n(l as usize);
        match self.der {
            Derivation::Plain => p,
            Derivation::Scaled => p.shift_eps(l as i32),
        }
    }

    pub fn compose(&self, other: &PseudoDiffOp) -> PseudoDiffOp {
        let (ord_min, ctx) = self.combine_meta(other);
        let mut out = PseudoDiffOp::zero(self.der, ord_min, ctx);
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                // a D^i ∘ b D^j = Σ_l binom(i, l) a (D^l b) D^{i+j-l}
                let mut l = 0u32;
                loop {
                    let order = i + j - l as i32;
                    if order < ord_min || (i >= 0 && l as i32 > i) {
                        break;
                    }
                    let c = binomial(i as i64, l);
                    let db = self.d_apply(b, l);
                    if db.is_zero() {
                        break;
                    }
                    out.add_coeff(order, &(a * &db).scale(&c));
                    l += 1;
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &PseudoDiffOp) -> PseudoDiffOp {
        &self.compose(other) - &other.compose(self)
    }

    pub fn pow(&self, n: u32) -> PseudoDiffOp {
        let mut acc = PseudoDiffOp::d_pow(self.der, self.ord_min, self.ctx, 0);
        for _ in 0..n {
            acc = acc.compose(self);
        }
        acc
    }

    pub fn scale(&self, q: &Rational) -> PseudoDiffOp {
        let mut out = self.clone();
        for a in out.coeffs.values_mut() {
            *a = a.scale(q);
        }
        out
    }
}

impl Add for &PseudoDiffOp {
    type Output = PseudoDiffOp;
    fn add(self, rhs: &PseudoDiffOp) -> PseudoDiffOp {
        let (ord_min, ctx) = self.combine_meta(rhs);
        let mut out = PseudoDiffOp::zero(self.der, ord_min, ctx);
        for (k, a) in self.coeffs.iter().chain(rhs.coeffs.iter()) {
            out.add_coeff(*k, a);
        }
        out
    }
}

impl Sub for &PseudoDiffOp {
    type Output = PseudoDiffOp;
    fn sub(self, rhs: &PseudoDiffOp) -> PseudoDiffOp {
        self + &rhs.scale(&int(-1))
    }
}

impl Mul for &PseudoDiffOp {
    type Output = PseudoDiffOp;
    fn mul(self, rhs: &PseudoDiffOp) -> PseudoDiffOp {
        self.compose(rhs)
    }
}

/// Which arithmetic [`pdo_arith`] performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdoOp {
    Add,
    Mul,
    Commutator,
}

pub fn pdo_arith(a: &PseudoDiffOp, b: &PseudoDiffOp, which: PdoOp) -> PseudoDiffOp {
    match which {
        PdoOp::Add => a + b,
        PdoOp::Mul => a.compose(b),
        PdoOp::Commutator => a.commutator(b),
    }
}

/// The scaled Lax operator `L' = D^2 + 2u`, `D = eps ∂_x`.
pub fn lax_operator(ctx: TruncationContext, ord_min: i32) -> PseudoDiffOp {
    let u2 = DiffPoly::var(1, ctx, 0).scale(&int(2));
    &PseudoDiffOp::d_pow(Derivation::Scaled, ord_min, ctx, 2) + &PseudoDiffOp::mult(Derivation::Scaled, ord_min, u2)
}

/// The square root `M = D + Σ_{k≤0} a_k D^k` of a monic second-order operator,
/// down to order `depth`, by matching coefficients from the top. `M^2 = L`
/// holds for all orders above `depth`.
pub fn sqrt_l(l: &PseudoDiffOp, depth: i32) -> Result<PseudoDiffOp, LaxError> {
    if depth < l.ord_min() {
        return Err(LaxError::InsufficientDepth {
            requested: depth,
            available: l.ord_min(),
        });
    }
    let l = l.with_ord_min(depth);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut m = PseudoDiffOp::d_pow(l.der, depth, l.ctx, 1);
    for k in (depth..=0).rev() {
        let residual = &l - &m.compose(&m);
        let a = residual.coeff(k + 1).scale(&half);
        m = &m + &PseudoDiffOp::term(l.der, depth, a, k);
    }
    Ok(m)
}

/// `P_d^KdV`, normalized by `P_d|_{u=0} = 0`.
pub fn kdv_flow(d: u32, ctx: TruncationContext) -> Result<DiffPoly, LaxError> {
    // One extra eps power because the commutator is divided by eps.
    let work = ctx.with_eps(ctx.eps_max + 1);
    let ord_min = -(2 * d as i32 + 3);
    let l = lax_operator(work, ord_min);
    let m = sqrt_l(&l, ord_min)?;
    let a_plus = m.pow(2 * d + 1).plus_part();
    let comm = a_plus.commutator(&l.plus_part());
    if let Some((k, _)) = comm.coeffs().find(|(k, _)| *k != 0) {
        return Err(LaxError::NotOrderZero(k));
    }
    let c0 = comm.coeff(0);
    if c0.min_eps().is_some_and(|e| e < 1) {
        return Err(LaxError::BadEpsPowers(c0.to_string()));
    }
    let denom = int(2) * Rational::from_integer(double_factorial_odd(d));
    let dp = c0.shift_eps(-1).scale(&(Rational::one() / denom)).with_context(ctx);
    if dp.terms().any(|(mono, _)| mono.eps() < 0 || mono.eps() % 2 != 0) {
        return Err(LaxError::BadEpsPowers(dp.to_string()));
    }
    let p = antiderivative(&dp)?;
    debug_assert!(p.is_homogeneous(0));
    Ok(p)
}

/// Convenience wrapper: `∂_x P_d^KdV`.
pub fn kdv_flow_dx(d: u32, ctx: TruncationContext) -> Result<DiffPoly, LaxError> {
    Ok(kdv_flow(d, ctx)?.dx())
}

/// `P_d^{ξ-KdV}` in the variable `v`: the KdV flow `∂_x P_d` pushed through
/// the reciprocal transformation with conservation law `ξu`, then integrated
/// in `y`.
pub fn xi_kdv_flow(d: u32, ctx: TruncationContext) -> Result<DiffPoly, LaxError> {
    let h = EvolutionaryOp::new(vec![kdv_flow_dx(d, ctx)?])?;
    let xi_u = &DiffPoly::param(1, ctx, Param::Xi) * &DiffPoly::var(1, ctx, 0);
    let f = ReciprocalTransform::new(xi_u)?;
    let (pushed, _) = reciprocal_push_flow(&f, &h, FlowLabel::new(1, d))?;
    Ok(antiderivative(pushed.component(0))?)
}

pub fn factorial(n: u32) -> Rational {
    Rational::from_integer((1..=n as i64).fold(BigInt::one(), |acc, i| acc * i))
}

/// `u^n / n!` as a one-variable polynomial.
pub fn u_pow_over_factorial(n: u32, ctx: TruncationContext) -> DiffPoly {
    DiffPoly::var(1, ctx, 0).pow(n).scale(&(Rational::one() / factorial(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::text::render_text;

    fn c() -> TruncationContext {
        TruncationContext::new(6, 6)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), int(10));
        assert_eq!(binomial(-1, 3), int(-1));
        assert_eq!(binomial(-2, 2), int(3));
        assert_eq!(double_factorial_odd(2), BigInt::from(15));
    }

    #[test]
    fn commutator_with_d() {
        let a = DiffPoly::var(1, c(), 0).pow(2);
        let d = PseudoDiffOp::d_pow(Derivation::Plain, -4, c(), 1);
        let ma = PseudoDiffOp::mult(Derivation::Plain, -4, a.clone());
        let comm = d.commutator(&ma);
        assert_eq!(comm, PseudoDiffOp::mult(Derivation::Plain, -4, a.dx()));
        let l = lax_operator(c(), -4);
        assert!(l.commutator(&l).is_zero());
    }

    #[test]
    fn square_with_inverse_term() {
        // (∂ + u∂^{-1})^2 = ∂^2 + 2u + u_x ∂^{-1} + u^2 ∂^{-2} - u u_x ∂^{-3} + …
        let u = DiffPoly::var(1, c(), 0);
        let op = &PseudoDiffOp::d_pow(Derivation::Plain, -2, c(), 1)
            + &PseudoDiffOp::term(Derivation::Plain, -2, u.clone(), -1);
        let sq = op.compose(&op);
        assert_eq!(sq.coeff(2), DiffPoly::one(1, c()));
        assert!(sq.coeff(1).is_zero());
        assert_eq!(sq.coeff(0), u.scale(&int(2)));
        assert_eq!(sq.coeff(-1), u.dx());
        assert_eq!(sq.coeff(-2), u.pow(2));
    }

    #[test]
    fn sqrt_coefficients() {
        let l = lax_operator(c(), -6);
        let m = sqrt_l(&l, -6).unwrap();
        assert!(m.coeff(0).is_zero());
        assert_eq!(m.coeff(-1), DiffPoly::var(1, c(), 0));
        let ux = DiffPoly::jet(1, c(), 0, 1);
        assert_eq!(m.coeff(-2), ux.shift_eps(1).scale(&rat(-1, 2)));
        assert!((&m.compose(&m) - &l).with_ord_min(-5).is_zero());
    }

    #[test]
    fn first_flows() {
        assert_eq!(render_text(&kdv_flow(0, c()).unwrap(), 'u'), "u1");
        assert_eq!(render_text(&kdv_flow(1, c()).unwrap(), 'u'), "1/2*u1^2 + 1/12*eps^2*u1[2]");
        assert_eq!(
            render_text(&kdv_flow(2, c()).unwrap(), 'u'),
            "1/6*u1^3 + 1/12*eps^2*u1*u1[2] + 1/24*eps^2*u1[1]^2 + 1/240*eps^4*u1[4]"
        );
    }

    #[test]
    fn xi_kdv_examples() {
        let ctx = TruncationContext::new(4, 6);
        assert_eq!(render_text(&xi_kdv_flow(0, ctx).unwrap(), 'v'), "v1");
        let v = DiffPoly::var(1, ctx, 0);
        let xi = DiffPoly::param(1, ctx, Param::Xi);
        let unit = &DiffPoly::one(1, ctx) + &(&xi * &v);
        let expected = &(&v.pow(2).scale(&rat(1, 2)) + &(&xi * &v.pow(3)).scale(&rat(1, 6)))
            + &(&unit.pow(3) * &DiffPoly::jet(1, ctx, 0, 2).shift_eps(2)).scale(&rat(1, 12));
        assert_eq!(xi_kdv_flow(1, ctx).unwrap(), expected);
        assert_eq!(xi_kdv_flow(2, ctx).unwrap().specialize(Param::Xi, &int(0)), kdv_flow(2, ctx).unwrap());
    }
}
