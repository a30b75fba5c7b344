//! The rank-2 family of F-CohFTs without unit obtained from the trivial
//! theory with parameters `G = (G1, G2)` by the R-matrix `Id + R_1 z`,
//! `R_1 = ((0, xi), (0, 0))`, and the reconstruction of its DR hierarchy.
//!
//! Everything is exact and symbolic in `xi`, `G1`, `G2`. The DR flows are
//! not computed from the moduli space: the hierarchy is assembled from its
//! primary flows, the `ũ²` equations, the dispersionless recursion and the
//! uniqueness lemma.

mod verify;

use thiserror::Error;

use crate::calculus::{CalculusError, EvolutionaryOp, EvolutionarySystem, FlowLabel};
use crate::lax::{kdv_flow_dx, xi_kdv_flow, LaxError};
use crate::ring::{substitute, DiffPoly, Jet, Monomial, RingError, TruncationContext};
use crate::scalar::{int, rat, Param};
use crate::transforms::{MiuraTransform, TransformError};

pub use verify::{
    target_system, verify_theorem, verify_theorem_with, CheckResult, Difference, FaultInjection, VerificationReport,
    VerifyOptions,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DrError {
    #[error("{what}: difference {difference}")]
    Mismatch { what: String, difference: String },
    #[error("the 1-form for {0} is not closed")]
    ClosednessViolation(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Lax(#[from] LaxError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

fn mismatch(what: impl Into<String>, diff: &DiffPoly) -> DrError {
    DrError::Mismatch {
        what: what.into(),
        difference: diff.to_string(),
    }
}

fn ensure_equal(what: &str, got: &DiffPoly, expected: &DiffPoly) -> Result<(), DrError> {
    let diff = got - expected;
    if diff.is_zero() {
        Ok(())
    } else {
        Err(mismatch(what, &diff))
    }
}

/// The symbolic family together with the truncation used to compute with it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub ctx: TruncationContext,
    /// Specialize `xi = 0`, the decoupled pair of KdV hierarchies.
    pub xi_zero: bool,
}

impl FamilySpec {
    pub fn new(ctx: TruncationContext) -> Self {
        FamilySpec { ctx, xi_zero: false }
    }

    pub fn with_xi_zero(self, xi_zero: bool) -> Self {
        FamilySpec { xi_zero, ..self }
    }

    pub fn with_ctx(self, ctx: TruncationContext) -> Self {
        FamilySpec { ctx, ..self }
    }

    /// Applies the `xi = 0` specialization when requested.
    pub fn fix(&self, p: &DiffPoly) -> DiffPoly {
        if self.xi_zero {
            p.specialize(Param::Xi, &int(0))
        } else {
            p.clone()
        }
    }

    fn var(&self, a: usize) -> DiffPoly {
        DiffPoly::var(2, self.ctx, a)
    }

    fn xi(&self) -> DiffPoly {
        if self.xi_zero {
            DiffPoly::zero(2, self.ctx)
        } else {
            DiffPoly::param(2, self.ctx, Param::Xi)
        }
    }

    /// `1/(1 + xi u²)` as a series.
    fn inv_unit(&self) -> DiffPoly {
        (&DiffPoly::one(2, self.ctx) + &(&self.xi() * &self.var(1))).inv()
    }

    /// `ū¹ = (u¹ + xi (u²)²/2)/(1 + xi u²)` in terms of `u`.
    pub fn u_bar1(&self) -> DiffPoly {
        let num = &self.var(0) + &(&self.xi() * &self.var(1).pow(2)).scale(&rat(1, 2));
        &num * &self.inv_unit()
    }
}

/// `F¹, F²` and the matrices `C_γ = (∂²F^α/∂u^β∂u^γ)_{α,β}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Genus0Data {
    pub f1: DiffPoly,
    pub f2: DiffPoly,
    /// `c[γ][α][β]`.
    pub c: [[[DiffPoly; 2]; 2]; 2],
}

/// `F¹` in the simplified closed form.
pub fn f1_closed_form(fam: &FamilySpec) -> DiffPoly {
    let u1 = fam.var(0);
    let u2 = fam.var(1);
    let xi = fam.xi();
    let four_plus = &DiffPoly::constant(2, fam.ctx, int(4)) + &(&xi * &u2);
    let num = &(&u1.pow(2).scale(&rat(1, 2)) + &(&(&u1 * &xi) * &u2.pow(2)).scale(&rat(1, 2)))
        - &(&(&xi * &u2.pow(3)) * &four_plus).scale(&rat(1, 24));
    &num * &fam.inv_unit()
}

/// `F¹` as the sum of the four stable-tree contributions.
pub fn f1_tree_sum(fam: &FamilySpec) -> DiffPoly {
    let u1 = fam.var(0);
    let u2 = fam.var(1);
    let xi = fam.xi();
    let inv = fam.inv_unit();
    let a = &u1.pow(2).scale(&rat(1, 2)) * &inv;
    let b = &(&(&u1 * &xi) * &u2.pow(2)).scale(&rat(1, 2)) * &inv;
    let c = &(&xi.pow(2) * &u2.pow(4)).scale(&rat(1, 8)) * &inv;
    let d = (&xi * &u2.pow(3)).scale(&rat(1, 6));
    &(&(&a + &b) + &c) - &d
}

/// Genus-0 potentials, checked against the tree sum. `F` is computed two
/// degrees deeper than `fam.ctx` so that `C_γ` is exact in `fam.ctx`.
pub fn genus0_potentials(fam: &FamilySpec) -> Result<Genus0Data, DrError> {
    let deep = fam.with_ctx(fam.ctx.with_deg(fam.ctx.deg_max + 2));
    let f1 = f1_closed_form(&deep);
    ensure_equal("F1 closed form against the tree sum", &f1, &f1_tree_sum(&deep))?;
    let f2 = deep.var(1).pow(2).scale(&rat(1, 2));
    let f = [&f1, &f2];
    let c = std::array::from_fn(|g| {
        std::array::from_fn(|a| std::array::from_fn(|b| f[a].partial(b, 0).partial(g, 0).truncated(fam.ctx)))
    });
    Ok(Genus0Data {
        f1: f1.truncated(fam.ctx),
        f2: f2.truncated(fam.ctx),
        c,
    })
}

/// The displayed `C_1, C_2` in the variables `ū`, pulled back to `u`.
pub fn structure_constants_displayed(fam: &FamilySpec) -> Result<[[[DiffPoly; 2]; 2]; 2], DrError> {
    let ub1 = fam.var(0);
    let ub2 = fam.var(1);
    let xi = fam.xi();
    let inv = fam.inv_unit();
    let zero = DiffPoly::zero(2, fam.ctx);
    let one = DiffPoly::one(2, fam.ctx);
    let diff21 = &(&xi * &(&ub2 - &ub1)) * &inv;
    let c1 = [[inv.clone(), diff21.clone()], [zero.clone(), zero.clone()]];
    let c2_12 = &(&(&xi * &(&ub1 - &ub2)) * &(&one + &(&xi * &ub1))) * &inv;
    let c2 = [[diff21, c2_12], [zero, one]];
    let images = [fam.u_bar1(), fam.var(1)];
    let pull = |m: [[DiffPoly; 2]; 2]| -> Result<[[DiffPoly; 2]; 2], DrError> {
        let [[a, b], [c, d]] = m;
        Ok([
            [substitute(&a, &images)?, substitute(&b, &images)?],
            [substitute(&c, &images)?, substitute(&d, &images)?],
        ])
    };
    Ok([pull(c1)?, pull(c2)?])
}

/// Computes `C_1, C_2` from the potentials and checks them against the
/// displayed forms.
pub fn structure_constants(fam: &FamilySpec) -> Result<[[[DiffPoly; 2]; 2]; 2], DrError> {
    let data = genus0_potentials(fam)?;
    let shown = structure_constants_displayed(fam)?;
    for g in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                ensure_equal(&format!("C{}[{}][{}]", g + 1, a + 1, b + 1), &data.c[g][a][b], &shown[g][a][b])?;
            }
        }
    }
    Ok(data.c)
}

/// `∫_0^{u^var} p du^var` for `p` free of higher jets.
fn integrate_in(p: &DiffPoly, var: usize) -> DiffPoly {
    let j = Jet::new(var, 0);
    DiffPoly::from_terms(
        p.n_vars(),
        p.context(),
        p.terms().map(|(m, c)| {
            let k = m.multiplicity(j) as i64 + 1;
            (m.mul(&Monomial::jet(j)), c.scale(&(int(1) / int(k))))
        }),
    )
}

fn at_zero(p: &DiffPoly, var: usize) -> DiffPoly {
    p.filter(|m| m.multiplicity(Jet::new(var, 0)) == 0)
}

pub type Matrix2 = [[DiffPoly; 2]; 2];

fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    std::array::from_fn(|i| std::array::from_fn(|j| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j])))
}

/// `P^{[0]}_0, …, P^{[0]}_d` from `∂P_d/∂u^γ = C_γ P_{d−1}`, `P_{−1} = Id`,
/// `P_d|_{u=0} = 0`. Integrates in `u¹` first, then adds the `u²`
/// dependence at `u¹ = 0`, after checking the 1-form is closed.
pub fn dispersionless_flows(fam: &FamilySpec, d: u32) -> Result<Vec<Matrix2>, DrError> {
    let c = structure_constants(fam)?;
    let zero = DiffPoly::zero(2, fam.ctx);
    let one = DiffPoly::one(2, fam.ctx);
    let mut prev: Matrix2 = [[one.clone(), zero.clone()], [zero, one]];
    let mut out = Vec::new();
    for k in 0..=d {
        let g1 = mat_mul(&c[0], &prev);
        let g2 = mat_mul(&c[1], &prev);
        let mut next: Matrix2 = prev.clone();
        for a in 0..2 {
            for b in 0..2 {
                let closed = &g1[a][b].partial(1, 0) - &g2[a][b].partial(0, 0);
                // The partials lose one degree of exactness.
                let closed = closed.truncated(fam.ctx.with_deg(fam.ctx.deg_max.saturating_sub(1)));
                if !closed.is_zero() {
                    return Err(DrError::ClosednessViolation(format!("P_{k}[{}][{}]", a + 1, b + 1)));
                }
                next[a][b] = &integrate_in(&g1[a][b], 0) + &integrate_in(&at_zero(&g2[a][b], 0), 1);
            }
        }
        out.push(next.clone());
        prev = next;
    }
    Ok(out)
}

pub fn dispersionless_flow(fam: &FamilySpec, d: u32) -> Result<Matrix2, DrError> {
    Ok(dispersionless_flows(fam, d)?.pop().expect("d + 1 matrices"))
}

/// The closed form `((ū¹)^{d+1}/(d+1)!, M_d; 0, (ū²)^{d+1}/(d+1)!)`.
pub fn dispersionless_closed_form(fam: &FamilySpec, d: u32) -> Result<Matrix2, DrError> {
    let ub1 = fam.var(0);
    let ub2 = fam.var(1);
    let f1 = crate::lax::factorial(d + 1);
    let f2 = crate::lax::factorial(d + 2);
    let diag1 = ub1.pow(d + 1).scale(&(int(1) / f1.clone()));
    let diag2 = ub2.pow(d + 1).scale(&(int(1) / f1));
    let inner = &(&ub1.pow(d + 2) - &(&ub1 * &ub2.pow(d + 1)).scale(&int(d as i64 + 2)))
        + &ub2.pow(d + 2).scale(&int(d as i64 + 1));
    let m = (&fam.xi() * &inner).scale(&(int(-1) / f2));
    let images = [fam.u_bar1(), fam.var(1)];
    Ok([
        [substitute(&diag1, &images)?, substitute(&m, &images)?],
        [DiffPoly::zero(2, fam.ctx), substitute(&diag2, &images)?],
    ])
}

/// `∂_x P_d^KdV` in one variable with `eps^2 ↦ G eps^2`.
pub fn kdv_rescaled(d: u32, ctx: TruncationContext, g: Param) -> Result<DiffPoly, DrError> {
    Ok(kdv_flow_dx(d, ctx)?.rescale_eps(g)?)
}

/// `∂_y P_d^{xi-KdV}` in one variable with `eps^2 ↦ G eps^2`.
pub fn xi_kdv_rescaled(fam: &FamilySpec, d: u32, g: Param) -> Result<DiffPoly, DrError> {
    let p = xi_kdv_flow(d, fam.ctx)?.dx().rescale_eps(g)?;
    Ok(if fam.xi_zero { p.specialize(Param::Xi, &int(0)) } else { p })
}

/// Which known coefficients of the primary flows to alter, for testing that
/// the verifier notices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimaryMutation {
    /// Negate the `eps^2 G1/12` term of `∂ũ¹/∂t²_0`.
    FlipT0Dispersion,
}

/// The primary flows in the variables `ũ`, and for `1 ≤ d ≤ d_max` the flows
/// `t¹_d`, `t²_d` with their known `ũ²` components.
///
/// The `ũ¹` components of the flows with `d ≥ 1` are not known in closed
/// form; they are set to zero and must not be read.
pub fn primary_flows(fam: &FamilySpec, d_max: u32) -> Result<EvolutionarySystem, DrError> {
    primary_flows_mutated(fam, d_max, None)
}

pub fn primary_flows_mutated(
    fam: &FamilySpec,
    d_max: u32,
    mutation: Option<&PrimaryMutation>,
) -> Result<EvolutionarySystem, DrError> {
    let ctx = fam.ctx;
    let u1 = fam.var(0);
    let u2 = fam.var(1);
    let xi = fam.xi();
    let inv = fam.inv_unit();
    let w = &u1 * &inv;
    let sign = if mutation == Some(&PrimaryMutation::FlipT0Dispersion) { -1 } else { 1 };
    let nested = &(&w.dx() * &inv).dx() * &inv;
    let disp = (&DiffPoly::param(2, ctx, Param::G1) * &nested)
        .shift_eps(2)
        .scale(&rat(sign, 12));
    let bracket = &(&(&u1 * &u2) * &inv) - &(&(&u1.pow(2) * &inv.pow(2)).scale(&rat(1, 2)) + &disp);
    let zero = DiffPoly::zero(2, ctx);
    let mut s = EvolutionarySystem::new(2, 'u')
        .with(FlowLabel::new(1, 0), vec![w.dx(), zero.clone()])?
        .with(FlowLabel::new(2, 0), vec![(&xi * &bracket).dx(), u2.dx()])?;
    for d in 1..=d_max {
        let kdv2 = kdv_rescaled(d, ctx, Param::G2)?.embed(2, &[1]);
        s.insert(FlowLabel::new(1, d), EvolutionaryOp::new(vec![zero.clone(), zero.clone()])?)?;
        s.insert(FlowLabel::new(2, d), EvolutionaryOp::new(vec![zero.clone(), kdv2])?)?;
    }
    Ok(s)
}

/// The change of variables from the original `u` to `ũ` used for the
/// primary flows.
pub fn tilde_miura(fam: &FamilySpec) -> Result<MiuraTransform, DrError> {
    let u1 = fam.var(0);
    let u2 = fam.var(1);
    let xi = fam.xi();
    let g1 = DiffPoly::param(2, fam.ctx, Param::G1);
    let g2 = DiffPoly::param(2, fam.ctx, Param::G2);
    let inner = &(&(&xi * &g2) * &u2) + &(&g1 * &fam.inv_unit());
    let tail = inner.dx().dx().shift_eps(2).scale(&rat(1, 24));
    let img1 = &(&u1 + &(&xi * &u2.pow(2)).scale(&rat(1, 2))) + &tail;
    Ok(MiuraTransform::new(vec![img1, u2])?)
}

/// The Miura transformation of the main statement, from `u` to `û`.
pub fn main_miura(fam: &FamilySpec) -> Result<MiuraTransform, DrError> {
    let tilde = tilde_miura(fam)?;
    let img1 = &tilde.images()[0] * &fam.inv_unit();
    Ok(MiuraTransform::new(vec![img1, fam.var(1)])?)
}

/// `û¹ = ũ¹/(1 + xi ũ²)`, `û² = ũ²`: the main transformation written from the
/// `ũ` coordinates. Checked to agree with [`main_miura`] after [`tilde_miura`].
pub fn composite_miura(fam: &FamilySpec) -> Result<MiuraTransform, DrError> {
    let m = MiuraTransform::new(vec![&fam.var(0) * &fam.inv_unit(), fam.var(1)])?;
    let tilde = tilde_miura(fam)?;
    let main = main_miura(fam)?;
    let unit = &DiffPoly::one(2, fam.ctx) + &(&fam.xi() * &fam.var(1));
    ensure_equal("main û¹ times (1 + xi u²) against ũ¹", &(&main.images()[0] * &unit), &tilde.images()[0])?;
    for a in 0..2 {
        let through = substitute(&m.images()[a], tilde.images())?;
        ensure_equal(&format!("composite image {} through ũ", a + 1), &through, &main.images()[a])?;
    }
    Ok(m)
}

/// `xi û²` as a polynomial in two variables.
pub fn reciprocal_density(fam: &FamilySpec) -> DiffPoly {
    &fam.xi() * &fam.var(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::render_text;

    fn fam() -> FamilySpec {
        FamilySpec::new(TruncationContext::new(2, 6))
    }

    #[test]
    fn genus0() {
        let data = genus0_potentials(&fam()).unwrap();
        assert_eq!(render_text(&data.f2, 'u'), "1/2*u2^2");
        let flat = genus0_potentials(&fam().with_xi_zero(true)).unwrap();
        assert_eq!(render_text(&flat.f1, 'u'), "1/2*u1^2");
        // Symmetry of c^α_{βγ} in β, γ.
        for a in 0..2 {
            assert_eq!(data.c[0][a][1], data.c[1][a][0]);
        }
    }

    #[test]
    fn structure_constant_shapes() {
        let c = structure_constants(&fam()).unwrap();
        assert!(c[0][1][0].is_zero() && c[0][1][1].is_zero());
        assert_eq!(c[1][1][1], DiffPoly::one(2, fam().ctx));
        let flat = structure_constants(&fam().with_xi_zero(true)).unwrap();
        let one = DiffPoly::one(2, fam().ctx);
        assert_eq!(flat[0][0][0], one);
        assert_eq!(flat[1][1][1], one);
        assert!(flat[0][0][1].is_zero() && flat[1][0][0].is_zero() && flat[1][0][1].is_zero());
    }

    #[test]
    fn dispersionless_zero() {
        let f = fam();
        let p = dispersionless_flow(&f, 0).unwrap();
        let ub1 = f.u_bar1();
        let u2 = f.var(1);
        assert_eq!(p[0][0], ub1);
        assert_eq!(p[1][1], u2);
        let m0 = (&f.xi() * &(&ub1 - &u2).pow(2)).scale(&rat(-1, 2));
        assert_eq!(p[0][1], m0);
        let flat = fam().with_xi_zero(true);
        let p2 = dispersionless_flow(&flat, 2).unwrap();
        assert_eq!(p2[0][0], flat.var(0).pow(3).scale(&rat(1, 6)));
        assert!(p2[0][1].is_zero());
    }

    #[test]
    fn primary_examples() {
        let f = fam();
        let s = primary_flows(&f, 1).unwrap();
        let t20 = s.flow(FlowLabel::new(2, 0)).unwrap();
        assert_eq!(t20.component(1), &f.var(1).dx());
        let t10 = s.flow(FlowLabel::new(1, 0)).unwrap();
        assert_eq!(t10.component(0), &(&f.var(0) * &f.inv_unit()).dx());
        let flat = primary_flows(&f.with_xi_zero(true), 0).unwrap();
        assert!(flat.flow(FlowLabel::new(2, 0)).unwrap().component(0).is_zero());
    }

    #[test]
    fn composite_is_consistent() {
        let m = composite_miura(&fam()).unwrap();
        assert_eq!(m.images()[1], fam().var(1));
        let flat = composite_miura(&fam().with_xi_zero(true)).unwrap();
        assert_eq!(flat, MiuraTransform::identity(2, fam().ctx));
    }

    #[test]
    fn small_verification() {
        let r = verify_theorem(0, TruncationContext::new(2, 4));
        assert!(r.passed, "{r:?}");
        let bad = verify_theorem_with(
            1,
            TruncationContext::new(2, 4),
            &VerifyOptions {
                xi_zero: false,
                fault: Some(FaultInjection::FlipT0Dispersion),
            },
        );
        assert!(!bad.check(5).unwrap().passed);
        assert!(bad.check(5).unwrap().differences.iter().any(|d| d.difference.contains("eps^2")));
    }
}
