#![allow(dead_code)]

use kdvrecip::calculus::{conservation_law_witness, EvolutionaryOp, EvolutionarySystem, FlowLabel};
use kdvrecip::lax::kdv_flow_dx;
use kdvrecip::scalar::{rat, Param, ParamScalar};
use kdvrecip::transforms::{
    phi_forward, reciprocal_push_flow, reciprocal_push_system, transport_conservation_law, ReciprocalTransform,
};
use kdvrecip::{DiffPoly, TruncationContext};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

pub fn ctx() -> TruncationContext {
    TruncationContext::new(3, 5)
}

fn arb_coeff() -> impl Strategy<Value = ParamScalar> {
    (-4i64..=4, 1i64..=3, prop::option::of(0usize..3)).prop_map(|(n, d, p)| {
        let q = ParamScalar::from_rational(rat(n, d));
        match p {
            None => q,
            Some(i) => &q * &ParamScalar::param([Param::Xi, Param::G1, Param::G2][i]),
        }
    })
}

/// Sums of up to five terms `c·eps^e·Π u^{α}_{k}` with `1..=3` jet factors,
/// so every sample vanishes at the origin.
pub fn arb_poly(n_vars: usize, ctx: TruncationContext, max_order: usize) -> impl Strategy<Value = DiffPoly> {
    let factor = (0..n_vars, 0..=max_order);
    let term = (arb_coeff(), 0i32..=2, prop::collection::vec(factor, 1..=3));
    prop::collection::vec(term, 0..=5).prop_map(move |terms| {
        let mut p = DiffPoly::zero(n_vars, ctx);
        for (c, e, jets) in terms {
            let mut t = DiffPoly::eps_pow(n_vars, ctx, e).scalar_mul(&c);
            for (v, k) in jets {
                t = &t * &DiffPoly::jet(n_vars, ctx, v, k);
            }
            p = &p + &t;
        }
        p
    })
}

/// Differential degree 0 and vanishing at the origin: valid densities for a
/// reciprocal transformation and images of a Miura map.
pub fn arb_degree_zero(n_vars: usize, ctx: TruncationContext) -> impl Strategy<Value = DiffPoly> {
    arb_poly(n_vars, ctx, 2).prop_map(|p| p.degree_component(0))
}

/// Deterministic samples of a strategy, for suites run outside `proptest!`.
pub fn samples<S: Strategy>(s: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n).map(|_| s.new_tree(&mut runner).expect("sample").current()).collect()
}

pub fn kdv_system(ctx: TruncationContext, ds: &[u32]) -> EvolutionarySystem {
    let mut s = EvolutionarySystem::new(1, 'u');
    for &d in ds {
        s = s.with(FlowLabel::new(1, d), vec![kdv_flow_dx(d, ctx).unwrap()]).unwrap();
    }
    s
}

/// `u` and `u²` are conserved by every KdV flow.
pub fn kdv_density(ctx: TruncationContext, a: &ParamScalar, b: &ParamScalar) -> DiffPoly {
    let u = DiffPoly::var(1, ctx, 0);
    &u.scalar_mul(a) + &u.pow(2).scalar_mul(b)
}

/// Part 1: `K = H − R·D` with `D = (1+f)^{-1}∂_x` commutes with `D` on every
/// test polynomial, computed in the original variables.
pub fn appendix_part1(f: &DiffPoly, h: &EvolutionaryOp, tests: &[DiffPoly]) -> bool {
    let n = f.n_vars();
    let c = f.context();
    let r = conservation_law_witness(f, h).expect("f is conserved");
    let inv = (&DiffPoly::one(n, c) + f).invert_unit().unwrap();
    let d = |g: &DiffPoly| &inv * &g.dx();
    let k = |g: &DiffPoly| &h.apply(g) - &(&r * &d(g));
    tests.iter().all(|g| (&k(&d(g)) - &d(&k(g))).is_zero())
}

/// Part 1 cross-check: the pushed components are `Φ^{-1}` of `K(u^α)`.
pub fn pushed_matches_u_side(f: &ReciprocalTransform, h: &EvolutionaryOp) -> bool {
    let (op, r) = reciprocal_push_flow(f, h, FlowLabel::new(0, 0)).unwrap();
    let n = h.n_vars();
    let c = op.component(0).context();
    let inv = (&DiffPoly::one(n, c) + f.f()).invert_unit().unwrap();
    (0..n).all(|a| {
        let k = &h.component(a).truncated(c) - &(&r * &(&inv * &DiffPoly::jet(n, c, a, 1)));
        phi_forward(f, op.component(a)).unwrap() == k
    })
}

/// Part 2: commuting flows stay commuting.
pub fn appendix_part2(f: &ReciprocalTransform, s: &EvolutionarySystem) -> bool {
    s.noncommuting_pairs().unwrap().is_empty()
        && reciprocal_push_system(f, s).unwrap().noncommuting_pairs().unwrap().is_empty()
}

/// Part 3: `(g/(1+f), R_g − gR/(1+f))` is a conservation law of the pushed flow.
pub fn appendix_part3(f: &ReciprocalTransform, h: &EvolutionaryOp, g: &DiffPoly) -> bool {
    let r_g = conservation_law_witness(g, h).expect("g is conserved");
    let (g_new, r_new) = transport_conservation_law(f, h, g, &r_g).unwrap();
    let (op, _) = reciprocal_push_flow(f, h, FlowLabel::new(0, 0)).unwrap();
    op.apply(&g_new) == r_new.dx()
}

/// Group action: pushing by `ξ₁u` and then by `ξ₂u/(1+ξ₁u)` (written in the
/// new variables) equals pushing by `(ξ₁+ξ₂)u`, with `ξ₁ = xi`, `ξ₂ = G2`.
pub fn group_action(s: &EvolutionarySystem) -> bool {
    let c = s.flows().next().unwrap().1.component(0).context();
    let u = DiffPoly::var(1, c, 0);
    let xi1 = DiffPoly::param(1, c, Param::Xi);
    let xi2 = DiffPoly::param(1, c, Param::G2);
    let f1 = ReciprocalTransform::new(&xi1 * &u).unwrap();
    let first = reciprocal_push_system(&f1, s).unwrap();
    let (_, h) = s.flows().next().unwrap();
    let r = conservation_law_witness(&u, h).unwrap();
    let (g_v, _) = transport_conservation_law(&f1, h, &(&xi2 * &u), &r.scalar_mul(&ParamScalar::param(Param::G2))).unwrap();
    let second = reciprocal_push_system(&ReciprocalTransform::new(g_v).unwrap(), &first).unwrap();
    let direct = reciprocal_push_system(&ReciprocalTransform::new(&(&xi1 + &xi2) * &u).unwrap(), s).unwrap();
    second == direct
}
