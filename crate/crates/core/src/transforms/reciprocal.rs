use super::TransformError;
use crate::calculus::{conservation_law_witness, EvolutionaryOp, EvolutionarySystem, FlowLabel};
use crate::ring::{substitute_jets, DiffPoly, TruncationContext};

/// The conservation law `f ∈ Â_{u;0}`, `f|_{u=0} = 0`, defining `Φ_f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReciprocalTransform {
    f: DiffPoly,
}

impl ReciprocalTransform {
    pub fn new(f: DiffPoly) -> Result<Self, TransformError> {
        if !f.vanishes_at_origin() {
            return Err(TransformError::InvalidReciprocal(format!("{f} does not vanish at the origin")));
        }
        if !f.is_homogeneous(0) {
            return Err(TransformError::InvalidReciprocal(format!("{f} is not of differential degree 0")));
        }
        Ok(ReciprocalTransform { f })
    }

    pub fn f(&self) -> &DiffPoly {
        &self.f
    }

    pub fn n_vars(&self) -> usize {
        self.f.n_vars()
    }

    fn check_vars(&self, p: &DiffPoly) -> Result<(), TransformError> {
        if p.n_vars() != self.n_vars() {
            return Err(crate::ring::RingError::VarCountMismatch(p.n_vars(), self.n_vars()).into());
        }
        Ok(())
    }
}

/// Iterates `w ↦ a·∂w` starting from the variable `var`, returning the chain.
fn chain_images(n: usize, ctx: TruncationContext, a: &DiffPoly, max_order: usize) -> Vec<Vec<DiffPoly>> {
    (0..n)
        .map(|var| {
            let mut chain = vec![DiffPoly::var(n, ctx, var)];
            for k in 0..max_order {
                let next = a * &chain[k].dx();
                chain.push(next);
            }
            chain
        })
        .collect()
}

fn max_jet_order(p: &DiffPoly) -> usize {
    (0..p.n_vars()).filter_map(|a| p.max_order(a)).max().unwrap_or(0)
}

/// `Φ_f(P) = P|_{v^α_k ↦ ((1+f)^{-1}∂_x)^k u^α}`.
pub fn phi_forward(f: &ReciprocalTransform, p: &DiffPoly) -> Result<DiffPoly, TransformError> {
    f.check_vars(p)?;
    let n = p.n_vars();
    let ctx = p.context().meet(f.f.context());
    let unit = &DiffPoly::one(n, ctx) + &f.f.truncated(ctx);
    let inv = unit.invert_unit()?;
    let chains = chain_images(n, ctx, &inv, max_jet_order(p));
    Ok(substitute_jets(p, n, ctx, |var, order| chains[var][order].clone())?)
}

/// `Φ_f^{-1}(f)` in the `v` ring: the fixed point of
/// `F = f|_{u^α_k ↦ ((1+F)∂_y)^k v^α}`. The `eps^j` part of the right-hand
/// side only involves lower `eps` parts of `F`, so `eps_max + 1` rounds suffice.
fn f_in_v(f: &ReciprocalTransform, ctx: TruncationContext) -> Result<DiffPoly, TransformError> {
    let n = f.n_vars();
    let fo = f.f.truncated(ctx);
    let depth = max_jet_order(&fo);
    let mut big_f = DiffPoly::zero(n, ctx);
    for _ in 0..=ctx.eps_max + 1 {
        let a = &DiffPoly::one(n, ctx) + &big_f;
        let chains = chain_images(n, ctx, &a, depth);
        let next = substitute_jets(&fo, n, ctx, |var, order| chains[var][order].clone())?;
        if next == big_f {
            break;
        }
        big_f = next;
    }
    Ok(big_f)
}

/// `Φ_f^{-1}`: rewrites a polynomial in `u` as one in `v`.
pub fn phi_inverse(f: &ReciprocalTransform, p: &DiffPoly) -> Result<DiffPoly, TransformError> {
    f.check_vars(p)?;
    let n = p.n_vars();
    let ctx = p.context().meet(f.f.context());
    let big_f = f_in_v(f, ctx)?;
    let a = &DiffPoly::one(n, ctx) + &big_f;
    let chains = chain_images(n, ctx, &a, max_jet_order(p));
    Ok(substitute_jets(p, n, ctx, |var, order| chains[var][order].clone())?)
}

/// The transformed flow `H − R∂_y`, components `P^α − R v^α_y` in the `v`
/// ring, together with the witness `R` (in `u`).
pub fn reciprocal_push_flow(
    f: &ReciprocalTransform,
    h: &EvolutionaryOp,
    label: FlowLabel,
) -> Result<(EvolutionaryOp, DiffPoly), TransformError> {
    if !h.vanishes_at_origin() {
        return Err(TransformError::FlowNotVanishing(label));
    }
    let r = conservation_law_witness(&f.f, h).ok_or(TransformError::NotAConservationLaw(label))?;
    let rv = phi_inverse(f, &r)?;
    let n = h.n_vars();
    let comps = h
        .components()
        .iter()
        .enumerate()
        .map(|(a, p)| {
            let pv = phi_inverse(f, p)?;
            let vy = DiffPoly::jet(n, pv.context(), a, 1);
            Ok(&pv - &(&rv * &vy))
        })
        .collect::<Result<Vec<_>, TransformError>>()?;
    Ok((EvolutionaryOp::new(comps)?, r))
}

/// Applies [`reciprocal_push_flow`] to every flow; the result uses letter `v`.
pub fn reciprocal_push_system(
    f: &ReciprocalTransform,
    s: &EvolutionarySystem,
) -> Result<EvolutionarySystem, TransformError> {
    let mut out = EvolutionarySystem::new(s.n_vars(), 'v');
    for (label, h) in s.flows() {
        let (op, _) = reciprocal_push_flow(f, h, *label)?;
        out.insert(*label, op)?;
    }
    Ok(out)
}

/// Same as [`reciprocal_push_flow`] without the label, for ad hoc operators.
pub fn act_by_conservation_law(
    f: &ReciprocalTransform,
    h: &EvolutionaryOp,
) -> Result<(EvolutionaryOp, DiffPoly), TransformError> {
    reciprocal_push_flow(f, h, FlowLabel::new(0, 0))
}

/// Moves a conservation law `g` of `H` with flux `R_g` to the transformed
/// operator: returns `(g/(1+f), R_g − gR/(1+f))` written in `v`, where `R` is
/// the flux of `f`.
pub fn transport_conservation_law(
    f: &ReciprocalTransform,
    h: &EvolutionaryOp,
    g: &DiffPoly,
    r_g: &DiffPoly,
) -> Result<(DiffPoly, DiffPoly), TransformError> {
    let r = conservation_law_witness(&f.f, h).ok_or(TransformError::NotAConservationLaw(FlowLabel::new(0, 0)))?;
    let n = g.n_vars();
    let ctx = g.context().meet(f.f.context());
    let inv = (&DiffPoly::one(n, ctx) + &f.f).invert_unit()?;
    let g_new = g * &inv;
    let r_new = r_g - &(&g_new * &r);
    Ok((phi_inverse(f, &g_new)?, phi_inverse(f, &r_new)?))
}

/// The group law on conservation laws: acting by `f` and then by `g/(1+f)`
/// is acting by `f + g`.
pub fn compose_reciprocal(f: &ReciprocalTransform, g: &DiffPoly) -> Result<ReciprocalTransform, TransformError> {
    ReciprocalTransform::new(&f.f + g)
}
