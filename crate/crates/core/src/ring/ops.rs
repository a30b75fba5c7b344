use std::collections::HashMap;

use super::{DiffPoly, Jet, Monomial, RingError, TruncationContext};
use crate::scalar::{int, ParamScalar};

impl DiffPoly {
    /// Total derivative `∂_x = Σ u^α_{d+1} ∂/∂u^α_d`.
    pub fn dx(&self) -> DiffPoly {
        let mut out = DiffPoly::zero(self.n_vars, self.ctx);
        for (m, c) in &self.terms {
            for &(j, mult) in m.jets() {
                let (rest, _) = m.remove_one(j).expect("jet present");
                let next = rest.mul(&Monomial::jet(Jet {
                    var: j.var,
                    order: j.order + 1,
                }));
                out.add_term(next, &c.scale(&int(mult as i64)));
            }
        }
        out
    }

    /// `∂_x^n`.
    pub fn dx_n(&self, n: usize) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.dx();
        }
        p
    }

    /// Formal partial derivative with respect to `u^var_order`.
    pub fn partial(&self, var: usize, order: usize) -> DiffPoly {
        let j = Jet::new(var, order);
        let mut out = DiffPoly::zero(self.n_vars, self.ctx);
        for (m, c) in &self.terms {
            if let Some((rest, mult)) = m.remove_one(j) {
                out.add_term(rest, &c.scale(&int(mult as i64)));
            }
        }
        out
    }
}

/// `[Q, ∂_x Q, ∂_x^2 Q, …]` up to `∂_x^max_order Q`.
pub fn prolongation(q: &DiffPoly, max_order: usize) -> Vec<DiffPoly> {
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(q.clone());
    for k in 0..max_order {
        let next = out[k].dx();
        out.push(next);
    }
    out
}

/// Replaces each jet `v^α_k` of `p` by `image(α, k)`, a polynomial in
/// `target_vars` variables. Images must vanish at the origin so that the
/// `u`-degree truncation stays exact.
pub fn substitute_jets(
    p: &DiffPoly,
    target_vars: usize,
    target_ctx: TruncationContext,
    mut image: impl FnMut(usize, usize) -> DiffPoly,
) -> Result<DiffPoly, RingError> {
    let ctx = p.ctx.meet(target_ctx);
    let mut images: HashMap<Jet, DiffPoly> = HashMap::new();
    let mut powers: HashMap<(Jet, u16), DiffPoly> = HashMap::new();
    let mut out = DiffPoly::zero(target_vars, ctx);
    for (m, c) in &p.terms {
        if m.eps() > ctx.eps_max as i32 {
            continue;
        }
        let mut acc = DiffPoly::from_terms(
            target_vars,
            ctx,
            [(Monomial::eps_pow(m.eps()), ParamScalar::one())],
        );
        for &(j, mult) in m.jets() {
            if !images.contains_key(&j) {
                let img = image(j.var as usize, j.order as usize);
                if img.n_vars() != target_vars {
                    return Err(RingError::VarCountMismatch(img.n_vars(), target_vars));
                }
                if !img.vanishes_at_origin() {
                    return Err(RingError::ImageNotVanishing(format!(
                        "var {} order {}",
                        j.var, j.order
                    )));
                }
                images.insert(j, img.truncated(ctx));
            }
            let pw = powers
                .entry((j, mult))
                .or_insert_with(|| images[&j].pow(mult as u32));
            acc = &acc * pw;
            if acc.is_zero() {
                break;
            }
        }
        out = &out + &acc.scalar_mul(c);
    }
    Ok(out)
}

/// Prolonged substitution `v^α_k ↦ ∂_x^k Q^α`; an algebra homomorphism
/// commuting with the total derivative.
pub fn substitute(p: &DiffPoly, images: &[DiffPoly]) -> Result<DiffPoly, RingError> {
    if images.len() != p.n_vars() {
        return Err(RingError::VarCountMismatch(p.n_vars(), images.len()));
    }
    let target_vars = images.first().map(|q| q.n_vars()).unwrap_or(p.n_vars());
    let target_ctx = images
        .iter()
        .map(|q| q.context())
        .fold(p.context(), TruncationContext::meet);
    let mut prolonged: Vec<Vec<DiffPoly>> = images.iter().map(|q| vec![q.clone()]).collect();
    substitute_jets(p, target_vars, target_ctx, |var, order| {
        let chain = &mut prolonged[var];
        while chain.len() <= order {
            let next = chain.last().unwrap().dx();
            chain.push(next);
        }
        chain[order].clone()
    })
}
