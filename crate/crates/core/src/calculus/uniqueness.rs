//! Constructive form of the uniqueness lemma: given `P = u u_x + O(eps)` and
//! `f(u)`, find the unique `Q = f(u) u_x + O(eps)` commuting with `P`.

use std::collections::BTreeMap;

use super::{apply, commutator, solve_rational, CalculusError, EvolutionaryOp, SolveError};
use crate::ring::{DiffPoly, Jet, Monomial, TruncationContext};
use crate::scalar::ParamScalar;

/// Context in which `P` must be known exactly to produce `Q` exactly in `out`.
///
/// The `eps^k` part of `Q` in `u`-degree `m` depends on lower orders in
/// degree up to `m + 1`, so each order costs one degree of headroom.
pub fn working_context(out: TruncationContext) -> TruncationContext {
    TruncationContext::new(out.eps_max, out.deg_max + out.eps_max + 1)
}

/// Multisets of jet orders `≥ 1` with the given total and size.
fn partitions(total: usize, parts: usize, max_part: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 0 {
        if total == 0 {
            out.push(acc.clone());
        }
        return;
    }
    let hi = max_part.min(total.saturating_sub(parts - 1));
    for k in (1..=hi).rev() {
        acc.push(k);
        partitions(total - k, parts - 1, k, acc, out);
        acc.pop();
    }
}

/// Monomials of differential weight `w ≥ 1` (no `eps`) and `u`-degree `m`.
fn basis(w: usize, m: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for r in 1..=m.min(w) {
        let mut parts = Vec::new();
        partitions(w, r, w, &mut Vec::new(), &mut parts);
        for p in parts {
            let mut factors: Vec<(Jet, u16)> = p.iter().map(|&k| (Jet::new(0, k), 1)).collect();
            if m > r {
                factors.push((Jet::new(0, 0), (m - r) as u16));
            }
            out.push(Monomial::new(0, factors));
        }
    }
    out
}

/// Solves for `Q` with `[H_P, H_Q] = 0` order by order in `eps`.
///
/// `p` must be exact in [`working_context`]`(out)`; `f` is a series in `u`
/// alone. The result is exact in `out`.
pub fn extend_commuting_flow(
    p: &DiffPoly,
    f: &DiffPoly,
    out: TruncationContext,
) -> Result<DiffPoly, CalculusError> {
    if p.n_vars() != 1 || f.n_vars() != 1 {
        return Err(CalculusError::BadInput("extend_commuting_flow needs one variable".into()));
    }
    let work = working_context(out);
    let pc = p.context();
    if pc.deg_max < work.deg_max || pc.eps_max < work.eps_max {
        return Err(CalculusError::BadInput(format!(
            "P is known in context (eps {}, deg {}), need (eps {}, deg {})",
            pc.eps_max, pc.deg_max, work.eps_max, work.deg_max
        )));
    }
    let p = p.truncated(work);
    let u = DiffPoly::var(1, work, 0);
    let ux = DiffPoly::jet(1, work, 0, 1);
    let p0 = &u * &ux;
    if p.dispersionless() != p0 {
        return Err(CalculusError::BadInput(format!("eps^0 part of P is {}, expected u1*u1[1]", p.dispersionless())));
    }
    if !p.is_homogeneous(1) {
        return Err(CalculusError::BadInput("P is not of differential degree 1".into()));
    }
    if f.terms().any(|(m, _)| m.eps() != 0 || m.weight() != 0) {
        return Err(CalculusError::BadInput(format!("f = {f} is not a series in u alone")));
    }
    let f = f.truncated(work.with_deg(work.deg_max - 1));
    let hp = EvolutionaryOp::new(vec![p.clone()])?;
    let h0 = EvolutionaryOp::new(vec![p0.clone()])?;
    let mut q = &f.with_context(work) * &ux;
    for k in 1..=out.eps_max as i32 {
        // Degrees of Q_k that later orders still need exactly.
        let top = (out.deg_max + out.eps_max) as i32 - k;
        if top < 1 {
            break;
        }
        let hq = EvolutionaryOp::new(vec![q.clone()])?;
        let known = (&apply(&hp, &q)? - &apply(&hq, &p)?).eps_component(k).shift_eps(-k);
        let w = (k + 1) as usize;
        for m in 1..=top as usize {
            let rhs_poly = -&known.u_degree_component(m as u32 + 1);
            let cols = basis(w, m);
            let images: Vec<DiffPoly> = cols
                .iter()
                .map(|b| {
                    let bp = DiffPoly::from_terms(1, work, [(b.clone(), ParamScalar::one())]);
                    commutator(&h0, &EvolutionaryOp::new(vec![bp]).unwrap())
                        .unwrap()
                        .into_components()
                        .remove(0)
                })
                .collect();
            let mut row_index: BTreeMap<Monomial, usize> = BTreeMap::new();
            for img in images.iter().chain(std::iter::once(&rhs_poly)) {
                for (mono, _) in img.terms() {
                    let n = row_index.len();
                    row_index.entry(mono.clone()).or_insert(n);
                }
            }
            let mut rows = vec![Vec::new(); row_index.len()];
            for (c, img) in images.iter().enumerate() {
                for (mono, coeff) in img.terms() {
                    let r = row_index[mono];
                    let q = coeff.as_rational().ok_or_else(|| {
                        CalculusError::BadInput("parametric coefficient in the linearized operator".into())
                    })?;
                    rows[r].push((c, q));
                }
            }
            let mut rhs = vec![ParamScalar::zero(); row_index.len()];
            for (mono, coeff) in rhs_poly.terms() {
                rhs[row_index[mono]] = coeff.clone();
            }
            let sol = solve_rational(cols.len(), &rows, &rhs).map_err(|e| match e {
                SolveError::Inconsistent => CalculusError::NoSolution { order: k },
                SolveError::Underdetermined(_) => CalculusError::NonUniqueSolution { order: k },
            })?;
            let mut piece = DiffPoly::zero(1, work);
            for (b, c) in cols.iter().zip(sol) {
                piece = &piece + &DiffPoly::from_terms(1, work, [(b.with_eps(k), c)]);
            }
            q = &q + &piece;
        }
    }
    Ok(q.truncated(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn basis_sizes() {
        // weight 2, degree 2: u*u_xx, u_x^2
        assert_eq!(basis(2, 2).len(), 2);
        // weight 3, degree 1: u_xxx
        assert_eq!(basis(3, 1).len(), 1);
    }

    fn kdv1(ctx: TruncationContext) -> DiffPoly {
        let u = DiffPoly::var(1, ctx, 0);
        let uxx = DiffPoly::jet(1, ctx, 0, 2);
        &u.pow(2).scale(&rat(1, 2)) + &(&DiffPoly::eps_pow(1, ctx, 2) * &uxx).scale(&rat(1, 12))
    }

    #[test]
    fn transport_and_constant_seed() {
        let out = TruncationContext::new(4, 4);
        let work = working_context(out);
        let p = kdv1(work).dx();
        let ux = DiffPoly::jet(1, out, 0, 1);
        let one = DiffPoly::one(1, work);
        assert_eq!(extend_commuting_flow(&p, &one, out).unwrap(), ux);
        let u = DiffPoly::var(1, work, 0);
        assert_eq!(extend_commuting_flow(&p, &u, out).unwrap(), kdv1(out).dx());
    }

    #[test]
    fn rejects_small_context() {
        let out = TruncationContext::new(2, 4);
        let p = kdv1(out).dx();
        assert!(matches!(
            extend_commuting_flow(&p, &DiffPoly::one(1, out), out),
            Err(CalculusError::BadInput(_))
        ));
    }
}
