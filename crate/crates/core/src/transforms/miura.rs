use super::TransformError;
use crate::calculus::{apply, EvolutionaryOp, EvolutionarySystem};
use crate::ring::{substitute, DiffPoly, TruncationContext};
use crate::scalar::ParamScalar;

/// `ũ^α = g^α(u_0) + eps·(…)`, stored as the images `ũ^α` in the `u` ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiuraTransform {
    images: Vec<DiffPoly>,
}

/// Determinant of a small square matrix by cofactor expansion.
fn det(m: &[Vec<ParamScalar>]) -> ParamScalar {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = ParamScalar::zero();
    for c in 0..n {
        let minor: Vec<Vec<ParamScalar>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][c] * &det(&minor);
        if c % 2 == 0 {
            acc += &term;
        } else {
            acc -= &term;
        }
    }
    acc
}

impl MiuraTransform {
    pub fn new(images: Vec<DiffPoly>) -> Result<Self, TransformError> {
        let n = images.len();
        for (a, img) in images.iter().enumerate() {
            if img.n_vars() != n {
                return Err(TransformError::NotMiura(format!("image {} has {} variables", a + 1, img.n_vars())));
            }
            if !img.vanishes_at_origin() {
                return Err(TransformError::NotMiura(format!("image {} does not vanish at the origin", a + 1)));
            }
            if !img.is_homogeneous(0) {
                return Err(TransformError::NotMiura(format!("image {} is not of differential degree 0", a + 1)));
            }
        }
        let m = MiuraTransform { images };
        let d = det(&m.jacobian_at_origin());
        if d.as_rational().is_none_or(|q| q == num_traits::Zero::zero()) {
            return Err(TransformError::DegenerateJacobian(d.to_string()));
        }
        Ok(m)
    }

    pub fn identity(n: usize, ctx: TruncationContext) -> Self {
        MiuraTransform {
            images: (0..n).map(|a| DiffPoly::var(n, ctx, a)).collect(),
        }
    }

    pub fn images(&self) -> &[DiffPoly] {
        &self.images
    }

    pub fn n_vars(&self) -> usize {
        self.images.len()
    }

    /// `(∂g^α/∂u^β_0)|_{u=0}`.
    pub fn jacobian_at_origin(&self) -> Vec<Vec<ParamScalar>> {
        let n = self.n_vars();
        self.images
            .iter()
            .map(|img| {
                let lin = img.dispersionless().u_degree_component(1);
                (0..n)
                    .map(|b| {
                        let mono = crate::ring::Monomial::jet(crate::ring::Jet::new(b, 0));
                        lin.coeff(&mono)
                    })
                    .collect()
            })
            .collect()
    }

    /// Applies the change of variables to a polynomial written in `ũ`,
    /// returning it in terms of `u`.
    pub fn pull_back(&self, p: &DiffPoly) -> Result<DiffPoly, TransformError> {
        Ok(substitute(p, &self.images)?)
    }
}

/// Inverse transformation: images `u^α(ũ)`, computed as the fixed point of
/// `u = J^{-1}(ũ − N(u))` where `J` is the linear part at the origin.
pub fn miura_invert(m: &MiuraTransform) -> Result<MiuraTransform, TransformError> {
    let n = m.n_vars();
    let j = m.jacobian_at_origin();
    let d = det(&j)
        .as_rational()
        .ok_or_else(|| TransformError::DegenerateJacobian(det(&j).to_string()))?;
    // adj(J)/det, polynomial in the parameters because det is rational.
    let inv: Vec<Vec<ParamScalar>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let minor: Vec<Vec<ParamScalar>> = j
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != c)
                        .map(|(_, row)| row.iter().enumerate().filter(|(k, _)| *k != r).map(|(_, v)| v.clone()).collect())
                        .collect();
                    let cof = if n == 1 { ParamScalar::one() } else { det(&minor) };
                    let signed = if (r + c) % 2 == 0 { cof } else { -cof };
                    signed.scale(&(crate::scalar::int(1) / d.clone()))
                })
                .collect()
        })
        .collect();
    let ctx = m
        .images
        .iter()
        .map(DiffPoly::context)
        .reduce(TruncationContext::meet)
        .unwrap_or(TruncationContext::new(0, 0));
    let linear: Vec<DiffPoly> = m
        .images
        .iter()
        .map(|img| img.filter(|mono| mono.eps() == 0 && mono.u_degree() == 1 && mono.weight() == 0))
        .collect();
    let nonlinear: Vec<DiffPoly> = m.images.iter().zip(&linear).map(|(i, l)| i - l).collect();
    let apply_inv = |v: &[DiffPoly]| -> Vec<DiffPoly> {
        (0..n)
            .map(|r| {
                (0..n).fold(DiffPoly::zero(n, ctx), |acc, c| &acc + &v[c].scalar_mul(&inv[r][c]))
            })
            .collect()
    };
    let tilde: Vec<DiffPoly> = (0..n).map(|a| DiffPoly::var(n, ctx, a)).collect();
    let mut h = apply_inv(&tilde);
    for _ in 0..=(ctx.deg_max + ctx.eps_max + 1) {
        let rhs: Vec<DiffPoly> = nonlinear
            .iter()
            .zip(&tilde)
            .map(|(nl, t)| Ok(t - &substitute(nl, &h)?))
            .collect::<Result<_, TransformError>>()?;
        let next = apply_inv(&rhs);
        if next == h {
            break;
        }
        h = next;
    }
    Ok(MiuraTransform { images: h })
}

/// Rewrites every flow in the new variables: `∂ũ^α/∂t = H_P(ũ^α)` expressed
/// through the inverse transformation.
pub fn miura_push_system(m: &MiuraTransform, s: &EvolutionarySystem) -> Result<EvolutionarySystem, TransformError> {
    let inv = miura_invert(m)?;
    let mut out = EvolutionarySystem::new(s.n_vars(), s.letter());
    for (label, h) in s.flows() {
        let comps = m
            .images
            .iter()
            .map(|img| Ok(substitute(&apply(h, img)?, inv.images())?))
            .collect::<Result<Vec<_>, TransformError>>()?;
        out.insert(*label, EvolutionaryOp::new(comps)?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::FlowLabel;
    use crate::scalar::{int, rat, Param};

    fn c() -> TruncationContext {
        TruncationContext::new(2, 6)
    }

    #[test]
    fn triangular_shift() {
        let u1 = DiffPoly::var(2, c(), 0);
        let u2 = DiffPoly::var(2, c(), 1);
        let xi = DiffPoly::param(2, c(), Param::Xi);
        let shift = (&xi * &u2.pow(2)).scale(&rat(1, 2));
        let m = MiuraTransform::new(vec![&u1 + &shift, u2.clone()]).unwrap();
        let inv = miura_invert(&m).unwrap();
        assert_eq!(inv.images()[0], &u1 - &shift);
        assert_eq!(inv.images()[1], u2);
    }

    #[test]
    fn identity_and_round_trip() {
        let id = MiuraTransform::identity(2, c());
        assert_eq!(miura_invert(&id).unwrap(), id);
        let u1 = DiffPoly::var(2, c(), 0);
        let u2 = DiffPoly::var(2, c(), 1);
        let xi = DiffPoly::param(2, c(), Param::Xi);
        let unit = &DiffPoly::one(2, c()) + &(&xi * &u2);
        let eps2 = DiffPoly::eps_pow(2, c(), 2);
        let m = MiuraTransform::new(vec![
            &(&u1 * &unit.inv()) + &(&eps2 * &u2.dx_n(2)),
            u2.clone(),
        ])
        .unwrap();
        let inv = miura_invert(&m).unwrap();
        for a in 0..2 {
            assert_eq!(substitute(&inv.images()[a], m.images()).unwrap(), DiffPoly::var(2, c(), a));
        }
    }

    #[test]
    fn scaling_chain_rule() {
        let ctx = c();
        let u = DiffPoly::var(1, ctx, 0);
        let s = EvolutionarySystem::new(1, 'u')
            .with(FlowLabel::new(1, 0), vec![&u * &u.dx()])
            .unwrap();
        let m = MiuraTransform::new(vec![u.scale(&int(2))]).unwrap();
        let pushed = miura_push_system(&m, &s).unwrap();
        let got = pushed.flow(FlowLabel::new(1, 0)).unwrap().component(0).clone();
        assert_eq!(got, (&u * &u.dx()).scale(&rat(1, 2)));
    }

    #[test]
    fn rejects_degenerate() {
        let u = DiffPoly::var(1, c(), 0);
        assert!(matches!(MiuraTransform::new(vec![u.pow(2)]), Err(TransformError::DegenerateJacobian(_))));
        assert!(matches!(MiuraTransform::new(vec![u.dx()]), Err(TransformError::NotMiura(_))));
    }
}
