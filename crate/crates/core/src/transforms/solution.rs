//! Formal solutions in `C[[x, t, eps]]` and their transport along a
//! reciprocal transformation.

use super::reciprocal::{reciprocal_push_flow, ReciprocalTransform};
use super::series::Series;
use super::TransformError;
use crate::calculus::{conservation_law_witness, EvolutionaryOp, EvolutionarySystem, FlowLabel};
use crate::ring::DiffPoly;

/// Components `u^α(x, t_1, …, t_T, eps)` solving the selected flows, with
/// `t_i` the time of `times[i]`; exact up to `weight`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSolution {
    pub times: Vec<FlowLabel>,
    pub components: Vec<Series>,
    pub weight: u32,
}

impl FormalSolution {
    /// `∂u^α/∂t_i − P_i^α(u)` for every selected flow, truncated to the
    /// weights where both sides are exact.
    pub fn residuals(&self, s: &EvolutionarySystem) -> Result<Vec<Vec<Series>>, TransformError> {
        let w = self.weight.saturating_sub(1);
        self.times
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let h = s.flow(*label).ok_or_else(|| TransformError::BoundsTooSmall(format!("no flow {label}")))?;
                Ok(h.components()
                    .iter()
                    .zip(&self.components)
                    .map(|(p, u)| (&u.dt(i) - &Series::eval_diffpoly(p, &self.components)).truncated(w))
                    .collect())
            })
            .collect()
    }

    pub fn is_exact_solution_of(&self, s: &EvolutionarySystem) -> Result<bool, TransformError> {
        Ok(self.residuals(s)?.iter().flatten().all(Series::is_zero))
    }
}

fn check_flow_bounds(label: FlowLabel, h: &EvolutionaryOp, weight: u32) -> Result<(), TransformError> {
    if !h.vanishes_at_origin() {
        return Err(TransformError::FlowNotVanishing(label));
    }
    for p in h.components() {
        let c = p.context();
        if c.eps_max < weight || c.deg_max <= weight {
            return Err(TransformError::BoundsTooSmall(format!(
                "flow {label} is known to (eps {}, deg {}), weight {weight} needs (eps {weight}, deg {})",
                c.eps_max,
                c.deg_max,
                weight + 1
            )));
        }
    }
    Ok(())
}

/// Solves `∂u/∂t_i = P_i(u)` for the flows in `times`, one time after the
/// other, starting from `initial` (series in `x` and `eps` only).
///
/// Each flow is integrated by Picard iteration `u ← u|_{t_i=0} + ∫ P_i(u) dt_i`.
/// The flows must commute for the result to solve all of them at once.
pub fn evolve_formal_solution(
    s: &EvolutionarySystem,
    times: &[FlowLabel],
    initial: &[Series],
    weight: u32,
) -> Result<FormalSolution, TransformError> {
    if initial.len() != s.n_vars() {
        return Err(crate::ring::RingError::VarCountMismatch(initial.len(), s.n_vars()).into());
    }
    for u0 in initial {
        if !u0.constant_term().is_zero() {
            return Err(TransformError::BoundsTooSmall("initial data must vanish at x = 0".into()));
        }
        if u0.n_times() != 0 {
            return Err(TransformError::BoundsTooSmall("initial data must not depend on time".into()));
        }
    }
    let n_t = times.len();
    let mut u: Vec<Series> = initial.iter().map(|s0| s0.with_times(n_t).truncated(weight)).collect();
    if u.iter().any(|c| c.weight_max() < weight) {
        return Err(TransformError::BoundsTooSmall(format!("initial data is not known to weight {weight}")));
    }
    for (i, label) in times.iter().enumerate() {
        let h = s.flow(*label).ok_or_else(|| TransformError::BoundsTooSmall(format!("no flow {label}")))?;
        check_flow_bounds(*label, h, weight)?;
        let start = u.clone();
        let cap = (weight as usize + 2) * (weight as usize + 2);
        let mut converged = false;
        for _ in 0..cap {
            let next: Vec<Series> = h
                .components()
                .iter()
                .zip(&start)
                .map(|(p, u0)| &u0.clone() + &Series::eval_diffpoly(p, &u).integrate_t(i).truncated(weight))
                .collect();
            if next == u {
                converged = true;
                break;
            }
            u = next;
        }
        if !converged {
            return Err(TransformError::BoundsTooSmall(format!("Picard iteration for {label} did not settle")));
        }
    }
    Ok(FormalSolution {
        times: times.to_vec(),
        components: u,
        weight,
    })
}

/// Result of [`solution_transport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportedSolution {
    /// `y(x, t)` with `y|_{x=t=0} = 0`.
    pub y: Series,
    /// The reversion `x = X(y, t)`, stored with `y` in the `x` slot.
    pub x_of_y: Series,
    /// `v(y, t) = u(X(y, t), t)`.
    pub solution: FormalSolution,
    /// The transformed system the solution satisfies.
    pub system: EvolutionarySystem,
}

/// Moves a formal solution of `S` to the system transformed by `f`:
/// `dy = (1+f)dx + Σ R_i dt_i` and `v(y, t) = u(x, t)`.
pub fn solution_transport(
    s: &EvolutionarySystem,
    f: &ReciprocalTransform,
    sol: &FormalSolution,
) -> Result<TransportedSolution, TransformError> {
    let w = sol.weight;
    let n_t = sol.times.len();
    let u = &sol.components;
    let mut pushed = EvolutionarySystem::new(s.n_vars(), 'v');
    let mut fluxes: Vec<DiffPoly> = Vec::new();
    for label in &sol.times {
        let h = s.flow(*label).ok_or_else(|| TransformError::BoundsTooSmall(format!("no flow {label}")))?;
        let r = conservation_law_witness(f.f(), h).ok_or(TransformError::NotAConservationLaw(*label))?;
        let (op, _) = reciprocal_push_flow(f, h, *label)?;
        pushed.insert(*label, op)?;
        fluxes.push(r);
    }

    let one = Series::one(n_t, w);
    let a = &one + &Series::eval_diffpoly(f.f(), u);
    let b: Vec<Series> = fluxes.iter().map(|r| Series::eval_diffpoly(r, u)).collect();

    // Integrate along x, then along t_1, t_2, … at x = 0 with later times at 0.
    let mut y = a.integrate_x().truncated(w);
    for (i, bi) in b.iter().enumerate() {
        let mut path = bi.at_x_zero();
        for j in i + 1..n_t {
            path = path.at_time_zero(j);
        }
        y = &y + &path.integrate_t(i).truncated(w);
    }
    let check = w.saturating_sub(1);
    for (i, bi) in b.iter().enumerate() {
        let diff = (&y.dt(i) - bi).truncated(check);
        if !diff.is_zero() {
            return Err(TransformError::ClosednessViolation(format!("dy/dt{} - R: {diff}", i + 1)));
        }
    }

    // Reversion of y = x + N(x, t).
    let x = Series::x(n_t, w);
    let n = &y - &x;
    let mut big_x = x.clone();
    for _ in 0..=w {
        let next = &x - &n.compose_x(&big_x);
        if next == big_x {
            break;
        }
        big_x = next;
    }

    let v: Vec<Series> = u.iter().map(|c| c.compose_x(&big_x)).collect();
    let solution = FormalSolution {
        times: sol.times.clone(),
        components: v,
        weight: w,
    };
    let residuals = solution.residuals(&pushed)?;
    if let Some(r) = residuals.iter().flatten().find(|r| !r.is_zero()) {
        return Err(TransformError::ResidualNonzero(r.to_string()));
    }
    Ok(TransportedSolution {
        y,
        x_of_y: big_x,
        solution,
        system: pushed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax::kdv_flow_dx;
    use crate::ring::TruncationContext;
    use crate::scalar::{Param, ParamScalar};
    use crate::transforms::series::SeriesMono;

    fn ctx() -> TruncationContext {
        TruncationContext::new(6, 8)
    }

    fn label() -> FlowLabel {
        FlowLabel::new(1, 1)
    }

    #[test]
    fn transport_equation() {
        let s = EvolutionarySystem::new(1, 'u').with(label(), vec![DiffPoly::jet(1, ctx(), 0, 1)]).unwrap();
        let sol = evolve_formal_solution(&s, &[label()], &[Series::x(0, 5)], 5).unwrap();
        assert_eq!(sol.components[0], &Series::x(1, 5) + &Series::t(1, 5, 0));
    }

    #[test]
    fn hopf_series() {
        let u = DiffPoly::var(1, ctx(), 0);
        let s = EvolutionarySystem::new(1, 'u').with(label(), vec![&u * &u.dx()]).unwrap();
        let sol = evolve_formal_solution(&s, &[label()], &[Series::x(0, 6)], 6).unwrap();
        // x/(1 - t) = Σ x t^k
        let expected = Series::from_terms(
            1,
            6,
            (0..6).map(|k| (SeriesMono::new(1, vec![k], 0), ParamScalar::one())),
        );
        assert_eq!(sol.components[0], expected);
        assert!(sol.is_exact_solution_of(&s).unwrap());
    }

    #[test]
    fn two_kdv_times() {
        let s = EvolutionarySystem::new(1, 'u')
            .with(FlowLabel::new(1, 1), vec![kdv_flow_dx(1, ctx()).unwrap()])
            .unwrap()
            .with(FlowLabel::new(1, 2), vec![kdv_flow_dx(2, ctx()).unwrap()])
            .unwrap();
        let x = Series::x(0, 5);
        let init = &x + &(&x.pow(3) * &Series::eps(0, 5));
        let sol = evolve_formal_solution(&s, &[FlowLabel::new(1, 1), FlowLabel::new(1, 2)], &[init], 5).unwrap();
        assert!(sol.is_exact_solution_of(&s).unwrap());
    }

    #[test]
    fn trivial_transport_is_identity() {
        let s = EvolutionarySystem::new(1, 'u').with(label(), vec![kdv_flow_dx(1, ctx()).unwrap()]).unwrap();
        let sol = evolve_formal_solution(&s, &[label()], &[Series::x(0, 5)], 5).unwrap();
        let f = ReciprocalTransform::new(DiffPoly::zero(1, ctx())).unwrap();
        let out = solution_transport(&s, &f, &sol).unwrap();
        assert_eq!(out.y, Series::x(1, 5));
        assert_eq!(out.solution.components, sol.components);
    }

    #[test]
    fn xi_transport() {
        let s = EvolutionarySystem::new(1, 'u').with(label(), vec![kdv_flow_dx(1, ctx()).unwrap()]).unwrap();
        let sol = evolve_formal_solution(&s, &[label()], &[Series::x(0, 6)], 6).unwrap();
        let xi = DiffPoly::param(1, ctx(), Param::Xi);
        let f = ReciprocalTransform::new(&xi * &DiffPoly::var(1, ctx(), 0)).unwrap();
        let out = solution_transport(&s, &f, &sol).unwrap();
        // y = x + xi*x^2/2 + …, so v = y - xi*y^2/2 + … at t = 0.
        let v = &out.solution.components[0];
        assert_eq!(v.coeff(&SeriesMono::new(1, vec![0], 0)), ParamScalar::one());
        assert_eq!(v.coeff(&SeriesMono::new(2, vec![0], 0)), ParamScalar::param(Param::Xi).scale(&-crate::scalar::rat(1, 2)));
        assert!(out.solution.is_exact_solution_of(&out.system).unwrap());
    }

    #[test]
    fn rejects_short_flows() {
        let small = TruncationContext::new(2, 4);
        let s = EvolutionarySystem::new(1, 'u').with(label(), vec![kdv_flow_dx(1, small).unwrap()]).unwrap();
        assert!(matches!(
            evolve_formal_solution(&s, &[label()], &[Series::x(0, 6)], 6),
            Err(TransformError::BoundsTooSmall(_))
        ));
    }
}
