//! Evolutionary operators, conservation laws and antiderivatives.

mod linsolve;
mod uniqueness;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ring::{DiffPoly, Jet, TruncationContext};
use crate::scalar::int;

pub use linsolve::{solve_rational, SolveError};
pub use uniqueness::{extend_commuting_flow, working_context};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CalculusError {
    #[error("variable count mismatch: {0} vs {1}")]
    VarCountMismatch(usize, usize),
    #[error("not a total derivative: variational derivative in variable {var} is {residual}")]
    NotATotalDerivative { var: usize, residual: String },
    #[error("nonzero constant term {0}")]
    NonzeroConstantTerm(String),
    #[error("no solution at eps^{order}")]
    NoSolution { order: i32 },
    #[error("solution not unique at eps^{order}")]
    NonUniqueSolution { order: i32 },
    #[error("bad input: {0}")]
    BadInput(String),
}

/// The derivation `H_P = Σ_n (∂_x^n P^α) ∂/∂u^α_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvolutionaryOp {
    components: Vec<DiffPoly>,
}

impl EvolutionaryOp {
    pub fn new(components: Vec<DiffPoly>) -> Result<Self, CalculusError> {
        let n = components.len();
        for c in &components {
            if c.n_vars() != n {
                return Err(CalculusError::VarCountMismatch(c.n_vars(), n));
            }
        }
        Ok(EvolutionaryOp { components })
    }

    /// `∂_x` itself, `P^α = u^α_1`.
    pub fn dx(n_vars: usize, ctx: TruncationContext) -> Self {
        EvolutionaryOp {
            components: (0..n_vars).map(|a| DiffPoly::jet(n_vars, ctx, a, 1)).collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[DiffPoly] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &DiffPoly {
        &self.components[a]
    }

    pub fn into_components(self) -> Vec<DiffPoly> {
        self.components
    }

    pub fn vanishes_at_origin(&self) -> bool {
        self.components.iter().all(DiffPoly::vanishes_at_origin)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(DiffPoly::is_zero)
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> EvolutionaryOp {
        EvolutionaryOp {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn try_map<E>(&self, f: impl Fn(&DiffPoly) -> Result<DiffPoly, E>) -> Result<EvolutionaryOp, E> {
        Ok(EvolutionaryOp {
            components: self.components.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub fn apply(&self, f: &DiffPoly) -> DiffPoly {
        apply(self, f).expect("evolutionary operator applied across variable counts")
    }
}

/// `H(f) = Σ_n ∂_x^n(P^α) · ∂f/∂u^α_n`.
pub fn apply(h: &EvolutionaryOp, f: &DiffPoly) -> Result<DiffPoly, CalculusError> {
    if h.n_vars() != f.n_vars() {
        return Err(CalculusError::VarCountMismatch(h.n_vars(), f.n_vars()));
    }
    let ctx = h
        .components
        .iter()
        .map(DiffPoly::context)
        .fold(f.context(), TruncationContext::meet);
    let mut chains: HashMap<usize, Vec<DiffPoly>> = HashMap::new();
    let mut out = DiffPoly::zero(f.n_vars(), ctx);
    for Jet { var, order } in f.jets_present() {
        let (var, order) = (var as usize, order as usize);
        let chain = chains
            .entry(var)
            .or_insert_with(|| vec![h.components[var].clone()]);
        while chain.len() <= order {
            let next = chain.last().unwrap().dx();
            chain.push(next);
        }
        out = &out + &(&chain[order] * &f.partial(var, order));
    }
    Ok(out)
}

/// `[H_P, H_Q] = H_{H_P(Q) − H_Q(P)}`.
pub fn commutator(h1: &EvolutionaryOp, h2: &EvolutionaryOp) -> Result<EvolutionaryOp, CalculusError> {
    if h1.n_vars() != h2.n_vars() {
        return Err(CalculusError::VarCountMismatch(h1.n_vars(), h2.n_vars()));
    }
    let mut comps = Vec::with_capacity(h1.n_vars());
    for a in 0..h1.n_vars() {
        comps.push(&apply(h1, &h2.components[a])? - &apply(h2, &h1.components[a])?);
    }
    Ok(EvolutionaryOp { components: comps })
}

/// Euler operator `δf/δu^α = Σ_n (−∂_x)^n ∂f/∂u^α_n`.
pub fn variational_derivative(f: &DiffPoly, var: usize) -> DiffPoly {
    let mut out = DiffPoly::zero(f.n_vars(), f.context());
    let top = f.max_order(var).unwrap_or(0);
    for n in 0..=top {
        let mut t = f.partial(var, n).dx_n(n);
        if n % 2 == 1 {
            t = -&t;
        }
        out = &out + &t;
    }
    out
}

/// `R` with `∂_x R = f` and `R|_{u=0} = 0`.
///
/// Uses the homotopy formula: on the `u`-degree-`m` part,
/// `R_m = (1/m) Σ_α Σ_k Σ_{j<k} u^α_j (−∂_x)^{k−1−j} ∂f_m/∂u^α_k`.
pub fn antiderivative(f: &DiffPoly) -> Result<DiffPoly, CalculusError> {
    if !f.vanishes_at_origin() {
        return Err(CalculusError::NonzeroConstantTerm(f.at_origin().to_string()));
    }
    for a in 0..f.n_vars() {
        let e = variational_derivative(f, a);
        if !e.is_zero() {
            return Err(CalculusError::NotATotalDerivative {
                var: a,
                residual: e.to_string(),
            });
        }
    }
    let n = f.n_vars();
    let ctx = f.context();
    let mut out = DiffPoly::zero(n, ctx);
    let mut degrees: Vec<u32> = f.terms().map(|(m, _)| m.u_degree()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    for m in degrees {
        let fm = f.u_degree_component(m);
        let mut rm = DiffPoly::zero(n, ctx);
        for a in 0..n {
            let top = fm.max_order(a).unwrap_or(0);
            for k in 1..=top {
                let dk = fm.partial(a, k);
                if dk.is_zero() {
                    continue;
                }
                for j in 0..k {
                    let mut t = dk.dx_n(k - 1 - j);
                    if (k - 1 - j) % 2 == 1 {
                        t = -&t;
                    }
                    rm = &rm + &(&DiffPoly::jet(n, ctx, a, j) * &t);
                }
            }
        }
        out = &out + &rm.scale(&(int(1) / int(m as i64)));
    }
    Ok(out)
}

/// The flux `R` with `H(f) = ∂_x R`, `R|_{u=0} = 0`, if `f` is a conservation
/// law of `H`.
pub fn conservation_law_witness(f: &DiffPoly, h: &EvolutionaryOp) -> Option<DiffPoly> {
    let g = apply(h, f).ok()?;
    antiderivative(&g).ok()
}

/// Time label `t^β_d`, written `t<beta>_<d>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowLabel {
    pub beta: u32,
    pub d: u32,
}

impl FlowLabel {
    pub fn new(beta: u32, d: u32) -> Self {
        FlowLabel { beta, d }
    }
}

impl fmt::Display for FlowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}_{}", self.beta, self.d)
    }
}

impl std::str::FromStr for FlowLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad flow label '{s}', expected t<beta>_<d>");
        let rest = s.strip_prefix('t').ok_or_else(bad)?;
        let (b, d) = rest.split_once('_').ok_or_else(bad)?;
        Ok(FlowLabel {
            beta: b.parse().map_err(|_| bad())?,
            d: d.parse().map_err(|_| bad())?,
        })
    }
}

/// A labeled family of evolutionary operators on a common ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvolutionarySystem {
    n_vars: usize,
    letter: char,
    flows: BTreeMap<FlowLabel, EvolutionaryOp>,
}

impl EvolutionarySystem {
    pub fn new(n_vars: usize, letter: char) -> Self {
        EvolutionarySystem {
            n_vars,
            letter,
            flows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, label: FlowLabel, op: EvolutionaryOp) -> Result<(), CalculusError> {
        if op.n_vars() != self.n_vars {
            return Err(CalculusError::VarCountMismatch(op.n_vars(), self.n_vars));
        }
        self.flows.insert(label, op);
        Ok(())
    }

    pub fn with(mut self, label: FlowLabel, components: Vec<DiffPoly>) -> Result<Self, CalculusError> {
        self.insert(label, EvolutionaryOp::new(components)?)?;
        Ok(self)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn letter(&self) -> char {
        self.letter
    }

    pub fn with_letter(mut self, letter: char) -> Self {
        self.letter = letter;
        self
    }

    pub fn flows(&self) -> impl Iterator<Item = (&FlowLabel, &EvolutionaryOp)> {
        self.flows.iter()
    }

    pub fn flow(&self, label: FlowLabel) -> Option<&EvolutionaryOp> {
        self.flows.get(&label)
    }

    pub fn labels(&self) -> Vec<FlowLabel> {
        self.flows.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    /// Labels of every pair of flows with a nonzero commutator.
    pub fn noncommuting_pairs(&self) -> Result<Vec<(FlowLabel, FlowLabel)>, CalculusError> {
        let items: Vec<_> = self.flows.iter().collect();
        let mut bad = Vec::new();
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if !commutator(items[i].1, items[j].1)?.is_zero() {
                    bad.push((*items[i].0, *items[j].0));
                }
            }
        }
        Ok(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn c() -> TruncationContext {
        TruncationContext::new(4, 6)
    }

    fn u(k: usize) -> DiffPoly {
        DiffPoly::jet(1, c(), 0, k)
    }

    fn op(p: DiffPoly) -> EvolutionaryOp {
        EvolutionaryOp::new(vec![p]).unwrap()
    }

    fn p1() -> DiffPoly {
        &u(0).pow(2).scale(&rat(1, 2)) + &(&DiffPoly::eps_pow(1, c(), 2) * &u(2)).scale(&rat(1, 12))
    }

    #[test]
    fn apply_examples() {
        let f = &u(0).pow(3) + &(&u(1) * &u(2));
        assert_eq!(op(u(1)).apply(&f), f.dx());
        let h = op(&u(0) * &u(1));
        assert_eq!(h.apply(&u(0)), &u(0) * &u(1));
        assert_eq!(h.apply(&u(0).pow(2).scale(&rat(1, 2))), &u(0).pow(2) * &u(1));
    }

    #[test]
    fn dispersionless_flows_commute() {
        let a = op(&u(0) * &u(1));
        let b = op((&u(0).pow(2) * &u(1)).scale(&rat(1, 2)));
        assert!(commutator(&a, &b).unwrap().is_zero());
        assert!(commutator(&EvolutionaryOp::dx(1, c()), &a).unwrap().is_zero());
        let c2 = op(&u(0) * &u(2));
        assert!(!commutator(&a, &c2).unwrap().is_zero());
    }

    #[test]
    fn euler_operator() {
        assert!(variational_derivative(&(&u(0) * &u(1)), 0).is_zero());
        assert_eq!(variational_derivative(&u(1).pow(2), 0), u(2).scale(&int(-2)));
        assert_eq!(variational_derivative(&u(0).pow(3), 0), u(0).pow(2).scale(&int(3)));
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(antiderivative(&(&u(0) * &u(1))).unwrap(), u(0).pow(2).scale(&rat(1, 2)));
        assert!(matches!(
            antiderivative(&u(1).pow(2)),
            Err(CalculusError::NotATotalDerivative { .. })
        ));
        assert_eq!(antiderivative(&p1().dx()).unwrap(), p1());
        assert!(matches!(
            antiderivative(&DiffPoly::one(1, c())),
            Err(CalculusError::NonzeroConstantTerm(_))
        ));
    }

    #[test]
    fn witness_examples() {
        let h = op(p1().dx());
        assert_eq!(conservation_law_witness(&u(0), &h).unwrap(), p1());
        assert!(conservation_law_witness(&u(0).pow(2), &h).is_some());
        assert_eq!(conservation_law_witness(&u(1), &h).unwrap(), p1().dx());
        assert!(conservation_law_witness(&u(1).pow(2), &op(u(0))).is_none());
    }

    #[test]
    fn flow_labels() {
        let l: FlowLabel = "t2_3".parse().unwrap();
        assert_eq!(l, FlowLabel::new(2, 3));
        assert_eq!(l.to_string(), "t2_3");
        assert!("x2_3".parse::<FlowLabel>().is_err());
    }
}
