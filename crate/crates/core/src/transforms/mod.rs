//! Changes of dependent variables (Miura) and of the spatial variable
//! (reciprocal), and their action on systems, conservation laws and formal
//! solutions.

mod miura;
mod reciprocal;
mod series;
mod solution;

use thiserror::Error;

use crate::calculus::{CalculusError, FlowLabel};
use crate::ring::RingError;

pub use miura::{miura_invert, miura_push_system, MiuraTransform};
pub use reciprocal::{
    act_by_conservation_law, compose_reciprocal, phi_forward, phi_inverse, reciprocal_push_flow,
    reciprocal_push_system, transport_conservation_law, ReciprocalTransform,
};
pub use series::{Series, SeriesMono};
pub use solution::{evolve_formal_solution, solution_transport, FormalSolution, TransportedSolution};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("degenerate Jacobian at the origin: det = {0}")]
    DegenerateJacobian(String),
    #[error("not a Miura transformation: {0}")]
    NotMiura(String),
    #[error("invalid reciprocal transformation: {0}")]
    InvalidReciprocal(String),
    #[error("not a conservation law of flow {0}")]
    NotAConservationLaw(FlowLabel),
    #[error("flow {0} does not vanish at the origin")]
    FlowNotVanishing(FlowLabel),
    #[error("the 1-form dy is not closed: {0}")]
    ClosednessViolation(String),
    #[error("bounds too small: {0}")]
    BoundsTooSmall(String),
    #[error("transported series fails the transformed system: {0}")]
    ResidualNonzero(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}
