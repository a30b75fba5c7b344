mod common;

use common::*;
use kdvrecip::calculus::FlowLabel;
use kdvrecip::lax::kdv_flow_dx;
use kdvrecip::transforms::{miura_invert, miura_push_system, phi_forward, phi_inverse, MiuraTransform, ReciprocalTransform};
use kdvrecip::{DiffPoly, TruncationContext};
use proptest::prelude::*;

fn recip() -> impl Strategy<Value = ReciprocalTransform> {
    arb_degree_zero(1, ctx()).prop_map(|f| ReciprocalTransform::new(f).unwrap())
}

fn p1() -> impl Strategy<Value = DiffPoly> {
    arb_poly(1, ctx(), 3)
}

/// `u ↦ u + (degree-zero terms of order ≥ 2 in the jets or carrying eps)`.
fn miura() -> impl Strategy<Value = MiuraTransform> {
    arb_degree_zero(1, ctx()).prop_map(|g| {
        let u = DiffPoly::var(1, ctx(), 0);
        let tail = g.filter(|m| m.u_degree() >= 2 || m.eps() > 0);
        MiuraTransform::new(vec![&u + &tail]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phi_is_a_ring_homomorphism(f in recip(), a in p1(), b in p1()) {
        prop_assert_eq!(phi_forward(&f, &(&a * &b)).unwrap(), &phi_forward(&f, &a).unwrap() * &phi_forward(&f, &b).unwrap());
        prop_assert_eq!(phi_forward(&f, &(&a + &b)).unwrap(), &phi_forward(&f, &a).unwrap() + &phi_forward(&f, &b).unwrap());
    }

    #[test]
    fn phi_intertwines_derivatives(f in recip(), a in p1()) {
        // Φ(∂_y a) = (1+f)^{-1} ∂_x Φ(a)
        let inv = (&DiffPoly::one(1, ctx()) + f.f()).invert_unit().unwrap();
        prop_assert_eq!(phi_forward(&f, &a.dx()).unwrap(), &inv * &phi_forward(&f, &a).unwrap().dx());
    }

    #[test]
    fn phi_round_trip(f in recip(), a in p1()) {
        prop_assert_eq!(phi_inverse(&f, &phi_forward(&f, &a).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(phi_forward(&f, &phi_inverse(&f, &a).unwrap()).unwrap(), a);
    }

    #[test]
    fn miura_inverse_round_trip(m in miura(), a in p1()) {
        let inv = miura_invert(&m).unwrap();
        prop_assert_eq!(inv.pull_back(&m.pull_back(&a).unwrap()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn miura_push_preserves_commutativity(m in miura()) {
        let c = TruncationContext::new(2, 4);
        let m = MiuraTransform::new(m.images().iter().map(|p| p.truncated(c)).collect()).unwrap();
        let s = kdv_system(c, &[1, 2]);
        let pushed = miura_push_system(&m, &s).unwrap();
        prop_assert!(pushed.noncommuting_pairs().unwrap().is_empty());
        let h = pushed.flow(FlowLabel::new(1, 1)).unwrap().component(0).clone();
        // The dispersionless part of the first flow is unchanged to first order.
        prop_assert_eq!(h.degree_component(1).u_degree_component(1), kdv_flow_dx(1, c).unwrap().u_degree_component(1));
    }
}
