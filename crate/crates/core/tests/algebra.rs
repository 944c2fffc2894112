//! Properties of lower expectations, mixtures, pruning and conditioning on
//! random finite beliefs.

use ibrl_core::worldmodels::{
    ArmObservation, ArmReturn, BernoulliArms, FiniteEvent, FiniteMeasure, FiniteReturn,
    OutcomeValues,
};
use ibrl_core::{condition, AMeasure, Infradistribution, ObservationEvent, PruneMode};
use proptest::prelude::*;

const N: usize = 4;
const TOL: f64 = 1e-12;

fn point() -> impl Strategy<Value = AMeasure<FiniteMeasure>> {
    (
        prop::collection::vec(0.01f64..1.0, N),
        0.1f64..2.0,
        0.0f64..0.5,
    )
        .prop_map(|(raw, scale, offset)| {
            let total: f64 = raw.iter().sum();
            let masses = raw.iter().map(|m| m / total).collect();
            AMeasure::new(scale, FiniteMeasure::new(masses).unwrap(), offset, ()).unwrap()
        })
}

fn belief() -> impl Strategy<Value = Infradistribution<FiniteMeasure>> {
    prop::collection::vec(point(), 1..7).prop_map(|pts| Infradistribution::new(pts).unwrap())
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, N)
}

fn ret(v: &[f64]) -> FiniteReturn {
    FiniteReturn::with_bounds(v.to_vec(), 0.0, 1.0).unwrap()
}

proptest! {
    #[test]
    fn monotone(psi in belief(), f in values(), bump in values()) {
        let g: Vec<f64> = f.iter().zip(&bump).map(|(a, b)| (a + b).min(1.0)).collect();
        prop_assert!(psi.lower_expectation(&ret(&f)).unwrap() <= psi.lower_expectation(&ret(&g)).unwrap() + TOL);
    }

    #[test]
    fn classical_mixture_is_linear(a in belief(), b in belief(), w in 0.0f64..1.0, f in values()) {
        let mixed = Infradistribution::mix_classical(&[a.clone(), b.clone()], &[w, 1.0 - w]).unwrap();
        let f = ret(&f);
        let expected = w * a.lower_expectation(&f).unwrap() + (1.0 - w) * b.lower_expectation(&f).unwrap();
        prop_assert!((mixed.lower_expectation(&f).unwrap() - expected).abs() <= TOL);
    }

    #[test]
    fn knightian_union_is_the_envelope(a in belief(), b in belief(), f in values()) {
        let union = Infradistribution::mix_knightian(&[a.clone(), b.clone()]).unwrap();
        let f = ret(&f);
        let env = a.lower_expectation(&f).unwrap().min(b.lower_expectation(&f).unwrap());
        prop_assert_eq!(union.lower_expectation(&f).unwrap(), env);
    }

    #[test]
    fn pruning_preserves_lower_expectations(psi in belief(), fs in prop::collection::vec(values(), 50)) {
        for mode in [PruneMode::Duplicates, PruneMode::Dominated, PruneMode::ConvexRedundant] {
            let pruned = psi.prune_with(mode);
            prop_assert!(pruned.len() <= psi.len());
            for f in &fs {
                let f = ret(f);
                let gap = (pruned.lower_expectation(&f).unwrap() - psi.lower_expectation(&f).unwrap()).abs();
                prop_assert!(gap <= TOL, "{:?} gap {}", mode, gap);
            }
        }
    }

    #[test]
    fn conditioning_normalizes(psi in belief(), keep in 0usize..N, mask in prop::collection::vec(any::<bool>(), N), g in values()) {
        let branch: Vec<bool> = (0..N).map(|i| i == keep || mask[i]).collect();
        let post = condition(&psi, &ObservationEvent::new(FiniteEvent::new(branch), ret(&g)).unwrap()).unwrap();
        let (zero, one) = post.normalization().unwrap();
        prop_assert!(zero.abs() <= 1e-9 && (one - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn bandit_histories_are_exchangeable(
        obs in prop::collection::vec((0usize..2, 0usize..2), 1..15),
        shift in 0usize..15,
    ) {
        let corners = [[0.3, 0.4], [0.3, 0.8], [0.7, 0.4], [0.7, 0.8]];
        let parts: Vec<_> = corners.iter().map(|c| Infradistribution::from_measure(BernoulliArms::point(c).unwrap())).collect();
        let prior = Infradistribution::mix_knightian(&parts).unwrap();
        let run = |seq: &[(usize, usize)]| {
            seq.iter().fold(prior.clone(), |b, &(arm, outcome)| {
                let ev = ObservationEvent::new(ArmObservation { arm, outcome }, OutcomeValues::indicator()).unwrap();
                condition(&b, &ev).unwrap()
            })
        };
        let mut rotated = obs.clone();
        rotated.rotate_left(shift % obs.len());
        let (a, b) = (run(&obs), run(&rotated));
        prop_assert_eq!(a.history(), b.history());
        for arm in 0..2 {
            let f = ArmReturn::pull(arm, 2, OutcomeValues::indicator()).unwrap();
            prop_assert!((a.lower_expectation(&f).unwrap() - b.lower_expectation(&f).unwrap()).abs() <= TOL);
        }
    }
}
