//! Infra-Bayesian conditioning: raw per-point updates that move the expected
//! value of ruled-out branches into the offset, followed by a shared affine
//! renormalization of the whole set.

use crate::error::{Error, Result};
use crate::inframeasure::{AMeasure, Infradistribution};
use crate::worldmodels::{ReturnFunction, WorldModel};

/// `β − α` at or below this is treated as a zero-probability observation.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// An observed branch `L` together with the return `g` credited to the
/// branches it rules out.
#[derive(Debug, Clone)]
pub struct ObservationEvent<W: WorldModel> {
    indicator: W::Indicator,
    offbranch: W::OffBranch,
}

impl<W: WorldModel> ObservationEvent<W> {
    /// Fails when `g` can go negative, since offsets must stay nonnegative.
    pub fn new(indicator: W::Indicator, offbranch: W::OffBranch) -> Result<Self> {
        let (lo, _) = offbranch.bounds();
        if lo < 0.0 {
            return Err(Error::Config(format!(
                "off-branch return has lower bound {lo}; shift it to be nonnegative"
            )));
        }
        Ok(Self {
            indicator,
            offbranch,
        })
    }

    pub fn indicator(&self) -> &W::Indicator {
        &self.indicator
    }

    pub fn offbranch(&self) -> &W::OffBranch {
        &self.offbranch
    }
}

/// `(λμ, b) ↦ (λ·μL, b + λ·μ((1 − L)g))`.
pub fn raw_update<W: WorldModel>(a: &AMeasure<W>, ev: &ObservationEvent<W>) -> Result<AMeasure<W>> {
    let r = a
        .measure()
        .restrict(a.history(), &ev.indicator, &ev.offbranch)?;
    let scale = a.scale() * r.scale_factor;
    let offset = a.offset() + a.scale() * r.offbranch;
    Ok(AMeasure::from_parts(scale, r.measure, offset, r.history))
}

/// Raw update of every point; the point count is unchanged.
pub fn update_infra<W: WorldModel>(
    psi: &Infradistribution<W>,
    ev: &ObservationEvent<W>,
) -> Result<Infradistribution<W>> {
    let points = psi
        .points()
        .iter()
        .map(|a| raw_update(a, ev))
        .collect::<Result<Vec<_>>>()?;
    Ok(Infradistribution::from_points_unchecked(points))
}

/// Maps every point by `(λμ, b) ↦ (λμ/(β − α), (b − α)/(β − α))` with
/// `α = E_Ψ(0)` and `β = E_Ψ(1)`.
pub fn renormalize<W: WorldModel>(psi: &Infradistribution<W>) -> Result<Infradistribution<W>> {
    let alpha = psi
        .points()
        .iter()
        .map(AMeasure::offset)
        .fold(f64::INFINITY, f64::min);
    // β − α computed per point, so a singleton divides its own mass exactly
    let mut width = f64::INFINITY;
    for a in psi.points() {
        width = width.min(a.mass()? + (a.offset() - alpha));
    }
    // also catches a NaN width
    if width.is_nan() || width <= DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateUpdate(format!(
            "observation has lower probability {width:e}; belief cannot be renormalized"
        )));
    }
    let points = psi
        .points()
        .iter()
        .map(|a| {
            AMeasure::from_parts(
                a.scale() / width,
                a.measure().clone(),
                (a.offset() - alpha) / width,
                a.history().clone(),
            )
        })
        .collect();
    Ok(Infradistribution::from_points_unchecked(points))
}

/// Raw update, renormalization, then pruning.
pub fn condition<W: WorldModel>(
    psi: &Infradistribution<W>,
    ev: &ObservationEvent<W>,
) -> Result<Infradistribution<W>> {
    Ok(renormalize(&update_infra(psi, ev)?)?.prune())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmodels::{
        ArmObservation, ArmReturn, BernoulliArms, BernoulliComponent, FiniteEvent, FiniteMeasure,
        FiniteReturn, NewcombMeasure, NewcombModel, NewcombObservation, OutcomeValues,
    };

    fn bern(p: f64) -> AMeasure<BernoulliArms> {
        AMeasure::from_measure(BernoulliArms::point(&[p]).unwrap())
    }

    fn pull_event(outcome: usize) -> ObservationEvent<BernoulliArms> {
        ObservationEvent::new(
            ArmObservation { arm: 0, outcome },
            OutcomeValues::indicator(),
        )
        .unwrap()
    }

    fn finite(masses: &[f64], offset: f64) -> AMeasure<FiniteMeasure> {
        AMeasure::new(
            1.0,
            FiniteMeasure::new(masses.to_vec()).unwrap(),
            offset,
            (),
        )
        .unwrap()
    }

    #[test]
    fn raw_update_examples() {
        let failure = raw_update(&bern(0.6), &pull_event(0)).unwrap();
        assert!((failure.scale() - 0.4).abs() < 1e-15);
        assert!((failure.offset() - 0.6).abs() < 1e-15);
        assert_eq!(failure.history().counts(0).pulls, 1);

        let success = raw_update(&bern(0.6), &pull_event(1)).unwrap();
        assert!((success.scale() - 0.6).abs() < 1e-15);
        assert_eq!(success.offset(), 0.0);

        let zero_g = ObservationEvent::new(
            ArmObservation { arm: 0, outcome: 0 },
            OutcomeValues::new(vec![0.0, 0.0]).unwrap(),
        )
        .unwrap();
        let restricted = raw_update(&bern(0.6), &zero_g).unwrap();
        assert_eq!(restricted.offset(), 0.0);
    }

    #[test]
    fn negative_offbranch_rejected() {
        let g = OutcomeValues::new(vec![-1.0, 1.0]).unwrap();
        assert!(
            ObservationEvent::<BernoulliArms>::new(ArmObservation { arm: 0, outcome: 0 }, g)
                .is_err()
        );
    }

    #[test]
    fn renormalized_singleton_is_the_posterior() {
        let psi = Infradistribution::singleton(bern(0.6));
        let raw = update_infra(&psi, &pull_event(0)).unwrap();
        assert_eq!(raw.len(), 1);
        let norm = renormalize(&raw).unwrap();
        let a = &norm.points()[0];
        assert_eq!(a.scale(), 1.0);
        assert_eq!(a.offset(), 0.0);
        assert_eq!(norm.normalization().unwrap(), (0.0, 1.0));
    }

    #[test]
    fn renormalize_fixed_point_and_uniform_shift() {
        let psi = Infradistribution::new(vec![finite(&[0.6, 0.4], 0.0), finite(&[0.2, 0.8], 0.0)])
            .unwrap();
        let same = renormalize(&psi).unwrap();
        for (a, b) in psi.points().iter().zip(same.points()) {
            assert!((a.scale() - b.scale()).abs() < 1e-15);
            assert!((a.offset() - b.offset()).abs() < 1e-15);
        }
        let shifted =
            Infradistribution::new(vec![finite(&[0.3, 0.2], 0.25), finite(&[0.1, 0.4], 0.25)])
                .unwrap();
        let norm = renormalize(&shifted).unwrap();
        assert!(norm.points().iter().all(|a| a.offset() == 0.0));
        let (zero, one) = norm.normalization().unwrap();
        assert_eq!(zero, 0.0);
        assert!((one - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_renormalization() {
        let psi = Infradistribution::singleton(bern(0.0));
        let raw = update_infra(&psi, &pull_event(1)).unwrap();
        assert_eq!(raw.points()[0].scale(), 0.0);
        assert!(matches!(renormalize(&raw), Err(Error::DegenerateUpdate(_))));
        assert!(matches!(
            condition(&psi, &pull_event(1)),
            Err(Error::DegenerateUpdate(_))
        ));
    }

    #[test]
    fn bayes_weights_after_condition() {
        let prior = BernoulliArms::new(vec![vec![
            BernoulliComponent {
                weight: 0.5,
                p: 0.3,
            },
            BernoulliComponent {
                weight: 0.5,
                p: 0.7,
            },
        ]])
        .unwrap();
        let psi = Infradistribution::from_measure(prior);
        let post = condition(&psi, &pull_event(1)).unwrap();
        let a = &post.points()[0];
        let w = a.measure().posterior_weights(a.history(), 0).unwrap();
        assert!((w[0] - 0.3).abs() < 1e-12 && (w[1] - 0.7).abs() < 1e-12);

        // the same belief assembled as a classical mixture of singletons
        let mixed = Infradistribution::mix_classical(
            &[
                Infradistribution::singleton(bern(0.3)),
                Infradistribution::singleton(bern(0.7)),
            ],
            &[0.5, 0.5],
        )
        .unwrap();
        let post = condition(&mixed, &pull_event(1)).unwrap();
        let f = ArmReturn::pull(0, 1, OutcomeValues::indicator()).unwrap();
        let expected = 0.3 * 0.3 + 0.7 * 0.7;
        assert!((post.lower_expectation(&f).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn raw_update_is_linear_on_finite_models() {
        let a1 = finite(&[0.2, 0.5, 0.3], 0.1);
        let a2 = finite(&[0.6, 0.1, 0.2], 0.0);
        let ev = ObservationEvent::new(
            FiniteEvent::new(vec![true, false, true]),
            FiniteReturn::new(vec![0.3, 0.9, 0.5]).unwrap(),
        )
        .unwrap();
        for w in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let s = |a: &AMeasure<FiniteMeasure>| Infradistribution::singleton(a.clone());
            let mixed = Infradistribution::mix_classical(&[s(&a1), s(&a2)], &[w, 1.0 - w]).unwrap();
            let lhs = raw_update(&mixed.points()[0], &ev).unwrap();
            let (u1, u2) = (raw_update(&a1, &ev).unwrap(), raw_update(&a2, &ev).unwrap());
            let rhs = Infradistribution::mix_classical(&[s(&u1), s(&u2)], &[w, 1.0 - w]).unwrap();
            let rhs = &rhs.points()[0];
            assert!((lhs.offset() - rhs.offset()).abs() < 1e-12);
            let fl: Vec<f64> = lhs
                .measure()
                .masses()
                .iter()
                .map(|m| m * lhs.scale())
                .collect();
            let fr: Vec<f64> = rhs
                .measure()
                .masses()
                .iter()
                .map(|m| m * rhs.scale())
                .collect();
            for (x, y) in fl.iter().zip(&fr) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn raw_update_conserves_ex_ante_value() {
        let a = finite(&[0.2, 0.5, 0.3], 0.1);
        let f = FiniteReturn::new(vec![0.3, 0.9, 0.5]).unwrap();
        let ev = ObservationEvent::new(FiniteEvent::outcome(3, 1), f.clone()).unwrap();
        let u = raw_update(&a, &ev).unwrap();
        assert!((u.evaluate(&f).unwrap() - a.evaluate(&f).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn newcomb_condition_is_a_no_op() {
        let m = NewcombMeasure::new(NewcombModel::standard(0.8).unwrap());
        let psi = Infradistribution::from_measure(m);
        let ev = ObservationEvent::new(
            NewcombObservation {
                action: 1,
                prediction: 0,
            },
            (),
        )
        .unwrap();
        assert_eq!(condition(&psi, &ev).unwrap().points(), psi.points());
    }
}
