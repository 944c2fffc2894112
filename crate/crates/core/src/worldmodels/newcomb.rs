use super::{check_probability, check_weights, Restriction, ReturnFunction, WorldModel};
use crate::error::{Error, Result};

pub const ONE_BOX: usize = 0;
pub const TWO_BOX: usize = 1;

/// Reward structure of Newcomb's problem with an imperfect predictor.
///
/// `reward[action][prediction]`, both indexed by [`ONE_BOX`] / [`TWO_BOX`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewcombModel {
    reward: [[f64; 2]; 2],
    accuracy: f64,
}

impl NewcombModel {
    pub fn new(reward: [[f64; 2]; 2], accuracy: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&accuracy) {
            return Err(Error::Config(format!(
                "predictor accuracy {accuracy} outside [0.5, 1]"
            )));
        }
        if reward.iter().flatten().any(|r| !r.is_finite()) {
            return Err(Error::Config("reward matrix entries must be finite".into()));
        }
        Ok(Self { reward, accuracy })
    }

    /// The $1 / $10 payoffs: one-boxing earns 10 or 0, two-boxing 11 or 1.
    pub const STANDARD_REWARD: [[f64; 2]; 2] = [[10.0, 0.0], [11.0, 1.0]];

    pub fn standard(accuracy: f64) -> Result<Self> {
        Self::new(Self::STANDARD_REWARD, accuracy)
    }

    pub fn reward(&self) -> [[f64; 2]; 2] {
        self.reward
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }
}

/// Probability that the predictor foresees one-boxing for a policy that
/// one-boxes with probability `p`.
pub fn newcomb_prediction_prob(p: f64, accuracy: f64) -> Result<f64> {
    check_probability(p, "one-boxing probability")?;
    if !(0.5..=1.0).contains(&accuracy) {
        return Err(Error::Config(format!(
            "predictor accuracy {accuracy} outside [0.5, 1]"
        )));
    }
    Ok(p * (2.0 * accuracy - 1.0) + 0.5 * (2.0 - 2.0 * accuracy))
}

fn joint(p: f64, model: &NewcombModel) -> Result<[[f64; 2]; 2]> {
    let q = newcomb_prediction_prob(p, model.accuracy)?;
    let act = [p, 1.0 - p];
    let pred = [q, 1.0 - q];
    Ok([
        [act[0] * pred[0], act[0] * pred[1]],
        [act[1] * pred[0], act[1] * pred[1]],
    ])
}

/// Expected reward of the policy `p`. The prediction depends on the policy,
/// not on the sampled action.
pub fn newcomb_expected_reward(p: f64, model: &NewcombModel) -> Result<f64> {
    expect_payoff(&joint(p, model)?, &model.reward)
}

/// Variance of a single episode's reward under policy `p`.
pub fn newcomb_reward_variance(p: f64, model: &NewcombModel) -> Result<f64> {
    let probs = joint(p, model)?;
    let mean = expect_payoff(&probs, &model.reward)?;
    let second = expect_payoff(&probs, &model.reward.map(|row| row.map(|r| r * r)))?;
    Ok((second - mean * mean).max(0.0))
}

fn expect_payoff(probs: &[[f64; 2]; 2], payoff: &[[f64; 2]; 2]) -> Result<f64> {
    Ok((0..2)
        .flat_map(|a| (0..2).map(move |b| (a, b)))
        .map(|(a, b)| probs[a][b] * payoff[a][b])
        .sum())
}

/// Newcomb measures carry the full environment structure and no state; they are
/// never updated by observations.
#[derive(Debug, Clone, PartialEq)]
pub struct NewcombMeasure {
    model: NewcombModel,
}

impl NewcombMeasure {
    pub fn new(model: NewcombModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &NewcombModel {
        &self.model
    }
}

/// Payoff entries evaluated under a one-boxing probability.
#[derive(Debug, Clone, PartialEq)]
pub struct NewcombReturn {
    pub one_box_prob: f64,
    pub payoff: [[f64; 2]; 2],
}

impl NewcombReturn {
    pub fn new(one_box_prob: f64, payoff: [[f64; 2]; 2]) -> Result<Self> {
        check_probability(one_box_prob, "one-boxing probability")?;
        Ok(Self {
            one_box_prob,
            payoff,
        })
    }
}

impl ReturnFunction for NewcombReturn {
    fn bounds(&self) -> (f64, f64) {
        let flat = self.payoff.iter().flatten();
        let lo = flat.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = flat.copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// The agent's action and the predictor's guess in one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NewcombObservation {
    pub action: usize,
    pub prediction: usize,
}

impl WorldModel for NewcombMeasure {
    type History = ();
    type Return = NewcombReturn;
    type Indicator = NewcombObservation;
    type OffBranch = ();

    fn empty_history(&self) {}

    fn compatible(&self, other: &Self) -> bool {
        self.model == other.model
    }

    fn expectation(&self, _: &(), f: &NewcombReturn) -> Result<f64> {
        expect_payoff(&joint(f.one_box_prob, &self.model)?, &f.payoff)
    }

    fn total_mass(&self, _: &()) -> Result<f64> {
        Ok(1.0)
    }

    fn mix(parts: &[(&Self, f64)]) -> Result<Self> {
        let weights: Vec<f64> = parts.iter().map(|(_, w)| *w).collect();
        check_weights(&weights)?;
        let first = parts[0].0;
        if parts.iter().any(|(m, _)| !m.compatible(first)) {
            return Err(Error::Representation(
                "cannot mix different Newcomb structures".into(),
            ));
        }
        Ok(first.clone())
    }

    fn restrict(&self, _: &(), _: &NewcombObservation, _: &()) -> Result<Restriction<Self>> {
        Ok(Restriction {
            measure: self.clone(),
            history: (),
            scale_factor: 1.0,
            offbranch: 0.0,
        })
    }
}
