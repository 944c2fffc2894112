//! Compressed measure and history representations.
//!
//! An a-measure never stores a measure over full history trees. Each environment
//! type supplies a [`WorldModel`] realization that knows how to take expectations
//! of its return functions, restrict itself to an observed branch, and form
//! weighted mixtures:
//!
//! - [`FiniteMeasure`]: explicit masses over a small outcome set. Used as the
//!   testing oracle and the only model with componentwise-domination pruning.
//! - [`BernoulliArms`]: per-arm mixtures `(c_i, p_i)` with `(N, R)` count histories.
//! - [`JointArms`]: joint hypotheses over categorical per-arm outcome
//!   distributions, for bandits whose arms are coupled (the trap bandit).
//! - [`NewcombMeasure`]: stateless carrier of a Newcomb reward structure.

mod bernoulli;
mod finite;
mod joint;
mod newcomb;

pub use bernoulli::{ArmCounts, BanditHistory, BernoulliArms, BernoulliComponent};
pub use finite::{FiniteEvent, FiniteMeasure, FiniteReturn};
pub use joint::{Hypothesis, JointArms, OutcomeCounts};
pub use newcomb::{
    newcomb_expected_reward, newcomb_prediction_prob, newcomb_reward_variance, NewcombMeasure,
    NewcombModel, NewcombObservation, NewcombReturn, ONE_BOX, TWO_BOX,
};

use std::fmt::Debug;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on mixture weights summing to one.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// A bounded real-valued function of world-model outcomes.
pub trait ReturnFunction {
    /// Declared `[f_min, f_max]`.
    fn bounds(&self) -> (f64, f64);
}

impl ReturnFunction for () {
    fn bounds(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Result of restricting a measure to an observed branch `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction<W: WorldModel> {
    pub measure: W,
    pub history: W::History,
    /// Multiplier for the a-measure's scale. Normalized representations fold
    /// `μ(L)` in here; representations that keep the restricted mass use 1.
    pub scale_factor: f64,
    /// `μ((1 - L) g)` under the current (pre-restriction) measure.
    pub offbranch: f64,
}

/// A compressed representation of the probability component `μ` of an a-measure.
pub trait WorldModel: Clone + PartialEq + Debug + Send + Sync + Sized {
    type History: Clone + PartialEq + Debug + Send + Sync;
    /// Return functions this model can evaluate.
    type Return: ReturnFunction;
    /// The realized branch of one observation.
    type Indicator: Clone + Debug;
    /// Return function used for ruled-out branches during a raw update.
    type OffBranch: ReturnFunction;

    /// History with no observations.
    fn empty_history(&self) -> Self::History;

    /// Whether two measures live over the same outcome space.
    fn compatible(&self, other: &Self) -> bool;

    /// `E_μ[f | history]`.
    fn expectation(&self, history: &Self::History, f: &Self::Return) -> Result<f64>;

    /// `E_μ[1 | history]`: 1 for normalized representations.
    fn total_mass(&self, history: &Self::History) -> Result<f64>;

    /// Weighted combination of measures; weights are nonnegative and sum to 1.
    fn mix(parts: &[(&Self, f64)]) -> Result<Self>;

    fn restrict(
        &self,
        history: &Self::History,
        indicator: &Self::Indicator,
        offbranch: &Self::OffBranch,
    ) -> Result<Restriction<Self>>;

    /// Explicit outcome masses, when the model has them. Only explicit models
    /// take part in componentwise-domination pruning.
    fn effective_masses(&self) -> Option<Vec<f64>> {
        None
    }
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Config("mixture needs at least one weight".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::Config(format!(
            "mixture weight {w} is not a nonnegative real"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::Config(format!(
            "mixture weights sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

pub(crate) fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("{what} = {p} is outside [0, 1]")));
    }
    Ok(())
}

/// `n · ln(x)` with the convention `0 · ln 0 = 0`.
pub(crate) fn ln_pow(x: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * x.ln()
    }
}

/// Normalizes log-weights in place to probabilities. Returns `None` when every
/// weight is zero.
pub(crate) fn normalize_log_weights(log_w: &mut [f64]) -> Option<()> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let mut total = 0.0;
    for w in log_w.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    for w in log_w.iter_mut() {
        *w /= total;
    }
    Some(())
}

/// Log of `Σ_i exp(x_i)`.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Reward convention for a bandit: the value of each per-pull outcome index.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeValues {
    values: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl OutcomeValues {
    /// Bounds are taken as the extremes of `values`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "outcome values must be finite and nonempty".into(),
            ));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { values, lo, hi })
    }

    pub fn with_bounds(values: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        let v = Self::new(values)?;
        if lo > v.lo || hi < v.hi {
            return Err(Error::Config(format!(
                "outcome values [{}, {}] escape declared bounds [{lo}, {hi}]",
                v.lo, v.hi
            )));
        }
        Ok(Self { lo, hi, ..v })
    }

    /// Bernoulli reward indicator: outcome 0 is a failure, outcome 1 a success.
    pub fn indicator() -> Self {
        Self {
            values: vec![0.0, 1.0],
            lo: 0.0,
            hi: 1.0,
        }
    }

    /// The same convention affinely mapped onto `[0, 1]` via its bounds.
    pub fn normalized(&self) -> Self {
        let width = self.hi - self.lo;
        if width <= 0.0 {
            return Self {
                values: vec![0.0; self.values.len()],
                lo: 0.0,
                hi: 0.0,
            };
        }
        Self {
            values: self.values.iter().map(|v| (v - self.lo) / width).collect(),
            lo: 0.0,
            hi: 1.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_o P(o) v(o)`.
    pub fn expect(&self, dist: &[f64]) -> f64 {
        dist.iter().zip(&self.values).map(|(p, v)| p * v).sum()
    }
}

impl ReturnFunction for OutcomeValues {
    fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// One-step return of a bandit under an action distribution: `Σ_k π_k E[v | arm k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmReturn {
    action_probs: Vec<f64>,
    values: OutcomeValues,
}

impl ArmReturn {
    pub fn policy(action_probs: Vec<f64>, values: OutcomeValues) -> Result<Self> {
        check_weights(&action_probs)?;
        Ok(Self {
            action_probs,
            values,
        })
    }

    /// Deterministically pulling `arm` out of `arm_count`.
    pub fn pull(arm: usize, arm_count: usize, values: OutcomeValues) -> Result<Self> {
        if arm >= arm_count {
            return Err(Error::Config(format!(
                "arm {arm} out of range for {arm_count} arms"
            )));
        }
        let mut probs = vec![0.0; arm_count];
        probs[arm] = 1.0;
        Ok(Self {
            action_probs: probs,
            values,
        })
    }

    pub fn action_probs(&self) -> &[f64] {
        &self.action_probs
    }

    pub fn values(&self) -> &OutcomeValues {
        &self.values
    }
}

impl ReturnFunction for ArmReturn {
    fn bounds(&self) -> (f64, f64) {
        self.values.bounds()
    }
}

/// Arm `arm` produced outcome index `outcome`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmObservation {
    pub arm: usize,
    pub outcome: usize,
}

/// World models for stateless multi-armed bandits.
pub trait ArmModel:
    WorldModel<Return = ArmReturn, Indicator = ArmObservation, OffBranch = OutcomeValues>
{
    fn arm_count(&self) -> usize;

    /// Number of distinct per-pull outcomes.
    fn outcome_count(&self) -> usize;

    /// Posterior-predictive distribution over the next outcome of `arm`.
    fn outcome_distribution(&self, history: &Self::History, arm: usize) -> Result<Vec<f64>>;

    /// Draws one hypothesis from the posterior and returns its per-arm outcome
    /// distributions.
    fn sample_arm_distributions<R: Rng + ?Sized>(
        &self,
        history: &Self::History,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>>;

    /// Records an observation in the history without touching the measure.
    fn record(&self, history: &Self::History, obs: ArmObservation) -> Result<Self::History>;
}

pub(crate) fn arm_expectation<M: ArmModel>(
    model: &M,
    history: &M::History,
    f: &ArmReturn,
) -> Result<f64> {
    if f.action_probs.len() != model.arm_count() {
        return Err(Error::Representation(format!(
            "return function covers {} arms, model has {}",
            f.action_probs.len(),
            model.arm_count()
        )));
    }
    if f.values.len() != model.outcome_count() {
        return Err(Error::Representation(format!(
            "return function covers {} outcomes, model has {}",
            f.values.len(),
            model.outcome_count()
        )));
    }
    let mut acc = 0.0;
    for (arm, &pk) in f.action_probs.iter().enumerate() {
        if pk > 0.0 {
            acc += pk * f.values.expect(&model.outcome_distribution(history, arm)?);
        }
    }
    Ok(acc)
}

pub(crate) fn arm_restriction<M: ArmModel>(
    model: &M,
    history: &M::History,
    obs: &ArmObservation,
    g: &OutcomeValues,
) -> Result<Restriction<M>> {
    if g.len() != model.outcome_count() {
        return Err(Error::Representation(format!(
            "off-branch return covers {} outcomes, model has {}",
            g.len(),
            model.outcome_count()
        )));
    }
    let next = model.record(history, *obs)?;
    let (scale_factor, offbranch) = match model.outcome_distribution(history, obs.arm) {
        Ok(dist) => {
            let off = dist
                .iter()
                .zip(g.values())
                .enumerate()
                .filter(|(o, _)| *o != obs.outcome)
                .map(|(_, (p, v))| p * v)
                .sum();
            (dist[obs.outcome], off)
        }
        // The current history is already impossible: the restricted measure is zero.
        Err(Error::DegenerateUpdate(_)) => (0.0, 0.0),
        Err(e) => return Err(e),
    };
    Ok(Restriction {
        measure: model.clone(),
        history: next,
        scale_factor,
        offbranch,
    })
}

pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_sum_to_one() {
        assert!(check_weights(&[0.5, 0.5]).is_ok());
        assert!(check_weights(&[0.5, 0.5 + 1e-10]).is_ok());
        assert!(matches!(check_weights(&[0.5, 0.6]), Err(Error::Config(_))));
        assert!(matches!(check_weights(&[1.5, -0.5]), Err(Error::Config(_))));
    }

    #[test]
    fn normalized_outcome_values() {
        let v = OutcomeValues::new(vec![-1000.0, 0.0, 1.0]).unwrap();
        let n = v.normalized();
        assert_eq!(n.values()[0], 0.0);
        assert_eq!(n.values()[2], 1.0);
        assert!((n.values()[1] - 1000.0 / 1001.0).abs() < 1e-15);
        assert_eq!(n.bounds(), (0.0, 1.0));
    }

    #[test]
    fn declared_bounds_must_cover_values() {
        assert!(OutcomeValues::with_bounds(vec![0.0, 1.0], 0.0, 2.0).is_ok());
        assert!(OutcomeValues::with_bounds(vec![0.0, 3.0], 0.0, 2.0).is_err());
    }

    #[test]
    fn log_weights_normalize() {
        let mut w = vec![0.5f64.ln(), 0.25f64.ln(), f64::NEG_INFINITY];
        normalize_log_weights(&mut w).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(w[2], 0.0);
        let mut dead = vec![f64::NEG_INFINITY; 2];
        assert!(normalize_log_weights(&mut dead).is_none());
    }
}
