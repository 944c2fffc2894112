//! Maximin policy selection over a discretized policy space, and the classical
//! Bayesian baselines that share the same world models.

use rand::Rng;

use crate::error::{Error, Result};
use crate::inframeasure::{Infradistribution, TIE_TOLERANCE};
use crate::rng::StreamRng;
use crate::update::{condition, renormalize, update_infra, ObservationEvent, DEGENERACY_TOLERANCE};
use crate::worldmodels::{
    check_weights, sample_index, ArmModel, ArmObservation, ArmReturn, NewcombMeasure,
    NewcombObservation, NewcombReturn, OutcomeValues, WorldModel, ONE_BOX,
};

/// Largest allowed deviation of `E(0)` from 0 and `E(1)` from 1 after an update.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A distribution over a finite action set.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    action_probs: Vec<f64>,
}

impl Policy {
    pub fn new(action_probs: Vec<f64>) -> Result<Self> {
        check_weights(&action_probs)?;
        Ok(Self { action_probs })
    }

    pub fn deterministic(action: usize, action_count: usize) -> Result<Self> {
        if action >= action_count {
            return Err(Error::Config(format!(
                "action {action} out of range for {action_count} actions"
            )));
        }
        let mut action_probs = vec![0.0; action_count];
        action_probs[action] = 1.0;
        Ok(Self { action_probs })
    }

    pub fn action_probs(&self) -> &[f64] {
        &self.action_probs
    }

    pub fn action_count(&self) -> usize {
        self.action_probs.len()
    }

    pub fn prob(&self, action: usize) -> f64 {
        self.action_probs[action]
    }

    /// The action taken with certainty, if any.
    pub fn as_deterministic(&self) -> Option<usize> {
        self.action_probs.iter().position(|&p| p == 1.0)
    }
}

/// Candidate policies searched by the maximin agent.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGrid {
    policies: Vec<Policy>,
    step: f64,
}

/// All policies whose probabilities are multiples of `step`. For two actions the
/// grid lists the probability of action 0 as `0, step, 2·step, …, 1`.
pub fn policy_grid(action_count: usize, step: f64) -> Result<PolicyGrid> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Config(format!(
            "policy grid step {step} outside (0, 1]"
        )));
    }
    if action_count == 0 {
        return Err(Error::Config(
            "policy grid needs at least one action".into(),
        ));
    }
    let inverse = 1.0 / step;
    let divisions = inverse.round();
    let integral = (inverse - divisions).abs() < 1e-9;
    let levels: Vec<f64> = if integral {
        let m = divisions as usize;
        (0..=m).map(|i| i as f64 / m as f64).collect()
    } else if action_count <= 2 {
        let mut v: Vec<f64> = (0..)
            .map(|i| i as f64 * step)
            .take_while(|x| *x < 1.0 - 1e-12)
            .collect();
        v.push(1.0);
        v
    } else {
        return Err(Error::Config(format!(
            "grid step {step} must divide 1 evenly for {action_count} actions"
        )));
    };

    let policies = match action_count {
        1 => vec![Policy {
            action_probs: vec![1.0],
        }],
        2 => levels
            .iter()
            .map(|&x| Policy {
                action_probs: vec![x, 1.0 - x],
            })
            .collect(),
        _ => {
            let m = divisions as usize;
            let mut out = Vec::new();
            compositions(m, action_count, &mut Vec::new(), &mut out);
            out.into_iter()
                .map(|parts| Policy {
                    action_probs: parts.iter().map(|&c| c as f64 / m as f64).collect(),
                })
                .collect()
        }
    };
    Ok(PolicyGrid { policies, step })
}

fn compositions(
    remaining: usize,
    slots: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if slots == 1 {
        let mut full = prefix.clone();
        full.push(remaining);
        out.push(full);
        return;
    }
    for c in (0..=remaining).rev() {
        prefix.push(c);
        compositions(remaining - c, slots - 1, prefix, out);
        prefix.pop();
    }
}

impl PolicyGrid {
    /// The one-hot policies, in action order.
    pub fn deterministic(action_count: usize) -> Result<Self> {
        if action_count == 0 {
            return Err(Error::Config(
                "policy grid needs at least one action".into(),
            ));
        }
        let policies = (0..action_count)
            .map(|k| Policy::deterministic(k, action_count))
            .collect::<Result<_>>()?;
        Ok(Self {
            policies,
            step: 1.0,
        })
    }

    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn action_count(&self) -> usize {
        self.policies[0].action_count()
    }
}

/// Indices whose value is within [`TIE_TOLERANCE`] of the maximum.
pub fn argmax_set(values: &[f64]) -> Vec<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len())
        .filter(|&i| values[i] >= max - TIE_TOLERANCE)
        .collect()
}

/// Uniform choice among the near-maximal indices. Always consumes exactly one
/// uniform draw, so agents that break ties through here stay in lockstep.
pub fn break_ties<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    assert!(!values.is_empty(), "cannot break ties over an empty set");
    let candidates = argmax_set(values);
    let u: f64 = rng.random();
    candidates[((u * candidates.len() as f64) as usize).min(candidates.len() - 1)]
}

/// Samples an action from `policy` with one uniform draw.
pub fn act<R: Rng + ?Sized>(policy: &Policy, rng: &mut R) -> usize {
    sample_index(&policy.action_probs, rng)
}

/// Decision rule of an [`Agent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    IbMaximin,
    BayesGreedy,
    BayesThompson,
}

impl Flavor {
    pub fn label(self) -> &'static str {
        match self {
            Flavor::IbMaximin => "infra_bayesian",
            Flavor::BayesGreedy => "bayes_greedy",
            Flavor::BayesThompson => "bayes_thompson",
        }
    }
}

/// Where the worst case is taken when a bandit policy randomizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvaluationOrder {
    /// `min_a a(Σ_k π_k f_k)`: the adversary answers the whole mixed policy.
    #[default]
    MixThenMin,
    /// `Σ_k π_k min_a a(f_k)`: each action faces its own worst case.
    MinThenMix,
}

/// Maps policies to the return functions a belief is evaluated on, and supplies
/// the off-branch return used when conditioning.
pub trait Evaluator<W: WorldModel>: Clone + std::fmt::Debug + Send + Sync {
    fn action_count(&self) -> usize;

    fn policy_value(&self, belief: &Infradistribution<W>, policy: &Policy) -> Result<f64>;

    fn offbranch(&self) -> W::OffBranch;
}

/// One-step bandit return: the per-outcome values credited to each pull.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEvaluator {
    arms: usize,
    values: OutcomeValues,
    order: EvaluationOrder,
}

impl BanditEvaluator {
    pub fn new(arms: usize, values: OutcomeValues, order: EvaluationOrder) -> Self {
        Self {
            arms,
            values,
            order,
        }
    }

    /// Bernoulli rewards in `{0, 1}`.
    pub fn bernoulli(arms: usize) -> Self {
        Self::new(arms, OutcomeValues::indicator(), EvaluationOrder::default())
    }

    pub fn values(&self) -> &OutcomeValues {
        &self.values
    }

    pub fn order(&self) -> EvaluationOrder {
        self.order
    }
}

impl<M: ArmModel> Evaluator<M> for BanditEvaluator {
    fn action_count(&self) -> usize {
        self.arms
    }

    fn policy_value(&self, belief: &Infradistribution<M>, policy: &Policy) -> Result<f64> {
        match self.order {
            EvaluationOrder::MixThenMin => belief.lower_expectation(&ArmReturn::policy(
                policy.action_probs.clone(),
                self.values.clone(),
            )?),
            EvaluationOrder::MinThenMix => {
                let mut total = 0.0;
                for (k, &pk) in policy.action_probs.iter().enumerate() {
                    if pk > 0.0 {
                        let f = ArmReturn::pull(k, self.arms, self.values.clone())?;
                        total += pk * belief.lower_expectation(&f)?;
                    }
                }
                Ok(total)
            }
        }
    }

    fn offbranch(&self) -> OutcomeValues {
        self.values.clone()
    }
}

/// Newcomb payoff evaluated under the predictor's response to the policy.
#[derive(Debug, Clone, PartialEq)]
pub struct NewcombEvaluator {
    payoff: [[f64; 2]; 2],
}

impl NewcombEvaluator {
    pub fn new(payoff: [[f64; 2]; 2]) -> Self {
        Self { payoff }
    }
}

impl Evaluator<NewcombMeasure> for NewcombEvaluator {
    fn action_count(&self) -> usize {
        2
    }

    fn policy_value(
        &self,
        belief: &Infradistribution<NewcombMeasure>,
        policy: &Policy,
    ) -> Result<f64> {
        if policy.action_count() != 2 {
            return Err(Error::Representation(
                "Newcomb policies cover exactly two actions".into(),
            ));
        }
        belief.lower_expectation(&NewcombReturn::new(policy.prob(ONE_BOX), self.payoff)?)
    }

    fn offbranch(&self) {}
}

/// A belief plus the machinery to act on it.
#[derive(Debug, Clone)]
pub struct Agent<W: WorldModel, E: Evaluator<W>> {
    flavor: Flavor,
    belief: Infradistribution<W>,
    evaluator: E,
    grid: PolicyGrid,
    rng: StreamRng,
    fallbacks: usize,
}

pub type BanditAgent<M> = Agent<M, BanditEvaluator>;
pub type NewcombAgent = Agent<NewcombMeasure, NewcombEvaluator>;

fn check_normalized<W: WorldModel>(belief: &Infradistribution<W>) -> Result<()> {
    let (zero, one) = belief.normalization()?;
    if zero.abs() > NORMALIZATION_TOLERANCE || (one - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Contract(format!(
            "belief is not normalized: E(0) = {zero}, E(1) = {one}"
        )));
    }
    Ok(())
}

impl<W: WorldModel, E: Evaluator<W>> Agent<W, E> {
    /// The belief must already be normalized.
    pub fn new(
        flavor: Flavor,
        belief: Infradistribution<W>,
        evaluator: E,
        grid: PolicyGrid,
        rng: StreamRng,
    ) -> Result<Self> {
        if grid.action_count() != evaluator.action_count() {
            return Err(Error::Config(format!(
                "policy grid covers {} actions, problem has {}",
                grid.action_count(),
                evaluator.action_count()
            )));
        }
        check_normalized(&belief).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            flavor,
            belief,
            evaluator,
            grid,
            rng,
            fallbacks: 0,
        })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn belief(&self) -> &Infradistribution<W> {
        &self.belief
    }

    pub fn grid(&self) -> &PolicyGrid {
        &self.grid
    }

    pub fn evaluator(&self) -> &E {
        &self.evaluator
    }

    /// Number of updates that had to drop refuted points.
    pub fn degenerate_fallbacks(&self) -> usize {
        self.fallbacks
    }

    pub fn policy_value(&self, policy: &Policy) -> Result<f64> {
        self.evaluator.policy_value(&self.belief, policy)
    }

    /// Values of every grid policy, in grid order.
    pub fn grid_values(&self) -> Result<Vec<f64>> {
        self.grid
            .policies
            .iter()
            .map(|p| self.policy_value(p))
            .collect()
    }

    /// A maximin policy from the grid, ties broken uniformly.
    pub fn select_policy(&mut self) -> Result<Policy> {
        let values = self.grid_values()?;
        Ok(self.grid.policies[break_ties(&values, &mut self.rng)].clone())
    }

    pub fn act(&mut self, policy: &Policy) -> usize {
        act(policy, &mut self.rng)
    }

    /// Conditions the belief on one observation.
    ///
    /// If the observation has zero lower probability, the points that assign it
    /// zero mass are dropped and the rest renormalized; the update fails only
    /// when no point survives. The result is checked to be normalized.
    pub fn ib_observe(&mut self, indicator: W::Indicator) -> Result<()> {
        let ev = ObservationEvent::new(indicator, self.evaluator.offbranch())?;
        let next = match condition(&self.belief, &ev) {
            Ok(next) => next,
            Err(Error::DegenerateUpdate(_)) => {
                let raw = update_infra(&self.belief, &ev)?;
                let mut survivors = Vec::new();
                for a in raw.points() {
                    if a.mass()? > DEGENERACY_TOLERANCE {
                        survivors.push(a.clone());
                    }
                }
                if survivors.is_empty() {
                    return Err(Error::DegenerateUpdate(
                        "every point of the belief assigns the observation zero probability".into(),
                    ));
                }
                self.fallbacks += 1;
                renormalize(&Infradistribution::from_points_unchecked(survivors))?.prune()
            }
            Err(e) => return Err(e),
        };
        check_normalized(&next)?;
        self.belief = next;
        Ok(())
    }
}

impl<M: ArmModel> Agent<M, BanditEvaluator> {
    fn classical_point(&self) -> Result<&crate::AMeasure<M>> {
        match self.belief.points() {
            [a] => Ok(a),
            _ => Err(Error::Contract(format!(
                "Bayesian selection needs a single classical a-measure, belief has {} points",
                self.belief.len()
            ))),
        }
    }

    /// Greedy or Thompson arm choice on a classical belief.
    pub fn bayes_select(&mut self) -> Result<usize> {
        let a = self.classical_point()?;
        let (measure, history) = (a.measure().clone(), a.history().clone());
        let values = &self.evaluator.values;
        let arm_values: Vec<f64> = match self.flavor {
            Flavor::BayesGreedy => (0..self.evaluator.arms)
                .map(|k| Ok(values.expect(&measure.outcome_distribution(&history, k)?)))
                .collect::<Result<_>>()?,
            Flavor::BayesThompson => measure
                .sample_arm_distributions(&history, &mut self.rng)?
                .iter()
                .map(|d| values.expect(d))
                .collect(),
            Flavor::IbMaximin => {
                return Err(Error::Contract(
                    "bayes_select called on a maximin agent".into(),
                ))
            }
        };
        Ok(break_ties(&arm_values, &mut self.rng))
    }

    /// The policy handed to the environment and the sampled action.
    pub fn decide(&mut self) -> Result<(Policy, usize)> {
        let policy = match self.flavor {
            Flavor::IbMaximin => self.select_policy()?,
            Flavor::BayesGreedy | Flavor::BayesThompson => {
                Policy::deterministic(self.bayes_select()?, self.evaluator.arms)?
            }
        };
        let action = self.act(&policy);
        Ok((policy, action))
    }

    /// IB conditioning for maximin agents; a plain posterior update otherwise.
    pub fn observe(&mut self, obs: ArmObservation) -> Result<()> {
        match self.flavor {
            Flavor::IbMaximin => self.ib_observe(obs),
            Flavor::BayesGreedy | Flavor::BayesThompson => {
                let a = self.classical_point()?;
                let history = a.measure().record(a.history(), obs)?;
                let next = crate::AMeasure::from_parts(
                    a.scale(),
                    a.measure().clone(),
                    a.offset(),
                    history,
                );
                self.belief = Infradistribution::singleton(next);
                Ok(())
            }
        }
    }
}

impl Agent<NewcombMeasure, NewcombEvaluator> {
    pub fn decide(&mut self) -> Result<(Policy, usize)> {
        if self.flavor != Flavor::IbMaximin {
            return Err(Error::Contract(
                "Newcomb agents use maximin selection".into(),
            ));
        }
        let policy = self.select_policy()?;
        let action = self.act(&policy);
        Ok((policy, action))
    }

    pub fn observe(&mut self, obs: NewcombObservation) -> Result<()> {
        self.ib_observe(obs)
    }
}
