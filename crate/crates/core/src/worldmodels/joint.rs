use rand::Rng;

use super::{
    arm_expectation, arm_restriction, check_weights, ln_pow, log_sum_exp, normalize_log_weights,
    sample_index, ArmModel, ArmObservation, ArmReturn, OutcomeValues, Restriction, WorldModel,
};
use crate::error::{Error, Result};

/// One joint hypothesis: a categorical outcome distribution for every arm.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub weight: f64,
    /// `arm_outcomes[arm][outcome]`.
    pub arm_outcomes: Vec<Vec<f64>>,
}

/// A finite mixture of joint hypotheses over a stateless bandit.
///
/// Unlike [`super::BernoulliArms`] the arms need not be independent, and pulls
/// may have more than two outcomes. The history is the table of per-arm outcome
/// counts, which is sufficient because rounds are exchangeable.
#[derive(Debug, Clone, PartialEq)]
pub struct JointArms {
    hypotheses: Vec<Hypothesis>,
    arms: usize,
    outcomes: usize,
}

/// Per-arm outcome counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeCounts {
    counts: Vec<Vec<u64>>,
}

impl OutcomeCounts {
    pub fn new(arms: usize, outcomes: usize) -> Self {
        Self {
            counts: vec![vec![0; outcomes]; arms],
        }
    }

    pub fn count(&self, arm: usize, outcome: usize) -> u64 {
        self.counts[arm][outcome]
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.counts[arm].iter().sum()
    }
}

impl JointArms {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self> {
        let first = hypotheses
            .first()
            .ok_or_else(|| Error::Config("joint model needs at least one hypothesis".into()))?;
        let arms = first.arm_outcomes.len();
        let outcomes = first.arm_outcomes.first().map_or(0, Vec::len);
        if arms == 0 || outcomes == 0 {
            return Err(Error::Config(
                "joint hypotheses need arms and outcomes".into(),
            ));
        }
        for h in &hypotheses {
            if h.arm_outcomes.len() != arms || h.arm_outcomes.iter().any(|d| d.len() != outcomes) {
                return Err(Error::Config(
                    "joint hypotheses disagree on arm/outcome shape".into(),
                ));
            }
            for dist in &h.arm_outcomes {
                if dist.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(Error::Config(
                        "outcome probabilities must lie in [0, 1]".into(),
                    ));
                }
                check_weights(dist).map_err(|e| Error::Config(format!("arm distribution: {e}")))?;
            }
        }
        let weights: Vec<f64> = hypotheses.iter().map(|h| h.weight).collect();
        check_weights(&weights)?;
        Ok(Self {
            hypotheses,
            arms,
            outcomes,
        })
    }

    /// A single hypothesis with weight one.
    pub fn point(arm_outcomes: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vec![Hypothesis {
            weight: 1.0,
            arm_outcomes,
        }])
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    fn check_history(&self, h: &OutcomeCounts) -> Result<()> {
        if h.counts.len() != self.arms || h.counts.iter().any(|c| c.len() != self.outcomes) {
            return Err(Error::Representation(
                "history shape does not match joint model".into(),
            ));
        }
        Ok(())
    }

    fn log_likelihoods(&self, h: &OutcomeCounts) -> Vec<f64> {
        self.hypotheses
            .iter()
            .map(|hyp| {
                let mut ll = hyp.weight.ln();
                for (dist, counts) in hyp.arm_outcomes.iter().zip(&h.counts) {
                    for (&p, &n) in dist.iter().zip(counts) {
                        ll += ln_pow(p, n);
                    }
                }
                ll
            })
            .collect()
    }

    pub fn log_branch_probability(&self, h: &OutcomeCounts) -> Result<f64> {
        self.check_history(h)?;
        Ok(log_sum_exp(&self.log_likelihoods(h)))
    }

    pub fn posterior_weights(&self, h: &OutcomeCounts) -> Result<Vec<f64>> {
        self.check_history(h)?;
        let mut w = self.log_likelihoods(h);
        normalize_log_weights(&mut w).ok_or_else(|| {
            Error::DegenerateUpdate("history is impossible under every joint hypothesis".into())
        })?;
        Ok(w)
    }
}

impl WorldModel for JointArms {
    type History = OutcomeCounts;
    type Return = ArmReturn;
    type Indicator = ArmObservation;
    type OffBranch = OutcomeValues;

    fn empty_history(&self) -> OutcomeCounts {
        OutcomeCounts::new(self.arms, self.outcomes)
    }

    fn compatible(&self, other: &Self) -> bool {
        self.arms == other.arms && self.outcomes == other.outcomes
    }

    fn expectation(&self, history: &OutcomeCounts, f: &ArmReturn) -> Result<f64> {
        arm_expectation(self, history, f)
    }

    fn total_mass(&self, history: &OutcomeCounts) -> Result<f64> {
        self.check_history(history)?;
        Ok(1.0)
    }

    /// Concatenates hypothesis lists with scaled weights, merging identical tables.
    fn mix(parts: &[(&Self, f64)]) -> Result<Self> {
        let weights: Vec<f64> = parts.iter().map(|(_, w)| *w).collect();
        check_weights(&weights)?;
        let (arms, outcomes) = (parts[0].0.arms, parts[0].0.outcomes);
        if parts
            .iter()
            .any(|(m, _)| m.arms != arms || m.outcomes != outcomes)
        {
            return Err(Error::Representation(
                "mixed joint models differ in shape".into(),
            ));
        }
        let mut hypotheses: Vec<Hypothesis> = Vec::new();
        for (m, w) in parts {
            for h in &m.hypotheses {
                let weight = w * h.weight;
                if weight == 0.0 {
                    continue;
                }
                match hypotheses
                    .iter_mut()
                    .find(|e| e.arm_outcomes == h.arm_outcomes)
                {
                    Some(e) => e.weight += weight,
                    None => hypotheses.push(Hypothesis {
                        weight,
                        arm_outcomes: h.arm_outcomes.clone(),
                    }),
                }
            }
        }
        Ok(Self {
            hypotheses,
            arms,
            outcomes,
        })
    }

    fn restrict(
        &self,
        history: &OutcomeCounts,
        indicator: &ArmObservation,
        offbranch: &OutcomeValues,
    ) -> Result<Restriction<Self>> {
        arm_restriction(self, history, indicator, offbranch)
    }
}

impl ArmModel for JointArms {
    fn arm_count(&self) -> usize {
        self.arms
    }

    fn outcome_count(&self) -> usize {
        self.outcomes
    }

    fn outcome_distribution(&self, history: &OutcomeCounts, arm: usize) -> Result<Vec<f64>> {
        if arm >= self.arms {
            return Err(Error::Representation(format!("arm {arm} out of range")));
        }
        let w = self.posterior_weights(history)?;
        let mut dist = vec![0.0; self.outcomes];
        for (w, h) in w.iter().zip(&self.hypotheses) {
            for (acc, p) in dist.iter_mut().zip(&h.arm_outcomes[arm]) {
                *acc += w * p;
            }
        }
        Ok(dist)
    }

    fn sample_arm_distributions<R: Rng + ?Sized>(
        &self,
        history: &OutcomeCounts,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        let w = self.posterior_weights(history)?;
        Ok(self.hypotheses[sample_index(&w, rng)].arm_outcomes.clone())
    }

    fn record(&self, history: &OutcomeCounts, obs: ArmObservation) -> Result<OutcomeCounts> {
        self.check_history(history)?;
        if obs.arm >= self.arms || obs.outcome >= self.outcomes {
            return Err(Error::Representation(format!(
                "observation (arm {}, outcome {}) out of range",
                obs.arm, obs.outcome
            )));
        }
        let mut next = history.clone();
        next.counts[obs.arm][obs.outcome] += 1;
        Ok(next)
    }
}
