use rand::Rng;

use super::{
    arm_expectation, arm_restriction, check_probability, check_weights, ln_pow, log_sum_exp,
    normalize_log_weights, sample_index, ArmModel, ArmObservation, ArmReturn, OutcomeValues,
    Restriction, WorldModel,
};
use crate::error::{Error, Result};

/// One mixture component `(c, p)` of an arm's prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliComponent {
    pub weight: f64,
    pub p: f64,
}

/// Independent Bernoulli arms, each carrying a finite mixture over success
/// probabilities.
///
/// The measure itself is the prior; conditioning happens through the
/// [`BanditHistory`] and the scale of the enclosing a-measure.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliArms {
    arms: Vec<Vec<BernoulliComponent>>,
}

/// Pull and success counts `(N, R)` of one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ArmCounts {
    pub pulls: u64,
    pub successes: u64,
}

impl ArmCounts {
    pub fn failures(&self) -> u64 {
        self.pulls - self.successes
    }
}

/// Order-free history of a k-armed Bernoulli bandit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BanditHistory {
    arms: Vec<ArmCounts>,
}

impl BanditHistory {
    pub fn new(arm_count: usize) -> Self {
        Self {
            arms: vec![ArmCounts::default(); arm_count],
        }
    }

    pub fn from_counts(arms: Vec<ArmCounts>) -> Result<Self> {
        if let Some(c) = arms.iter().find(|c| c.successes > c.pulls) {
            return Err(Error::Config(format!(
                "history has {} successes out of {} pulls",
                c.successes, c.pulls
            )));
        }
        Ok(Self { arms })
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    pub fn counts(&self, arm: usize) -> ArmCounts {
        self.arms[arm]
    }

    /// Adds one pull of `arm`; counts a success iff `success`.
    pub fn observe(&self, arm: usize, success: bool) -> Result<Self> {
        if arm >= self.arms.len() {
            return Err(Error::Representation(format!(
                "arm {arm} out of range for a {}-armed history",
                self.arms.len()
            )));
        }
        let mut next = self.clone();
        next.arms[arm].pulls += 1;
        if success {
            next.arms[arm].successes += 1;
        }
        Ok(next)
    }
}

impl BernoulliArms {
    pub fn new(arms: Vec<Vec<BernoulliComponent>>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::Config("a bandit needs at least one arm".into()));
        }
        for (j, comps) in arms.iter().enumerate() {
            if comps.is_empty() {
                return Err(Error::Config(format!("arm {j} has no mixture components")));
            }
            for c in comps {
                check_probability(c.p, "success probability")?;
            }
            let weights: Vec<f64> = comps.iter().map(|c| c.weight).collect();
            check_weights(&weights).map_err(|e| Error::Config(format!("arm {j}: {e}")))?;
        }
        Ok(Self { arms })
    }

    /// A point hypothesis: arm `j` succeeds with probability `ps[j]`.
    pub fn point(ps: &[f64]) -> Result<Self> {
        Self::new(
            ps.iter()
                .map(|&p| vec![BernoulliComponent { weight: 1.0, p }])
                .collect(),
        )
    }

    /// Independent uniform priors over `grid` on each of `arm_count` arms.
    pub fn uniform_grid(arm_count: usize, grid: &[f64]) -> Result<Self> {
        let w = 1.0 / grid.len() as f64;
        let comps: Vec<BernoulliComponent> = grid
            .iter()
            .map(|&p| BernoulliComponent { weight: w, p })
            .collect();
        Self::new(vec![comps; arm_count])
    }

    pub fn components(&self, arm: usize) -> &[BernoulliComponent] {
        &self.arms[arm]
    }

    fn check_history(&self, h: &BanditHistory) -> Result<()> {
        if h.arm_count() != self.arms.len() {
            return Err(Error::Representation(format!(
                "history covers {} arms, measure has {}",
                h.arm_count(),
                self.arms.len()
            )));
        }
        Ok(())
    }

    fn log_likelihoods(&self, h: &BanditHistory, arm: usize) -> Vec<f64> {
        let counts = h.counts(arm);
        self.arms[arm]
            .iter()
            .map(|c| {
                c.weight.ln() + ln_pow(1.0 - c.p, counts.failures()) + ln_pow(c.p, counts.successes)
            })
            .collect()
    }

    /// `ln Π_j Σ_i c_ji (1 - p_ji)^(N_j - R_j) p_ji^R_j`.
    pub fn log_branch_probability(&self, h: &BanditHistory) -> Result<f64> {
        self.check_history(h)?;
        Ok((0..self.arms.len())
            .map(|j| log_sum_exp(&self.log_likelihoods(h, j)))
            .sum())
    }

    /// Probability of the specific ordered branch summarized by `h`.
    pub fn branch_probability(&self, h: &BanditHistory) -> Result<f64> {
        Ok(self.log_branch_probability(h)?.exp())
    }

    /// Posterior weights `c_i' ∝ c_i (1 - p_i)^(N - R) p_i^R` for one arm.
    pub fn posterior_weights(&self, h: &BanditHistory, arm: usize) -> Result<Vec<f64>> {
        self.check_history(h)?;
        if arm >= self.arms.len() {
            return Err(Error::Representation(format!("arm {arm} out of range")));
        }
        let mut w = self.log_likelihoods(h, arm);
        normalize_log_weights(&mut w).ok_or_else(|| {
            Error::DegenerateUpdate(format!(
                "history on arm {arm} is impossible under every component"
            ))
        })?;
        Ok(w)
    }

    /// Posterior-predictive success probability of the next pull of `arm`.
    pub fn predictive(&self, h: &BanditHistory, arm: usize) -> Result<f64> {
        let w = self.posterior_weights(h, arm)?;
        Ok(w.iter().zip(&self.arms[arm]).map(|(w, c)| w * c.p).sum())
    }

    /// Per arm, concatenates the component lists scaled by the mixture weights
    /// and merges components with identical `p`.
    ///
    /// For more than one arm the result is the product of the per-arm marginal
    /// mixtures, which equals the true mixture when the inputs differ on at most
    /// one arm.
    pub fn mix_measures(components: &[&BernoulliArms], weights: &[f64]) -> Result<Self> {
        if components.len() != weights.len() {
            return Err(Error::Config(format!(
                "{} measures but {} weights",
                components.len(),
                weights.len()
            )));
        }
        check_weights(weights)?;
        let arm_count = components[0].arms.len();
        if components.iter().any(|m| m.arms.len() != arm_count) {
            return Err(Error::Representation(
                "mixed measures differ in arm count".into(),
            ));
        }
        let arms = (0..arm_count)
            .map(|j| {
                let mut merged: Vec<BernoulliComponent> = Vec::new();
                for (m, &w) in components.iter().zip(weights) {
                    if w == 0.0 {
                        continue;
                    }
                    for c in &m.arms[j] {
                        let weight = w * c.weight;
                        if weight == 0.0 {
                            continue;
                        }
                        match merged.iter_mut().find(|e| e.p == c.p) {
                            Some(e) => e.weight += weight,
                            None => merged.push(BernoulliComponent { weight, p: c.p }),
                        }
                    }
                }
                merged
            })
            .collect();
        Ok(Self { arms })
    }
}

impl WorldModel for BernoulliArms {
    type History = BanditHistory;
    type Return = ArmReturn;
    type Indicator = ArmObservation;
    type OffBranch = OutcomeValues;

    fn empty_history(&self) -> BanditHistory {
        BanditHistory::new(self.arms.len())
    }

    fn compatible(&self, other: &Self) -> bool {
        self.arms.len() == other.arms.len()
    }

    fn expectation(&self, history: &BanditHistory, f: &ArmReturn) -> Result<f64> {
        arm_expectation(self, history, f)
    }

    fn total_mass(&self, history: &BanditHistory) -> Result<f64> {
        self.check_history(history)?;
        Ok(1.0)
    }

    fn mix(parts: &[(&Self, f64)]) -> Result<Self> {
        let (ms, ws): (Vec<&Self>, Vec<f64>) = parts.iter().copied().unzip();
        Self::mix_measures(&ms, &ws)
    }

    fn restrict(
        &self,
        history: &BanditHistory,
        indicator: &ArmObservation,
        offbranch: &OutcomeValues,
    ) -> Result<Restriction<Self>> {
        arm_restriction(self, history, indicator, offbranch)
    }
}

impl ArmModel for BernoulliArms {
    fn arm_count(&self) -> usize {
        self.arms.len()
    }

    fn outcome_count(&self) -> usize {
        2
    }

    fn outcome_distribution(&self, history: &BanditHistory, arm: usize) -> Result<Vec<f64>> {
        let q = self.predictive(history, arm)?;
        Ok(vec![1.0 - q, q])
    }

    fn sample_arm_distributions<R: Rng + ?Sized>(
        &self,
        history: &BanditHistory,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        (0..self.arms.len())
            .map(|j| {
                let w = self.posterior_weights(history, j)?;
                let p = self.arms[j][sample_index(&w, rng)].p;
                Ok(vec![1.0 - p, p])
            })
            .collect()
    }

    fn record(&self, history: &BanditHistory, obs: ArmObservation) -> Result<BanditHistory> {
        if obs.outcome > 1 {
            return Err(Error::Representation(format!(
                "Bernoulli outcome must be 0 or 1, got {}",
                obs.outcome
            )));
        }
        history.observe(obs.arm, obs.outcome == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(a: f64, b: f64) -> BernoulliArms {
        BernoulliArms::new(vec![vec![
            BernoulliComponent { weight: 0.5, p: a },
            BernoulliComponent { weight: 0.5, p: b },
        ]])
        .unwrap()
    }

    fn history(n: u64, r: u64) -> BanditHistory {
        BanditHistory::from_counts(vec![ArmCounts {
            pulls: n,
            successes: r,
        }])
        .unwrap()
    }

    #[test]
    fn branch_probability_examples() {
        let m = BernoulliArms::point(&[0.5]).unwrap();
        assert!((m.branch_probability(&history(2, 1)).unwrap() - 0.25).abs() < 1e-15);
        assert!(
            (two_point(0.2, 0.6)
                .branch_probability(&history(1, 1))
                .unwrap()
                - 0.4)
                .abs()
                < 1e-15
        );
        assert_eq!(m.branch_probability(&history(0, 0)).unwrap(), 1.0);
    }

    #[test]
    fn predictive_examples() {
        let m = two_point(0.3, 0.7);
        assert!((m.predictive(&history(0, 0), 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.predictive(&history(1, 1), 0).unwrap() - 0.58).abs() < 1e-15);
        let point = BernoulliArms::point(&[0.37]).unwrap();
        assert_eq!(point.predictive(&history(9, 2), 0).unwrap(), 0.37);
    }

    #[test]
    fn impossible_history_is_degenerate() {
        let m = BernoulliArms::point(&[1.0]).unwrap();
        assert!(matches!(
            m.predictive(&history(1, 0), 0),
            Err(Error::DegenerateUpdate(_))
        ));
        assert_eq!(m.branch_probability(&history(1, 0)).unwrap(), 0.0);
    }

    #[test]
    fn long_histories_do_not_underflow() {
        let m = two_point(0.3, 0.7);
        let h = history(5000, 3500);
        let q = m.predictive(&h, 0).unwrap();
        assert!((q - 0.7).abs() < 1e-12);
        assert!(m.log_branch_probability(&h).unwrap().is_finite());
    }

    #[test]
    fn observe_examples() {
        let h = BanditHistory::new(1);
        assert_eq!(
            h.observe(0, true).unwrap().counts(0),
            ArmCounts {
                pulls: 1,
                successes: 1
            }
        );
        let h = history(3, 1);
        assert_eq!(
            h.observe(0, false).unwrap().counts(0),
            ArmCounts {
                pulls: 4,
                successes: 1
            }
        );
        let two = BanditHistory::new(2).observe(0, true).unwrap();
        let after = two.observe(1, false).unwrap();
        assert_eq!(after.counts(0), two.counts(0));
        assert!(two.observe(2, true).is_err());
    }

    #[test]
    fn mix_measures_examples() {
        let a = BernoulliArms::point(&[0.2]).unwrap();
        let b = BernoulliArms::point(&[0.6]).unwrap();
        let m = BernoulliArms::mix_measures(&[&a, &b], &[0.5, 0.5]).unwrap();
        assert_eq!(m, two_point(0.2, 0.6));
        assert_eq!(
            BernoulliArms::mix_measures(&[&a, &b], &[1.0, 0.0]).unwrap(),
            a
        );
        let g = two_point(0.3, 0.7);
        assert_eq!(
            BernoulliArms::mix_measures(&[&g, &g], &[0.5, 0.5]).unwrap(),
            g
        );
        assert!(matches!(
            BernoulliArms::mix_measures(&[&a, &b], &[0.5, 0.6]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn construction_validates() {
        assert!(BernoulliArms::point(&[1.2]).is_err());
        assert!(BernoulliArms::new(vec![vec![BernoulliComponent {
            weight: 0.7,
            p: 0.1
        }]])
        .is_err());
        assert!(BanditHistory::from_counts(vec![ArmCounts {
            pulls: 1,
            successes: 2
        }])
        .is_err());
    }
}
