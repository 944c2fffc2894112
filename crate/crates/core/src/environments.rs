//! Simulated environments: Bernoulli bandits, the interval-constrained
//! adversarial bandit, Newcomb's problem with an imperfect predictor, and the
//! trap bandit.
//!
//! Environments draw from their own random stream, never the agent's.

use rand::Rng;

use crate::agents::Policy;
use crate::error::{Error, Result};
use crate::worldmodels::{
    check_probability, newcomb_expected_reward, newcomb_prediction_prob, Hypothesis, JointArms,
    NewcombModel, OutcomeValues, ONE_BOX, TWO_BOX,
};

/// Best expected reward minus the expected reward of `action`.
pub fn expected_regret(expected_rewards: &[f64], action: usize) -> f64 {
    let best = expected_rewards
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    best - expected_rewards[action]
}

/// Reward 1 with probability `p`, else 0. Consumes one uniform draw.
pub fn bernoulli_step<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<f64> {
    check_probability(p, "success probability")?;
    let u: f64 = rng.random();
    Ok(if u < p { 1.0 } else { 0.0 })
}

/// How the interval-constrained adversary picks arm probabilities each step.
#[derive(Debug, Clone, PartialEq)]
pub enum KuAdversary {
    /// The same probabilities every step.
    FixedPoint(Vec<f64>),
    /// Uniform in the box, redrawn every step.
    PerStepRandom,
    /// The pulled arm gets its interval minimum, every other arm its maximum.
    WorstCaseVsAgent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KuBanditConfig {
    intervals: Vec<(f64, f64)>,
    adversary: KuAdversary,
}

impl KuBanditConfig {
    pub const DEFAULT_INTERVALS: [(f64, f64); 2] = [(0.3, 0.7), (0.4, 0.8)];

    pub fn new(intervals: Vec<(f64, f64)>, adversary: KuAdversary) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Config(
                "bandit needs at least one arm interval".into(),
            ));
        }
        for &(lo, hi) in &intervals {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::Config(format!(
                    "arm interval [{lo}, {hi}] is not inside [0, 1]"
                )));
            }
        }
        if let KuAdversary::FixedPoint(ps) = &adversary {
            if ps.len() != intervals.len() {
                return Err(Error::Config(format!(
                    "fixed point has {} arms, box has {}",
                    ps.len(),
                    intervals.len()
                )));
            }
            if let Some((p, (lo, hi))) = ps
                .iter()
                .zip(&intervals)
                .find(|(p, (lo, hi))| !(lo <= *p && *p <= hi))
            {
                return Err(Error::Config(format!(
                    "fixed point {p} outside interval [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            intervals,
            adversary,
        })
    }

    pub fn standard(adversary: KuAdversary) -> Result<Self> {
        Self::new(Self::DEFAULT_INTERVALS.to_vec(), adversary)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn adversary(&self) -> &KuAdversary {
        &self.adversary
    }

    pub fn arm_count(&self) -> usize {
        self.intervals.len()
    }

    /// The `2^k` corners of the box, with arm 0 varying slowest.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let k = self.intervals.len();
        (0..1usize << k)
            .map(|mask| {
                (0..k)
                    .map(|arm| {
                        let (lo, hi) = self.intervals[arm];
                        if mask >> (k - 1 - arm) & 1 == 0 {
                            lo
                        } else {
                            hi
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// One step of the adversarial bandit.
#[derive(Debug, Clone, PartialEq)]
pub struct KuStep {
    pub reward: f64,
    /// The arm probabilities in force during this step.
    pub probs: Vec<f64>,
}

impl KuStep {
    pub fn expected_regret(&self, action: usize) -> f64 {
        expected_regret(&self.probs, action)
    }
}

pub fn ku_step<R: Rng + ?Sized>(
    cfg: &KuBanditConfig,
    action: usize,
    rng: &mut R,
) -> Result<KuStep> {
    if action >= cfg.arm_count() {
        return Err(Error::Config(format!("arm {action} out of range")));
    }
    let probs: Vec<f64> = match &cfg.adversary {
        KuAdversary::FixedPoint(ps) => ps.clone(),
        KuAdversary::PerStepRandom => cfg
            .intervals
            .iter()
            .map(|&(lo, hi)| (lo + rng.random::<f64>() * (hi - lo)).clamp(lo, hi))
            .collect(),
        KuAdversary::WorstCaseVsAgent => cfg
            .intervals
            .iter()
            .enumerate()
            .map(|(arm, &(lo, hi))| if arm == action { lo } else { hi })
            .collect(),
    };
    let reward = bernoulli_step(probs[action], rng)?;
    Ok(KuStep { reward, probs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewcombEnvConfig {
    pub model: NewcombModel,
    pub episodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewcombStep {
    pub prediction: usize,
    pub reward: f64,
}

/// The predictor reads the policy, not the sampled action.
pub fn newcomb_step<R: Rng + ?Sized>(
    model: &NewcombModel,
    policy: &Policy,
    action: usize,
    rng: &mut R,
) -> Result<NewcombStep> {
    if policy.action_count() != 2 || action > TWO_BOX {
        return Err(Error::Config("Newcomb has exactly two actions".into()));
    }
    let q = newcomb_prediction_prob(policy.prob(ONE_BOX), model.accuracy())?;
    let prediction = if rng.random::<f64>() < q {
        ONE_BOX
    } else {
        TWO_BOX
    };
    Ok(NewcombStep {
        prediction,
        reward: model.reward()[action][prediction],
    })
}

/// Best achievable expected reward over all one-boxing probabilities. The
/// expected reward is affine in `p`, so an endpoint attains it.
pub fn newcomb_best_reward(model: &NewcombModel) -> Result<f64> {
    Ok(newcomb_expected_reward(0.0, model)?.max(newcomb_expected_reward(1.0, model)?))
}

/// Regret of committing to the one-boxing probability `p`.
pub fn newcomb_expected_regret(model: &NewcombModel, p: f64) -> Result<f64> {
    Ok((newcomb_best_reward(model)? - newcomb_expected_reward(p, model)?).max(0.0))
}

/// Outcome indices of a trap-bandit pull.
pub const TRAP_CATASTROPHE: usize = 0;
pub const TRAP_ZERO: usize = 1;
pub const TRAP_ONE: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrapWorldConfig {
    pub arm_pairs: Vec<[f64; 2]>,
    pub alpha_dgp: f64,
    pub p_cat: f64,
    pub catastrophe_reward: f64,
    pub horizon: usize,
    pub runs: usize,
}

impl Default for TrapWorldConfig {
    fn default() -> Self {
        Self {
            arm_pairs: vec![[0.3, 0.7], [0.7, 0.3]],
            alpha_dgp: 0.99,
            p_cat: 0.01,
            catastrophe_reward: -1000.0,
            horizon: 100,
            runs: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorldType {
    Safe,
    Risky,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueWorld {
    pub probs: [f64; 2],
    pub kind: WorldType,
    /// The higher-probability arm, present only in risky worlds.
    pub trap_arm: Option<usize>,
}

fn better_arm(probs: &[f64; 2]) -> usize {
    usize::from(probs[1] > probs[0])
}

impl TrapWorldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.arm_pairs.is_empty() {
            return Err(Error::Config(
                "trap bandit needs at least one arm pair".into(),
            ));
        }
        check_probability(self.alpha_dgp, "alpha_dgp")?;
        check_probability(self.p_cat, "p_cat")?;
        for pair in &self.arm_pairs {
            for &p in pair {
                check_probability(p, "arm probability")?;
                if self.p_cat + p > 1.0 + 1e-12 {
                    return Err(Error::Config(format!(
                        "p_cat {} + arm probability {p} exceeds 1",
                        self.p_cat
                    )));
                }
            }
        }
        if !(self.catastrophe_reward.is_finite() && self.catastrophe_reward < 0.0) {
            return Err(Error::Config(
                "catastrophe reward must be a negative real".into(),
            ));
        }
        if self.horizon == 0 || self.runs == 0 {
            return Err(Error::Config(
                "trap horizon and run count must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Raw rewards indexed by outcome: catastrophe, 0, 1.
    pub fn outcome_values(&self) -> OutcomeValues {
        OutcomeValues::new(vec![self.catastrophe_reward, 0.0, 1.0])
            .expect("finite catastrophe reward")
    }

    /// Per-arm outcome distributions of one configuration.
    pub fn arm_distributions(&self, probs: &[f64; 2], risky: bool) -> Vec<Vec<f64>> {
        let trap = better_arm(probs);
        (0..2)
            .map(|arm| {
                let p = probs[arm];
                if risky && arm == trap {
                    vec![self.p_cat, 1.0 - self.p_cat - p, p]
                } else {
                    vec![0.0, 1.0 - p, p]
                }
            })
            .collect()
    }

    /// The uniform mixture over arm pairs, all safe or all risky.
    pub fn family_model(&self, risky: bool) -> Result<JointArms> {
        self.validate()?;
        let w = 1.0 / self.arm_pairs.len() as f64;
        JointArms::new(
            self.arm_pairs
                .iter()
                .map(|pair| Hypothesis {
                    weight: w,
                    arm_outcomes: self.arm_distributions(pair, risky),
                })
                .collect(),
        )
    }

    /// Risky configurations weighted `alpha`, safe ones `1 - alpha`.
    pub fn prior_model(&self, alpha: f64) -> Result<JointArms> {
        self.validate()?;
        check_probability(alpha, "alpha_prior")?;
        let w = 1.0 / self.arm_pairs.len() as f64;
        let mut hypotheses = Vec::new();
        for (risky, weight) in [(true, alpha), (false, 1.0 - alpha)] {
            if weight > 0.0 {
                for pair in &self.arm_pairs {
                    hypotheses.push(Hypothesis {
                        weight: w * weight,
                        arm_outcomes: self.arm_distributions(pair, risky),
                    });
                }
            }
        }
        JointArms::new(hypotheses)
    }

    /// Expected raw reward of each arm in `world`.
    pub fn expected_rewards(&self, world: &TrueWorld) -> [f64; 2] {
        let values = self.outcome_values();
        let dists = self.arm_distributions(&world.probs, world.kind == WorldType::Risky);
        [values.expect(&dists[0]), values.expect(&dists[1])]
    }

    pub fn expected_regret(&self, world: &TrueWorld, action: usize) -> f64 {
        expected_regret(&self.expected_rewards(world), action)
    }
}

pub fn trap_sample_world<R: Rng + ?Sized>(cfg: &TrapWorldConfig, rng: &mut R) -> Result<TrueWorld> {
    cfg.validate()?;
    let n = cfg.arm_pairs.len();
    let probs = cfg.arm_pairs[((rng.random::<f64>() * n as f64) as usize).min(n - 1)];
    let risky = rng.random::<f64>() < cfg.alpha_dgp;
    Ok(if risky {
        TrueWorld {
            probs,
            kind: WorldType::Risky,
            trap_arm: Some(better_arm(&probs)),
        }
    } else {
        TrueWorld {
            probs,
            kind: WorldType::Safe,
            trap_arm: None,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapStep {
    pub outcome: usize,
    pub reward: f64,
}

pub fn trap_step<R: Rng + ?Sized>(
    world: &TrueWorld,
    cfg: &TrapWorldConfig,
    action: usize,
    rng: &mut R,
) -> Result<TrapStep> {
    if action > 1 {
        return Err(Error::Config(format!(
            "arm {action} out of range for the trap bandit"
        )));
    }
    let p = world.probs[action];
    let u: f64 = rng.random();
    let outcome = if world.trap_arm == Some(action) {
        if u < cfg.p_cat {
            TRAP_CATASTROPHE
        } else if u < cfg.p_cat + p {
            TRAP_ONE
        } else {
            TRAP_ZERO
        }
    } else if u < p {
        TRAP_ONE
    } else {
        TRAP_ZERO
    };
    Ok(TrapStep {
        outcome,
        reward: cfg.outcome_values().values()[outcome],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
        xs.sum::<f64>() / n as f64
    }

    #[test]
    fn bernoulli_examples() {
        let mut rng = stream(1, &[]);
        assert!((0..100).all(|_| bernoulli_step(0.0, &mut rng).unwrap() == 0.0));
        assert!((0..100).all(|_| bernoulli_step(1.0, &mut rng).unwrap() == 1.0));
        let n = 10_000;
        let m = mean((0..n).map(|_| bernoulli_step(0.7, &mut rng).unwrap()), n);
        assert!((m - 0.7).abs() < 3.0 * (0.21f64 / n as f64).sqrt());
        let a: Vec<f64> = {
            let mut r = stream(2, &[]);
            (0..30)
                .map(|_| bernoulli_step(0.5, &mut r).unwrap())
                .collect()
        };
        let b: Vec<f64> = {
            let mut r = stream(2, &[]);
            (0..30)
                .map(|_| bernoulli_step(0.5, &mut r).unwrap())
                .collect()
        };
        assert_eq!(a, b);
        assert!(bernoulli_step(1.2, &mut rng).is_err());
    }

    #[test]
    fn ku_worst_case_examples() {
        let cfg = KuBanditConfig::standard(KuAdversary::WorstCaseVsAgent).unwrap();
        let mut rng = stream(3, &[]);
        let s = ku_step(&cfg, 1, &mut rng).unwrap();
        assert_eq!(s.probs, vec![0.7, 0.4]);
        assert!((s.expected_regret(1) - 0.3).abs() < 1e-15);
        let s = ku_step(&cfg, 0, &mut rng).unwrap();
        assert_eq!(s.probs, vec![0.3, 0.8]);
        assert!((s.expected_regret(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ku_fixed_point_and_box() {
        let corner = KuBanditConfig::standard(KuAdversary::FixedPoint(vec![0.3, 0.4])).unwrap();
        let mut rng = stream(4, &[]);
        assert_eq!(ku_step(&corner, 0, &mut rng).unwrap().probs, vec![0.3, 0.4]);
        assert!(KuBanditConfig::standard(KuAdversary::FixedPoint(vec![0.2, 0.5])).is_err());
        assert!(KuBanditConfig::new(vec![(0.6, 0.4)], KuAdversary::PerStepRandom).is_err());

        let random = KuBanditConfig::standard(KuAdversary::PerStepRandom).unwrap();
        for step in 0..1000 {
            let s = ku_step(&random, step % 2, &mut rng).unwrap();
            for (p, (lo, hi)) in s.probs.iter().zip(random.intervals()) {
                assert!(lo <= p && p <= hi);
            }
            assert!(s.expected_regret(step % 2) >= 0.0);
        }
        assert_eq!(
            corner.corners(),
            vec![
                vec![0.3, 0.4],
                vec![0.3, 0.8],
                vec![0.7, 0.4],
                vec![0.7, 0.8]
            ]
        );
    }

    #[test]
    fn newcomb_examples() {
        let mut rng = stream(5, &[]);
        let perfect = NewcombModel::standard(1.0).unwrap();
        let one = Policy::new(vec![1.0, 0.0]).unwrap();
        let two = Policy::new(vec![0.0, 1.0]).unwrap();
        for _ in 0..50 {
            assert_eq!(
                newcomb_step(&perfect, &one, ONE_BOX, &mut rng)
                    .unwrap()
                    .reward,
                10.0
            );
            assert_eq!(
                newcomb_step(&perfect, &two, TWO_BOX, &mut rng)
                    .unwrap()
                    .reward,
                1.0
            );
        }
        let coin = NewcombModel::standard(0.5).unwrap();
        let n = 20_000;
        let m = mean(
            (0..n).map(|_| newcomb_step(&coin, &two, TWO_BOX, &mut rng).unwrap().reward),
            n,
        );
        assert!((m - 6.0).abs() < 3.0 * 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn newcomb_regret_is_nonnegative() {
        for i in 0..=50 {
            let m = NewcombModel::standard((50 + i) as f64 / 100.0).unwrap();
            for j in 0..=10 {
                assert!(newcomb_expected_regret(&m, j as f64 / 10.0).unwrap() >= 0.0);
            }
        }
        let m = NewcombModel::standard(1.0).unwrap();
        assert_eq!(newcomb_expected_regret(&m, 1.0).unwrap(), 0.0);
        assert!((newcomb_expected_regret(&m, 0.0).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn trap_world_sampling() {
        let mut rng = stream(6, &[]);
        let safe = TrapWorldConfig {
            alpha_dgp: 0.0,
            ..Default::default()
        };
        let risky = TrapWorldConfig {
            alpha_dgp: 1.0,
            ..Default::default()
        };
        for _ in 0..100 {
            assert_eq!(
                trap_sample_world(&safe, &mut rng).unwrap().kind,
                WorldType::Safe
            );
            let w = trap_sample_world(&risky, &mut rng).unwrap();
            assert_eq!(w.trap_arm, Some(better_arm(&w.probs)));
        }
        let cfg = TrapWorldConfig::default();
        let n = 10_000;
        let frac = mean(
            (0..n).map(|_| {
                f64::from(u8::from(
                    trap_sample_world(&cfg, &mut rng).unwrap().kind == WorldType::Risky,
                ))
            }),
            n,
        );
        assert!((frac - 0.99).abs() < 3.0 * (0.99f64 * 0.01 / n as f64).sqrt());
    }

    #[test]
    fn trap_rewards_and_regret() {
        let cfg = TrapWorldConfig::default();
        let risky = TrueWorld {
            probs: [0.3, 0.7],
            kind: WorldType::Risky,
            trap_arm: Some(1),
        };
        let safe = TrueWorld {
            probs: [0.3, 0.7],
            kind: WorldType::Safe,
            trap_arm: None,
        };
        assert!((cfg.expected_rewards(&risky)[1] - (-9.3)).abs() < 1e-12);
        assert!((cfg.expected_regret(&risky, 1) - 9.6).abs() < 1e-12);
        assert_eq!(cfg.expected_regret(&risky, 0), 0.0);
        assert!((cfg.expected_regret(&safe, 0) - 0.4).abs() < 1e-12);
        assert_eq!(cfg.expected_regret(&safe, 1), 0.0);

        let mut rng = stream(7, &[]);
        let n = 100_000;
        let mut total = 0.0;
        for _ in 0..n {
            let s = trap_step(&risky, &cfg, 1, &mut rng).unwrap();
            assert!([-1000.0, 0.0, 1.0].contains(&s.reward));
            total += s.reward;
            let s = trap_step(&risky, &cfg, 0, &mut rng).unwrap();
            assert!([0.0, 1.0].contains(&s.reward));
        }
        // standard deviation of one trap pull is about 99.5
        assert!((total / n as f64 + 9.3).abs() < 3.0 * 99.5 / (n as f64).sqrt());
    }

    #[test]
    fn trap_config_validation() {
        assert!(TrapWorldConfig {
            p_cat: 0.4,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrapWorldConfig {
            horizon: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrapWorldConfig::default().validate().is_ok());
        let prior = TrapWorldConfig::default().prior_model(0.99).unwrap();
        assert_eq!(prior.hypotheses().len(), 4);
    }
}
