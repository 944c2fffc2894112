//! Experiment configuration files.
//!
//! Files are TOML. Every experiment accepts the top-level keys `experiment`,
//! `seed` and `workers`, plus dotted `run.*`, `env.*` and `agent.*` keys
//! documented on the structs below. Unknown keys are rejected with their line.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use ibrl_core::agents::{EvaluationOrder, Flavor};
use ibrl_core::environments::{KuAdversary, KuBanditConfig, TrapWorldConfig};
use ibrl_core::worldmodels::NewcombModel;

use crate::error::{HarnessError, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV_VAR: &str = "IBRL_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    ValidateClassical,
    KuBandit,
    Newcomb,
    TrapBandit,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [
        ExperimentId::ValidateClassical,
        ExperimentId::KuBandit,
        ExperimentId::Newcomb,
        ExperimentId::TrapBandit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::ValidateClassical => "validate-classical",
            ExperimentId::KuBandit => "ku-bandit",
            ExperimentId::Newcomb => "newcomb",
            ExperimentId::TrapBandit => "trap-bandit",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|id| id.as_str()).collect();
                format!(
                    "unknown experiment '{s}' (expected one of: {})",
                    names.join(", ")
                )
            })
    }
}

/// Keys shared by every experiment file.
#[derive(Debug, Clone, Default, Deserialize)]
struct Header {
    experiment: Option<String>,
    seed: Option<u64>,
}

/// Resolves the seed: flag, then config file, then `IBRL_SEED`, then the default.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| {
            HarnessError::Config(format!("{SEED_ENV_VAR}={v:?} is not an unsigned integer"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// A parsed experiment file together with its optional header values.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub config: T,
    pub seed: Option<u64>,
}

/// Parses `text` as the configuration of `id`.
pub fn parse<T: DeserializeOwned>(text: &str, id: ExperimentId, origin: &str) -> Result<Loaded<T>> {
    let header: Header =
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("{origin}: {e}")))?;
    if let Some(name) = &header.experiment {
        if name != id.as_str() {
            return Err(HarnessError::Config(format!(
                "{origin}: file configures '{name}' but '{id}' was requested"
            )));
        }
    }
    let config =
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("{origin}: {e}")))?;
    Ok(Loaded {
        config,
        seed: header.seed,
    })
}

pub fn load<T: DeserializeOwned + Default>(
    path: Option<&Path>,
    id: ExperimentId,
) -> Result<Loaded<T>> {
    match path {
        None => Ok(Loaded {
            config: T::default(),
            seed: None,
        }),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))?;
            parse(&text, id, &p.display().to_string())
        }
    }
}

/// Reads the `experiment` key of a config file, if present.
pub fn peek_experiment(text: &str) -> Result<Option<String>> {
    let header: Header = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(header.experiment)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(HarnessError::Config(msg()))
    }
}

fn parse_flavor(name: &str) -> Result<Flavor> {
    [Flavor::IbMaximin, Flavor::BayesGreedy, Flavor::BayesThompson]
        .into_iter()
        .find(|f| f.label() == name)
        .ok_or_else(|| {
            HarnessError::Config(format!(
                "unknown agent flavor '{name}' (expected infra_bayesian, bayes_greedy or bayes_thompson)"
            ))
        })
}

fn parse_order(name: &str) -> Result<EvaluationOrder> {
    match name {
        "mix_then_min" => Ok(EvaluationOrder::MixThenMin),
        "min_then_mix" => Ok(EvaluationOrder::MinThenMix),
        _ => Err(HarnessError::Config(format!(
            "unknown evaluation order '{name}' (expected mix_then_min or min_then_mix)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// validate-classical

/// Matched IB and Bayesian agents on Bernoulli bandits with a shared grid prior.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateClassicalConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub run: ValidateRun,
    #[serde(default)]
    pub env: ValidateEnv,
    #[serde(default)]
    pub agent: GridAgent,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateRun {
    /// Episodes per setting; each uses its own agent and environment streams.
    pub episodes: usize,
    pub steps: usize,
}

impl Default for ValidateRun {
    fn default() -> Self {
        Self {
            episodes: 10,
            steps: 500,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateEnv {
    /// True success probabilities of the two arms, one pair per setting.
    pub settings: Vec<[f64; 2]>,
}

impl Default for ValidateEnv {
    fn default() -> Self {
        Self {
            settings: vec![[0.2, 0.8], [0.6, 0.4], [0.45, 0.55], [0.9, 0.85]],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridAgent {
    /// Success probabilities of the per-arm hypothesis grid, uniformly weighted.
    pub grid: Vec<f64>,
}

impl Default for GridAgent {
    fn default() -> Self {
        Self {
            grid: (1..=9).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

impl ValidateClassicalConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.run.episodes > 0 && self.run.steps > 0, || {
            "run.episodes and run.steps must be positive".into()
        })?;
        check(!self.env.settings.is_empty(), || {
            "env.settings must list at least one arm pair".into()
        })?;
        for s in &self.env.settings {
            check(s.iter().all(|p| (0.0..=1.0).contains(p)), || {
                format!("env.settings entry {s:?} outside [0, 1]")
            })?;
        }
        check(!self.agent.grid.is_empty(), || {
            "agent.grid must be nonempty".into()
        })?;
        check(
            self.agent.grid.iter().all(|p| (0.0..=1.0).contains(p)),
            || "agent.grid values must lie in [0, 1]".into(),
        )
    }
}

// ---------------------------------------------------------------------------
// ku-bandit

/// The interval bandit: a maximin agent over the box corners against
/// greedy Bayesian agents whose priors are point masses at each corner.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KuConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub run: KuRun,
    #[serde(default)]
    pub env: KuEnv,
    #[serde(default)]
    pub agent: KuAgent,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KuRun {
    pub episodes: usize,
    pub steps: usize,
}

impl Default for KuRun {
    fn default() -> Self {
        Self {
            episodes: 1,
            steps: 100,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KuEnv {
    /// `[lo, hi]` per arm.
    pub intervals: Vec<[f64; 2]>,
    /// `worst_case_vs_agent`, `per_step_random` or `fixed_point`.
    pub adversary: String,
    /// Arm probabilities for `fixed_point`.
    pub point: Option<Vec<f64>>,
}

impl Default for KuEnv {
    fn default() -> Self {
        Self {
            intervals: KuBanditConfig::DEFAULT_INTERVALS
                .iter()
                .map(|&(lo, hi)| [lo, hi])
                .collect(),
            adversary: "worst_case_vs_agent".into(),
            point: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KuAgent {
    /// `mix_then_min` or `min_then_mix`.
    pub order: String,
    /// Also run one greedy Bayesian agent per box corner.
    pub corner_priors: bool,
}

impl Default for KuAgent {
    fn default() -> Self {
        Self {
            order: "mix_then_min".into(),
            corner_priors: true,
        }
    }
}

impl KuConfig {
    pub fn env_config(&self) -> Result<KuBanditConfig> {
        let adversary = match self.env.adversary.as_str() {
            "worst_case_vs_agent" => KuAdversary::WorstCaseVsAgent,
            "per_step_random" => KuAdversary::PerStepRandom,
            "fixed_point" => KuAdversary::FixedPoint(self.env.point.clone().ok_or_else(|| {
                HarnessError::Config("env.adversary = \"fixed_point\" needs env.point".into())
            })?),
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown env.adversary '{other}' (expected worst_case_vs_agent, per_step_random or fixed_point)"
                )))
            }
        };
        let intervals = self
            .env
            .intervals
            .iter()
            .map(|&[lo, hi]| (lo, hi))
            .collect();
        Ok(KuBanditConfig::new(intervals, adversary)?)
    }

    pub fn order(&self) -> Result<EvaluationOrder> {
        parse_order(&self.agent.order)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.run.episodes > 0 && self.run.steps > 0, || {
            "run.episodes and run.steps must be positive".into()
        })?;
        self.env_config()?;
        self.order()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// newcomb

/// Newcomb's problem swept over predictor accuracies.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewcombConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub run: NewcombRun,
    #[serde(default)]
    pub env: NewcombEnv,
    #[serde(default)]
    pub agent: NewcombAgentConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewcombRun {
    /// Single-step episodes per accuracy value.
    pub episodes: usize,
}

impl Default for NewcombRun {
    fn default() -> Self {
        Self { episodes: 1000 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewcombEnv {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
    /// `reward[action][prediction]`, one-box first.
    pub reward: [[f64; 2]; 2],
}

impl Default for NewcombEnv {
    fn default() -> Self {
        Self {
            alpha_min: 0.5,
            alpha_max: 1.0,
            alpha_step: 0.01,
            reward: NewcombModel::STANDARD_REWARD,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewcombAgentConfig {
    pub grid_step: f64,
}

impl Default for NewcombAgentConfig {
    fn default() -> Self {
        Self { grid_step: 0.01 }
    }
}

/// Accuracy values `min, min + step, …, max`, rounded to nine decimals so that
/// decimal steps land on their decimal values.
pub fn alpha_range(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    check(step > 0.0, || format!("alpha step {step} must be positive"))?;
    check(0.5 <= min && min <= max && max <= 1.0, || {
        format!("alpha range [{min}, {max}] must lie in [0.5, 1]")
    })?;
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((min + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

impl NewcombConfig {
    pub fn alphas(&self) -> Result<Vec<f64>> {
        alpha_range(self.env.alpha_min, self.env.alpha_max, self.env.alpha_step)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.run.episodes > 0, || {
            "run.episodes must be positive".into()
        })?;
        for alpha in self.alphas()? {
            NewcombModel::new(self.env.reward, alpha)?;
        }
        ibrl_core::agents::policy_grid(2, self.agent.grid_step)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// trap-bandit

/// The trap bandit under several (risky-world rate, prior) conditions.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub run: TrapRunConfig,
    #[serde(default)]
    pub env: TrapEnv,
    #[serde(default)]
    pub agent: TrapAgents,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapRunConfig {
    pub runs: usize,
    pub horizon: usize,
}

impl Default for TrapRunConfig {
    fn default() -> Self {
        let d = TrapWorldConfig::default();
        Self {
            runs: d.runs,
            horizon: d.horizon,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapEnv {
    pub p_cat: f64,
    pub catastrophe_reward: f64,
    pub arm_pairs: Vec<[f64; 2]>,
    /// `[alpha_dgp, alpha_prior]` pairs. The maximin agent runs once per
    /// distinct `alpha_dgp`; Bayesian agents run once per pair.
    pub conditions: Vec<[f64; 2]>,
}

impl Default for TrapEnv {
    fn default() -> Self {
        let d = TrapWorldConfig::default();
        Self {
            p_cat: d.p_cat,
            catastrophe_reward: d.catastrophe_reward,
            arm_pairs: d.arm_pairs,
            conditions: vec![[0.99, 0.99], [0.99, 0.01], [0.01, 0.01]],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapAgents {
    pub flavors: Vec<String>,
}

impl Default for TrapAgents {
    fn default() -> Self {
        Self {
            flavors: vec![
                "infra_bayesian".into(),
                "bayes_greedy".into(),
                "bayes_thompson".into(),
            ],
        }
    }
}

impl TrapConfig {
    /// World parameters for one risky-world rate.
    pub fn world(&self, alpha_dgp: f64) -> TrapWorldConfig {
        TrapWorldConfig {
            arm_pairs: self.env.arm_pairs.clone(),
            alpha_dgp,
            p_cat: self.env.p_cat,
            catastrophe_reward: self.env.catastrophe_reward,
            horizon: self.run.horizon,
            runs: self.run.runs,
        }
    }

    pub fn flavors(&self) -> Result<Vec<Flavor>> {
        self.agent.flavors.iter().map(|f| parse_flavor(f)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        check(!self.env.conditions.is_empty(), || {
            "env.conditions must list at least one pair".into()
        })?;
        check(!self.agent.flavors.is_empty(), || {
            "agent.flavors must be nonempty".into()
        })?;
        self.flavors()?;
        for &[dgp, prior] in &self.env.conditions {
            check((0.0..=1.0).contains(&prior), || {
                format!("alpha_prior {prior} outside [0, 1]")
            })?;
            self.world(dgp).validate()?;
        }
        Ok(())
    }
}
