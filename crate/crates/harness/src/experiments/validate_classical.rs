//! A single-a-measure maximin agent against the greedy Bayesian agent with the
//! same hypothesis grid, under matched random streams.

use ibrl_core::agents::{Agent, BanditAgent, BanditEvaluator, Flavor, PolicyGrid};
use ibrl_core::environments::{bernoulli_step, expected_regret};
use ibrl_core::rng::{stream, StreamRng};
use ibrl_core::worldmodels::{ArmObservation, BernoulliArms};
use ibrl_core::Infradistribution;

use super::{agent_role, env_role, fmt_prob, parallel_map};
use crate::config::ValidateClassicalConfig;
use crate::error::{Result, RunContext};
use crate::record::{EpisodeRecorder, RunRecord};

pub const EXPERIMENT: &str = "validate-classical";

fn setting_tag(probs: &[f64; 2]) -> String {
    format!("arms={}/{}", fmt_prob(probs[0]), fmt_prob(probs[1]))
}

/// `(maximin label, Bayesian label)` of one setting.
pub fn labels(probs: &[f64; 2]) -> (String, String) {
    let tag = setting_tag(probs);
    (
        format!("{}@{tag}", Flavor::IbMaximin.label()),
        format!("{}@{tag}", Flavor::BayesGreedy.label()),
    )
}

fn rollout(
    mut agent: BanditAgent<BernoulliArms>,
    probs: &[f64; 2],
    steps: usize,
    mut env: StreamRng,
    mut rec: EpisodeRecorder,
) -> ibrl_core::Result<Vec<RunRecord>> {
    let best = probs[0].max(probs[1]);
    for _ in 0..steps {
        let (_, action) = agent.decide()?;
        let reward = bernoulli_step(probs[action], &mut env)?;
        rec.push(action, reward, expected_regret(probs, action), best);
        agent.observe(ArmObservation {
            arm: action,
            outcome: reward as usize,
        })?;
    }
    Ok(rec.finish())
}

pub fn run(
    cfg: &ValidateClassicalConfig,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let prior = BernoulliArms::uniform_grid(2, &cfg.agent.grid)?;
    let units: Vec<(usize, usize)> = (0..cfg.env.settings.len())
        .flat_map(|s| (0..cfg.run.episodes).map(move |e| (s, e)))
        .collect();
    let per_unit = parallel_map(&units, workers, |&(s, e)| {
        let probs = cfg.env.settings[s];
        let (ib_label, bayes_label) = labels(&probs);
        let path = [s as u64, e as u64];
        let agent_stream = || stream(seed, &[agent_role(), path[0], path[1]]);
        let env_stream = || stream(seed, &[env_role(), path[0], path[1]]);
        let mut out = Vec::with_capacity(2 * cfg.run.steps);
        for (flavor, label) in [
            (Flavor::IbMaximin, &ib_label),
            (Flavor::BayesGreedy, &bayes_label),
        ] {
            let agent = Agent::new(
                flavor,
                Infradistribution::from_measure(prior.clone()),
                BanditEvaluator::bernoulli(2),
                PolicyGrid::deterministic(2)?,
                agent_stream(),
            )?;
            let rec = EpisodeRecorder::new(EXPERIMENT, label, seed, e as u64);
            out.extend(
                rollout(agent, &probs, cfg.run.steps, env_stream(), rec)
                    .in_run(|| format!("{EXPERIMENT} agent {label} episode {e}"))?,
            );
        }
        Ok(out)
    })?;
    Ok(per_unit.into_iter().flatten().collect())
}

/// Checks that each setting's two agents took identical actions and accrued
/// identical cumulative regret at every step. Returns one message per mismatch.
pub fn mismatches(cfg: &ValidateClassicalConfig, records: &[RunRecord]) -> Vec<String> {
    let key = |r: &RunRecord| {
        (
            r.episode,
            r.step,
            r.action,
            r.cum_regret.to_bits(),
            r.cum_exp_regret.to_bits(),
        )
    };
    let mut out = Vec::new();
    for probs in &cfg.env.settings {
        let (ib, bayes) = labels(probs);
        let a: Vec<_> = records.iter().filter(|r| r.agent == ib).map(key).collect();
        let b: Vec<_> = records
            .iter()
            .filter(|r| r.agent == bayes)
            .map(key)
            .collect();
        if a.is_empty() || a.len() != b.len() {
            out.push(format!(
                "{}: {} vs {} steps",
                setting_tag(probs),
                a.len(),
                b.len()
            ));
        } else if let Some(i) = a.iter().zip(&b).position(|(x, y)| x != y) {
            out.push(format!(
                "{}: first divergence at episode {} step {}",
                setting_tag(probs),
                a[i].0,
                a[i].1
            ));
        }
    }
    out
}
