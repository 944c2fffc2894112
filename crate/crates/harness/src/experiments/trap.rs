//! The trap bandit. The maximin agent keeps Knightian uncertainty between the
//! safe and risky world families, with a classical prior over arm
//! configurations inside each; Bayesian agents hold a point prior on the
//! risky-world rate.

use ibrl_core::agents::{Agent, BanditEvaluator, EvaluationOrder, Flavor, PolicyGrid};
use ibrl_core::environments::{trap_sample_world, trap_step, TrapWorldConfig, TrueWorld};
use ibrl_core::rng::{label_key, stream};
use ibrl_core::worldmodels::{ArmObservation, JointArms};
use ibrl_core::Infradistribution;

use super::{agent_role, env_role, fmt_prob, parallel_map, world_role};
use crate::config::TrapConfig;
use crate::error::{Result, RunContext};
use crate::record::{EpisodeRecorder, RunRecord};

pub const EXPERIMENT: &str = "trap-bandit";

#[derive(Debug, Clone, PartialEq)]
pub struct TrapAgentSpec {
    pub label: String,
    pub flavor: Flavor,
    pub alpha_dgp: f64,
    /// `None` for the maximin agent, which has no prior on the world type.
    pub alpha_prior: Option<f64>,
}

/// Outcome of one agent on one sampled world.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapRun {
    pub agent: usize,
    pub run: usize,
    pub world: TrueWorld,
    pub cum_exp_regret: f64,
    pub catastrophes: usize,
    pub trap_pulls: usize,
}

#[derive(Debug, Clone)]
pub struct TrapOutput {
    pub specs: Vec<TrapAgentSpec>,
    pub records: Vec<RunRecord>,
    pub runs: Vec<TrapRun>,
}

impl TrapOutput {
    pub fn spec_index(
        &self,
        flavor: Flavor,
        alpha_dgp: f64,
        alpha_prior: Option<f64>,
    ) -> Option<usize> {
        self.specs.iter().position(|s| {
            s.flavor == flavor
                && s.alpha_dgp == alpha_dgp
                && (flavor == Flavor::IbMaximin || s.alpha_prior == alpha_prior)
        })
    }

    pub fn runs_of(&self, agent: usize) -> impl Iterator<Item = &TrapRun> {
        self.runs.iter().filter(move |r| r.agent == agent)
    }
}

pub fn agent_specs(cfg: &TrapConfig) -> Result<Vec<TrapAgentSpec>> {
    let flavors = cfg.flavors()?;
    let mut dgps: Vec<f64> = Vec::new();
    for &[dgp, _] in &cfg.env.conditions {
        if !dgps.contains(&dgp) {
            dgps.push(dgp);
        }
    }
    let mut specs = Vec::new();
    for &dgp in &dgps {
        if flavors.contains(&Flavor::IbMaximin) {
            specs.push(TrapAgentSpec {
                label: format!("{}@dgp={}", Flavor::IbMaximin.label(), fmt_prob(dgp)),
                flavor: Flavor::IbMaximin,
                alpha_dgp: dgp,
                alpha_prior: None,
            });
        }
        for &flavor in flavors.iter().filter(|f| **f != Flavor::IbMaximin) {
            for &[_, prior] in cfg.env.conditions.iter().filter(|c| c[0] == dgp) {
                let spec = TrapAgentSpec {
                    label: format!(
                        "{}@dgp={};prior={}",
                        flavor.label(),
                        fmt_prob(dgp),
                        fmt_prob(prior)
                    ),
                    flavor,
                    alpha_dgp: dgp,
                    alpha_prior: Some(prior),
                };
                if !specs.contains(&spec) {
                    specs.push(spec);
                }
            }
        }
    }
    Ok(specs)
}

/// The maximin belief: safe and risky families joined as a Knightian union.
pub fn ib_belief(world: &TrapWorldConfig) -> ibrl_core::Result<Infradistribution<JointArms>> {
    Infradistribution::mix_knightian(&[
        Infradistribution::from_measure(world.family_model(false)?),
        Infradistribution::from_measure(world.family_model(true)?),
    ])
}

fn run_one(
    cfg: &TrapConfig,
    spec: &TrapAgentSpec,
    agent_idx: usize,
    run: usize,
    seed: u64,
) -> ibrl_core::Result<(Vec<RunRecord>, TrapRun)> {
    let wcfg = cfg.world(spec.alpha_dgp);
    let dgp_key = spec.alpha_dgp.to_bits();
    let world = trap_sample_world(
        &wcfg,
        &mut stream(seed, &[world_role(), dgp_key, run as u64]),
    )?;
    let mut env = stream(seed, &[env_role(), dgp_key, run as u64]);

    let belief = match spec.alpha_prior {
        None => ib_belief(&wcfg)?,
        Some(prior) => Infradistribution::from_measure(wcfg.prior_model(prior)?),
    };
    // rewards rescaled onto [0, 1] so off-branch credit stays nonnegative
    let evaluator = BanditEvaluator::new(
        2,
        wcfg.outcome_values().normalized(),
        EvaluationOrder::MixThenMin,
    );
    let mut agent = Agent::new(
        spec.flavor,
        belief,
        evaluator,
        PolicyGrid::deterministic(2)?,
        stream(seed, &[agent_role(), label_key(&spec.label), run as u64]),
    )?;

    let expected = wcfg.expected_rewards(&world);
    let best = expected[0].max(expected[1]);
    let mut rec = EpisodeRecorder::new(EXPERIMENT, &spec.label, seed, run as u64);
    let (mut catastrophes, mut trap_pulls) = (0, 0);
    for _ in 0..wcfg.horizon {
        let (_, action) = agent.decide()?;
        let step = trap_step(&world, &wcfg, action, &mut env)?;
        rec.push(
            action,
            step.reward,
            wcfg.expected_regret(&world, action),
            best,
        );
        catastrophes += usize::from(step.reward < 0.0);
        trap_pulls += usize::from(world.trap_arm == Some(action));
        agent.observe(ArmObservation {
            arm: action,
            outcome: step.outcome,
        })?;
    }
    let summary = TrapRun {
        agent: agent_idx,
        run,
        world,
        cum_exp_regret: rec.cum_exp_regret(),
        catastrophes,
        trap_pulls,
    };
    Ok((rec.finish(), summary))
}

pub fn run(cfg: &TrapConfig, seed: u64, workers: Option<usize>) -> Result<TrapOutput> {
    cfg.validate()?;
    let specs = agent_specs(cfg)?;
    let units: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|a| (0..cfg.run.runs).map(move |r| (a, r)))
        .collect();
    let parts = parallel_map(&units, workers, |&(a, r)| {
        run_one(cfg, &specs[a], a, r, seed)
            .in_run(|| format!("{EXPERIMENT} agent {} run {r}", specs[a].label))
    })?;
    let mut records = Vec::with_capacity(units.len() * cfg.run.horizon);
    let mut runs = Vec::with_capacity(units.len());
    for (rec, summary) in parts {
        records.extend(rec);
        runs.push(summary);
    }
    Ok(TrapOutput {
        specs,
        records,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_specs() {
        let labels: Vec<String> = agent_specs(&TrapConfig::default())
            .unwrap()
            .into_iter()
            .map(|s| s.label)
            .collect();
        assert_eq!(
            labels,
            [
                "infra_bayesian@dgp=0.99",
                "bayes_greedy@dgp=0.99;prior=0.99",
                "bayes_greedy@dgp=0.99;prior=0.01",
                "bayes_thompson@dgp=0.99;prior=0.99",
                "bayes_thompson@dgp=0.99;prior=0.01",
                "infra_bayesian@dgp=0.01",
                "bayes_greedy@dgp=0.01;prior=0.01",
                "bayes_thompson@dgp=0.01;prior=0.01",
            ]
        );
    }

    #[test]
    fn maximin_belief_is_normalized_union() {
        let belief = ib_belief(&TrapWorldConfig::default()).unwrap();
        assert_eq!(belief.len(), 2);
        assert_eq!(belief.normalization().unwrap(), (0.0, 1.0));
    }

    #[test]
    fn small_run_summaries() {
        let mut cfg = TrapConfig::default();
        cfg.run.runs = 5;
        cfg.run.horizon = 20;
        let out = run(&cfg, 3, Some(2)).unwrap();
        assert_eq!(out.runs.len(), 8 * 5);
        assert_eq!(out.records.len(), 8 * 5 * 20);
        for r in &out.runs {
            let last = out
                .records
                .iter()
                .rfind(|x| x.agent == out.specs[r.agent].label && x.episode == r.run as u64)
                .unwrap();
            assert_eq!(last.cum_exp_regret, r.cum_exp_regret);
            if r.world.trap_arm.is_none() {
                assert_eq!(r.trap_pulls, 0);
                assert_eq!(r.catastrophes, 0);
            }
        }
        // matched worlds across agents sharing a rate
        let worlds: Vec<_> = out.runs_of(0).map(|r| r.world.clone()).collect();
        let greedy: Vec<_> = out.runs_of(1).map(|r| r.world.clone()).collect();
        assert_eq!(worlds, greedy);
    }
}
