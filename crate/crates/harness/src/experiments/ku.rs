//! The interval-constrained bandit: a maximin agent whose belief is the
//! Knightian union of the box corners, and greedy Bayesian agents whose priors
//! are point masses at single corners.

use ibrl_core::agents::{Agent, BanditAgent, BanditEvaluator, Flavor, PolicyGrid};
use ibrl_core::environments::{ku_step, KuBanditConfig};
use ibrl_core::rng::{label_key, stream, StreamRng};
use ibrl_core::worldmodels::{ArmObservation, BernoulliArms, OutcomeValues};
use ibrl_core::Infradistribution;

use super::{agent_role, env_role, fmt_prob, parallel_map};
use crate::config::KuConfig;
use crate::error::{Result, RunContext};
use crate::record::{EpisodeRecorder, RunRecord};

pub const EXPERIMENT: &str = "ku-bandit";

#[derive(Debug, Clone)]
struct AgentSpec {
    label: String,
    flavor: Flavor,
    belief: Infradistribution<BernoulliArms>,
}

pub fn corner_label(corner: &[f64]) -> String {
    let ps: Vec<String> = corner.iter().map(|p| fmt_prob(*p)).collect();
    format!("{}@corner={}", Flavor::BayesGreedy.label(), ps.join("/"))
}

/// The Knightian union of point measures at the corners of the box.
pub fn corner_belief(env: &KuBanditConfig) -> ibrl_core::Result<Infradistribution<BernoulliArms>> {
    let corners = env
        .corners()
        .iter()
        .map(|c| Ok(Infradistribution::from_measure(BernoulliArms::point(c)?)))
        .collect::<ibrl_core::Result<Vec<_>>>()?;
    Infradistribution::mix_knightian(&corners)
}

fn rollout(
    mut agent: BanditAgent<BernoulliArms>,
    env: &KuBanditConfig,
    steps: usize,
    mut rng: StreamRng,
    mut rec: EpisodeRecorder,
) -> ibrl_core::Result<Vec<RunRecord>> {
    for _ in 0..steps {
        let (_, action) = agent.decide()?;
        let s = ku_step(env, action, &mut rng)?;
        let best = s.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rec.push(action, s.reward, s.expected_regret(action), best);
        agent.observe(ArmObservation {
            arm: action,
            outcome: s.reward as usize,
        })?;
    }
    Ok(rec.finish())
}

pub fn run(cfg: &KuConfig, seed: u64, workers: Option<usize>) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let env = cfg.env_config()?;
    let arms = env.arm_count();
    let evaluator = BanditEvaluator::new(arms, OutcomeValues::indicator(), cfg.order()?);

    let mut specs = vec![AgentSpec {
        label: Flavor::IbMaximin.label().to_owned(),
        flavor: Flavor::IbMaximin,
        belief: corner_belief(&env)?,
    }];
    if cfg.agent.corner_priors {
        for corner in env.corners() {
            specs.push(AgentSpec {
                label: corner_label(&corner),
                flavor: Flavor::BayesGreedy,
                belief: Infradistribution::from_measure(BernoulliArms::point(&corner)?),
            });
        }
    }

    let units: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|a| (0..cfg.run.episodes).map(move |e| (a, e)))
        .collect();
    let per_unit = parallel_map(&units, workers, |&(a, e)| {
        let spec = &specs[a];
        let agent = Agent::new(
            spec.flavor,
            spec.belief.clone(),
            evaluator.clone(),
            PolicyGrid::deterministic(arms)?,
            stream(seed, &[agent_role(), label_key(&spec.label), e as u64]),
        )?;
        // every agent faces the same environment stream in a given episode
        let rng = stream(seed, &[env_role(), e as u64]);
        let rec = EpisodeRecorder::new(EXPERIMENT, &spec.label, seed, e as u64);
        rollout(agent, &env, cfg.run.steps, rng, rec)
            .in_run(|| format!("{EXPERIMENT} agent {} episode {e}", spec.label))
    })?;
    Ok(per_unit.into_iter().flatten().collect())
}
