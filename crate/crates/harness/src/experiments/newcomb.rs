//! Newcomb's problem with an imperfect predictor, swept over accuracy.
//!
//! Every episode is a single decision made by a fresh agent whose belief is a
//! singleton over the known reward structure.

use std::io::Write;

use ibrl_core::agents::{policy_grid, Agent, Flavor, NewcombEvaluator};
use ibrl_core::environments::{newcomb_best_reward, newcomb_expected_regret, newcomb_step};
use ibrl_core::rng::stream;
use ibrl_core::worldmodels::{
    newcomb_expected_reward, newcomb_reward_variance, NewcombMeasure, NewcombModel,
    NewcombObservation, ONE_BOX,
};
use ibrl_core::{Infradistribution, TIE_TOLERANCE};

use super::{agent_role, env_role, fmt_prob, parallel_map};
use crate::config::NewcombConfig;
use crate::error::{Result, RunContext};
use crate::record::{EpisodeRecorder, RunRecord};

pub const EXPERIMENT: &str = "newcomb";

pub const SUMMARY_HEADER: [&str; 8] = [
    "alpha",
    "reward_opt",
    "reward_sim",
    "reward_sim_err",
    "one_box_rate_sim",
    "one_box_action_rate",
    "one_box_rate_opt",
    "episodes",
];

pub fn label(alpha: f64) -> String {
    format!("{}@alpha={}", Flavor::IbMaximin.label(), fmt_prob(alpha))
}

/// Aggregate of one accuracy value.
#[derive(Debug, Clone, PartialEq)]
pub struct NewcombSummaryRow {
    pub alpha: f64,
    /// Best expected reward over all policies.
    pub reward_opt: f64,
    /// Mean realized reward.
    pub reward_sim: f64,
    /// Standard error of `reward_sim` given the selected policies.
    pub reward_sim_err: f64,
    /// Mean selected one-boxing probability.
    pub one_box_rate_sim: f64,
    /// Fraction of episodes whose sampled action was one-boxing.
    pub one_box_action_rate: f64,
    /// One-boxing probability of the optimal policy; 0.5 where every policy ties.
    pub one_box_rate_opt: f64,
    pub episodes: usize,
}

#[derive(Debug, Clone)]
pub struct NewcombSweep {
    pub records: Vec<RunRecord>,
    pub summary: Vec<NewcombSummaryRow>,
}

/// 1 when one-boxing is strictly better, 0 when two-boxing is, 0.5 on a tie.
pub fn optimal_one_box(model: &NewcombModel) -> ibrl_core::Result<f64> {
    let slope = newcomb_expected_reward(1.0, model)? - newcomb_expected_reward(0.0, model)?;
    Ok(if slope > TIE_TOLERANCE {
        1.0
    } else if slope < -TIE_TOLERANCE {
        0.0
    } else {
        0.5
    })
}

fn run_alpha(
    cfg: &NewcombConfig,
    alpha: f64,
    seed: u64,
) -> ibrl_core::Result<(Vec<RunRecord>, NewcombSummaryRow)> {
    let model = NewcombModel::new(cfg.env.reward, alpha)?;
    let grid = policy_grid(2, cfg.agent.grid_step)?;
    let belief = Infradistribution::from_measure(NewcombMeasure::new(model));
    let best = newcomb_best_reward(&model)?;
    let label = label(alpha);
    let key = alpha.to_bits();

    let n = cfg.run.episodes;
    let mut records = Vec::with_capacity(n);
    let (mut reward_sum, mut var_sum, mut p_sum, mut one_box_actions) = (0.0, 0.0, 0.0, 0usize);
    for e in 0..n {
        let mut agent = Agent::new(
            Flavor::IbMaximin,
            belief.clone(),
            NewcombEvaluator::new(model.reward()),
            grid.clone(),
            stream(seed, &[agent_role(), key, e as u64]),
        )?;
        let mut env = stream(seed, &[env_role(), key, e as u64]);
        let (policy, action) = agent.decide()?;
        let step = newcomb_step(&model, &policy, action, &mut env)?;
        let p = policy.prob(ONE_BOX);
        agent.observe(NewcombObservation {
            action,
            prediction: step.prediction,
        })?;

        let mut rec = EpisodeRecorder::new(EXPERIMENT, &label, seed, e as u64);
        rec.push(
            action,
            step.reward,
            newcomb_expected_regret(&model, p)?,
            best,
        );
        records.extend(rec.finish());

        reward_sum += step.reward;
        var_sum += newcomb_reward_variance(p, &model)?;
        p_sum += p;
        one_box_actions += usize::from(action == ONE_BOX);
    }
    let nf = n as f64;
    let row = NewcombSummaryRow {
        alpha,
        reward_opt: best,
        reward_sim: reward_sum / nf,
        reward_sim_err: var_sum.sqrt() / nf,
        one_box_rate_sim: p_sum / nf,
        one_box_action_rate: one_box_actions as f64 / nf,
        one_box_rate_opt: optimal_one_box(&model)?,
        episodes: n,
    };
    Ok((records, row))
}

/// Runs every accuracy value of `cfg` (override with `alphas`).
pub fn run(
    cfg: &NewcombConfig,
    alphas: Option<&[f64]>,
    seed: u64,
    workers: Option<usize>,
) -> Result<NewcombSweep> {
    cfg.validate()?;
    let owned;
    let alphas = match alphas {
        Some(a) => a,
        None => {
            owned = cfg.alphas()?;
            &owned
        }
    };
    let parts = parallel_map(alphas, workers, |&alpha| {
        run_alpha(cfg, alpha, seed).in_run(|| format!("{EXPERIMENT} alpha {alpha}"))
    })?;
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for (r, s) in parts {
        records.extend(r);
        summary.push(s);
    }
    Ok(NewcombSweep { records, summary })
}

pub fn write_summary<W: Write>(
    rows: &[NewcombSummaryRow],
    out: W,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_prob(r.alpha),
            format!("{:.6}", r.reward_opt),
            format!("{:.6}", r.reward_sim),
            format!("{:.6}", r.reward_sim_err),
            format!("{:.6}", r.one_box_rate_sim),
            format!("{:.6}", r.one_box_action_rate),
            format!("{:.6}", r.one_box_rate_opt),
            r.episodes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
