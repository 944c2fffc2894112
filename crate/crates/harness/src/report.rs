//! Per-agent summaries of a run-record file: bootstrap percentiles of the
//! final cumulative expected regret and the catastrophe rate.

use std::io::Write;

use ibrl_core::rng::{label_key, stream};

use crate::error::{HarnessError, Result};
use crate::record::{group_episodes, RunRecord};
use crate::stats::{bootstrap_quantiles, PercentileReport};

pub const REPORT_HEADER: [&str; 9] = [
    "experiment",
    "agent",
    "runs",
    "catastrophe_rate",
    "statistic",
    "estimate",
    "ci_lo",
    "ci_hi",
    "summary",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub experiment: String,
    pub agent: String,
    pub runs: usize,
    /// Fraction of episodes with at least one reward below the threshold.
    pub catastrophe_rate: f64,
    pub percentiles: Vec<PercentileReport>,
}

pub fn summarize(
    records: &[RunRecord],
    quantiles: &[f64],
    bootstrap: usize,
    catastrophe_below: f64,
    seed: u64,
) -> Result<Vec<AgentSummary>> {
    if records.is_empty() {
        return Err(HarnessError::Config("no run records to summarize".into()));
    }
    group_episodes(records)
        .into_iter()
        .map(|(agent, episodes)| {
            let finals: Vec<f64> = episodes
                .iter()
                .map(|e| e.last().map_or(0.0, |r| r.cum_exp_regret))
                .collect();
            let bad = episodes
                .iter()
                .filter(|e| e.iter().any(|r| r.reward < catastrophe_below))
                .count();
            let rate = bad as f64 / episodes.len() as f64;
            let mut rng = stream(seed, &[label_key("bootstrap"), label_key(&agent)]);
            let mut percentiles = bootstrap_quantiles(&finals, quantiles, bootstrap, &mut rng)?;
            for p in &mut percentiles {
                p.catastrophe_rate = Some(rate);
            }
            Ok(AgentSummary {
                experiment: episodes[0][0].experiment.clone(),
                agent,
                runs: episodes.len(),
                catastrophe_rate: rate,
                percentiles,
            })
        })
        .collect()
}

pub fn write_report<W: Write>(
    summaries: &[AgentSummary],
    out: W,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for s in summaries {
        for p in &s.percentiles {
            w.write_record([
                s.experiment.clone(),
                s.agent.clone(),
                s.runs.to_string(),
                format!("{:.3}", s.catastrophe_rate),
                p.statistic(),
                format!("{:.6}", p.estimate),
                format!("{:.6}", p.ci_lo),
                format!("{:.6}", p.ci_hi),
                p.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
