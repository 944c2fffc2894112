//! Experiment drivers. Each rollout unit draws from streams keyed by the
//! experiment seed and the unit's identity, so results do not depend on how
//! units are scheduled across workers.

pub mod ku;
pub mod newcomb;
pub mod trap;
pub mod validate_classical;

use std::path::Path;

use rayon::prelude::*;

use ibrl_core::rng::label_key;

use crate::config::{
    load, resolve_seed, ExperimentId, KuConfig, NewcombConfig, TrapConfig, ValidateClassicalConfig,
};
use crate::error::{HarnessError, Result};
use crate::record::RunRecord;

/// Stream path roles.
pub(crate) fn agent_role() -> u64 {
    label_key("agent")
}

pub(crate) fn env_role() -> u64 {
    label_key("env")
}

pub(crate) fn world_role() -> u64 {
    label_key("world")
}

/// Maps `f` over `items` on `workers` threads (rayon's default pool when
/// `None`), returning results in input order.
pub fn parallel_map<T, U, F>(items: &[T], workers: Option<usize>, f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    match workers {
        None => items.par_iter().map(&f).collect(),
        Some(0) => Err(HarnessError::Config("workers must be at least 1".into())),
        Some(1) => items.iter().map(f).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start {n} workers: {e}")))?
            .install(|| items.par_iter().map(&f).collect()),
    }
}

/// Formats a probability for agent labels without trailing zeros.
pub(crate) fn fmt_prob(p: f64) -> String {
    let s = format!("{p:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

/// Records of one experiment run and, for Newcomb, the per-accuracy summary.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub seed: u64,
    pub records: Vec<RunRecord>,
    pub newcomb_summary: Option<Vec<newcomb::NewcombSummaryRow>>,
}

/// Loads the config of `id` (defaults when `config` is `None`) and runs it.
/// Flag values take precedence over the file.
pub fn run_experiment(
    id: ExperimentId,
    config: Option<&Path>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<RunOutput> {
    let output = |seed, records, newcomb_summary| RunOutput {
        seed,
        records,
        newcomb_summary,
    };
    match id {
        ExperimentId::ValidateClassical => {
            let l = load::<ValidateClassicalConfig>(config, id)?;
            let seed = resolve_seed(seed, l.seed)?;
            Ok(output(
                seed,
                validate_classical::run(&l.config, seed, workers.or(l.config.workers))?,
                None,
            ))
        }
        ExperimentId::KuBandit => {
            let l = load::<KuConfig>(config, id)?;
            let seed = resolve_seed(seed, l.seed)?;
            Ok(output(
                seed,
                ku::run(&l.config, seed, workers.or(l.config.workers))?,
                None,
            ))
        }
        ExperimentId::Newcomb => {
            let l = load::<NewcombConfig>(config, id)?;
            let seed = resolve_seed(seed, l.seed)?;
            let sweep = newcomb::run(&l.config, None, seed, workers.or(l.config.workers))?;
            Ok(output(seed, sweep.records, Some(sweep.summary)))
        }
        ExperimentId::TrapBandit => {
            let l = load::<TrapConfig>(config, id)?;
            let seed = resolve_seed(seed, l.seed)?;
            Ok(output(
                seed,
                trap::run(&l.config, seed, workers.or(l.config.workers))?.records,
                None,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<u64> = (0..200).collect();
        for workers in [None, Some(1), Some(3)] {
            let out = parallel_map(&items, workers, |x| Ok(x * 2)).unwrap();
            assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        }
        assert!(parallel_map(&items, Some(0), |x| Ok(*x)).is_err());
    }

    #[test]
    fn probability_labels() {
        assert_eq!(fmt_prob(0.99), "0.99");
        assert_eq!(fmt_prob(0.5), "0.5");
        assert_eq!(fmt_prob(1.0), "1");
    }
}
