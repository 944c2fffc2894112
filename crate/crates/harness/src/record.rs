//! Per-step run records and their CSV form.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{HarnessError, Result};

pub const CSV_HEADER: [&str; 10] = [
    "experiment",
    "agent",
    "seed",
    "episode",
    "step",
    "action",
    "reward",
    "exp_regret",
    "cum_regret",
    "cum_exp_regret",
];

/// One agent step. `cum_regret` accumulates realized regret (best expected
/// reward minus the sampled reward); `cum_exp_regret` accumulates `exp_regret`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub agent: String,
    pub seed: u64,
    pub episode: u64,
    pub step: u64,
    pub action: usize,
    pub reward: f64,
    pub exp_regret: f64,
    pub cum_regret: f64,
    pub cum_exp_regret: f64,
}

impl RunRecord {
    fn fields(&self) -> [String; 10] {
        [
            self.experiment.clone(),
            self.agent.clone(),
            self.seed.to_string(),
            self.episode.to_string(),
            self.step.to_string(),
            self.action.to_string(),
            format!("{:.6}", self.reward),
            format!("{:.6}", self.exp_regret),
            format!("{:.6}", self.cum_regret),
            format!("{:.6}", self.cum_exp_regret),
        ]
    }
}

/// Builds the records of one episode, keeping the running sums.
#[derive(Debug, Clone)]
pub struct EpisodeRecorder {
    experiment: String,
    agent: String,
    seed: u64,
    episode: u64,
    cum_regret: f64,
    cum_exp_regret: f64,
    records: Vec<RunRecord>,
}

impl EpisodeRecorder {
    pub fn new(experiment: &str, agent: &str, seed: u64, episode: u64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            agent: agent.to_owned(),
            seed,
            episode,
            cum_regret: 0.0,
            cum_exp_regret: 0.0,
            records: Vec::new(),
        }
    }

    /// `best_expected` is the expected reward of the optimal action this step.
    pub fn push(&mut self, action: usize, reward: f64, exp_regret: f64, best_expected: f64) {
        self.cum_regret += best_expected - reward;
        self.cum_exp_regret += exp_regret;
        self.records.push(RunRecord {
            experiment: self.experiment.clone(),
            agent: self.agent.clone(),
            seed: self.seed,
            episode: self.episode,
            step: self.records.len() as u64,
            action,
            reward,
            exp_regret,
            cum_regret: self.cum_regret,
            cum_exp_regret: self.cum_exp_regret,
        });
    }

    pub fn cum_exp_regret(&self) -> f64 {
        self.cum_exp_regret
    }

    pub fn finish(self) -> Vec<RunRecord> {
        self.records
    }
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    write_csv(records, BufWriter::new(file)).map_err(|source| HarnessError::Csv {
        path: path.to_owned(),
        source,
    })
}

pub fn read_csv<R: Read>(input: R) -> std::result::Result<Vec<RunRecord>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        )));
    }
    r.deserialize().collect()
}

pub fn load_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_csv(file).map_err(|source| HarnessError::Csv {
        path: path.to_owned(),
        source,
    })
}

/// Final cumulative expected regret of every `(agent, episode)`, in first-seen
/// agent order and ascending episode order.
pub fn final_regrets(records: &[RunRecord]) -> Vec<(String, Vec<f64>)> {
    group_episodes(records)
        .into_iter()
        .map(|(agent, eps)| {
            (
                agent,
                eps.iter()
                    .map(|e| e.last().map_or(0.0, |r| r.cum_exp_regret))
                    .collect(),
            )
        })
        .collect()
}

/// Records grouped by agent, then by episode.
pub fn group_episodes(records: &[RunRecord]) -> Vec<(String, Vec<Vec<&RunRecord>>)> {
    let mut agents: Vec<(String, std::collections::BTreeMap<u64, Vec<&RunRecord>>)> = Vec::new();
    for r in records {
        let idx = match agents.iter().position(|(a, _)| *a == r.agent) {
            Some(i) => i,
            None => {
                agents.push((r.agent.clone(), Default::default()));
                agents.len() - 1
            }
        };
        agents[idx].1.entry(r.episode).or_default().push(r);
    }
    agents
        .into_iter()
        .map(|(a, eps)| (a, eps.into_values().collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<RunRecord> {
        let mut rec = EpisodeRecorder::new("ku-bandit", "infra_bayesian", 42, 0);
        rec.push(1, 1.0, 0.3, 0.7);
        rec.push(1, 0.0, 0.3, 0.7);
        rec.finish()
    }

    #[test]
    fn empty_file_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "experiment,agent,seed,episode,step,action,reward,exp_regret,cum_regret,cum_exp_regret\n"
        );
    }

    #[test]
    fn one_record_is_two_lines() {
        let mut buf = Vec::new();
        write_csv(&sample()[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text
            .ends_with("ku-bandit,infra_bayesian,42,0,0,1,1.000000,0.300000,-0.300000,0.300000\n"));
    }

    #[test]
    fn cumulative_columns_are_prefix_sums() {
        let r = sample();
        assert!((r[1].cum_exp_regret - 0.6).abs() < 1e-15);
        assert!((r[1].cum_regret - (-0.3 + 0.7)).abs() < 1e-15);
        assert_eq!(r[1].step, 1);
    }

    #[test]
    fn round_trip() {
        let records = sample();
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            assert_eq!((a.step, a.action, &a.agent), (b.step, b.action, &b.agent));
            assert!((a.cum_regret - b.cum_regret).abs() <= 5e-7);
        }
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        let mut rec = EpisodeRecorder::new("trap-bandit", "a,b", 1, 0);
        rec.push(0, 0.0, 0.0, 0.0);
        let mut buf = Vec::new();
        write_csv(&rec.finish(), &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap()[0].agent, "a,b");
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
