use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ibrl_harness::config::{
    alpha_range, load, peek_experiment, resolve_seed, ExperimentId, NewcombConfig,
};
use ibrl_harness::experiments::{newcomb, run_experiment};
use ibrl_harness::record::{emit_csv, load_csv};
use ibrl_harness::report::{summarize, write_report};
use ibrl_harness::stats::DEFAULT_BOOTSTRAP;
use ibrl_harness::{acceptance, HarnessError, Result};

#[derive(Parser)]
#[command(name = "ibrl", version, about = "Infra-Bayesian bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its per-step records as CSV.
    Run {
        /// validate-classical, ku-bandit, newcomb or trap-bandit. Taken from
        /// the config file's `experiment` key when omitted.
        #[arg(long)]
        experiment: Option<ExperimentId>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to `<experiment>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Newcomb only: also write the per-accuracy summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Sweep Newcomb's problem over a range of predictor accuracies.
    Sweep {
        #[arg(long, default_value = "newcomb")]
        experiment: ExperimentId,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        alpha_min: Option<f64>,
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long)]
        alpha_step: Option<f64>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "newcomb.csv")]
        out: PathBuf,
        /// Per-accuracy summary; printed to stdout when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Summarize a record file: regret percentiles with bootstrap intervals.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated percentiles.
        #[arg(long, default_value = "50,95", value_delimiter = ',')]
        percentiles: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
        bootstrap: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Episodes with any reward below this count as catastrophes.
        #[arg(long, default_value_t = 0.0)]
        catastrophe_below: f64,
        /// Printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks and print one line per criterion.
    Validate {
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| HarnessError::Io {
            path: path.to_owned(),
            source,
        })
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_owned(),
        source,
    }
}

fn write_to<F>(path: Option<&Path>, write: F) -> Result<()>
where
    F: FnOnce(Box<dyn Write + '_>) -> std::result::Result<(), csv::Error>,
{
    match path {
        Some(p) => write(Box::new(create(p)?)).map_err(csv_err(p)),
        None => write(Box::new(io::stdout().lock())).map_err(csv_err(Path::new("<stdout>"))),
    }
}

fn experiment_of(flag: Option<ExperimentId>, config: Option<&Path>) -> Result<ExperimentId> {
    if let Some(id) = flag {
        return Ok(id);
    }
    let path = config
        .ok_or_else(|| HarnessError::Config("--experiment or --config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    peek_experiment(&text)?
        .ok_or_else(|| {
            HarnessError::Config(format!(
                "{}: no `experiment` key; pass --experiment",
                path.display()
            ))
        })?
        .parse()
        .map_err(HarnessError::Config)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            experiment,
            config,
            seed,
            out,
            workers,
            summary,
        } => {
            let id = experiment_of(experiment, config.as_deref())?;
            if summary.is_some() && id != ExperimentId::Newcomb {
                return Err(HarnessError::Config(
                    "--summary applies to the newcomb experiment only".into(),
                ));
            }
            let output = run_experiment(id, config.as_deref(), seed, workers)?;
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{id}.csv")));
            emit_csv(&output.records, &out)?;
            if let (Some(path), Some(rows)) = (summary.as_deref(), &output.newcomb_summary) {
                write_to(Some(path), |w| newcomb::write_summary(rows, w))?;
            }
            eprintln!(
                "{id}: {} records, seed {}, written to {}",
                output.records.len(),
                output.seed,
                out.display()
            );
            Ok(())
        }
        Command::Sweep {
            experiment,
            config,
            alpha_min,
            alpha_max,
            alpha_step,
            episodes,
            seed,
            out,
            summary,
            workers,
        } => {
            if experiment != ExperimentId::Newcomb {
                return Err(HarnessError::Config(format!(
                    "sweep supports newcomb only, not {experiment}"
                )));
            }
            let mut l = load::<NewcombConfig>(config.as_deref(), experiment)?;
            let env = &mut l.config.env;
            env.alpha_min = alpha_min.unwrap_or(env.alpha_min);
            env.alpha_max = alpha_max.unwrap_or(env.alpha_max);
            env.alpha_step = alpha_step.unwrap_or(env.alpha_step);
            if let Some(n) = episodes {
                l.config.run.episodes = n;
            }
            let alphas = alpha_range(env.alpha_min, env.alpha_max, env.alpha_step)?;
            let seed = resolve_seed(seed, l.seed)?;
            let sweep = newcomb::run(&l.config, Some(&alphas), seed, workers.or(l.config.workers))?;
            emit_csv(&sweep.records, &out)?;
            write_to(summary.as_deref(), |w| {
                newcomb::write_summary(&sweep.summary, w)
            })?;
            eprintln!(
                "newcomb: {} accuracy values, seed {seed}, records written to {}",
                alphas.len(),
                out.display()
            );
            Ok(())
        }
        Command::Report {
            input,
            percentiles,
            bootstrap,
            seed,
            catastrophe_below,
            out,
        } => {
            let qs: Vec<f64> = percentiles.iter().map(|p| p / 100.0).collect();
            let records = load_csv(&input)?;
            let seed = resolve_seed(seed, None)?;
            let summaries = summarize(&records, &qs, bootstrap, catastrophe_below, seed)?;
            write_to(out.as_deref(), |w| write_report(&summaries, w))
        }
        Command::Validate { workers } => {
            let results = acceptance::run_all(workers);
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(HarnessError::Validation(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
