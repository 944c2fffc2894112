//! Nearest-rank quantiles and percentile bootstrap intervals.

use std::fmt;

use rand::Rng;

use crate::error::{HarnessError, Result};

pub const DEFAULT_BOOTSTRAP: usize = 10_000;

/// The `q`-quantile of sorted data by the nearest-rank rule: the value at rank
/// `ceil(q·n)`, clamped to `[1, n]`.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    // guard against q·n landing a hair above an integer
    let rank = ((q * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

fn sorted_copy(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentileReport {
    pub q: f64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub catastrophe_rate: Option<f64>,
}

impl PercentileReport {
    /// `p50`, `p95`, …
    pub fn statistic(&self) -> String {
        let pct = self.q * 100.0;
        if (pct - pct.round()).abs() < 1e-9 {
            format!("p{}", pct.round())
        } else {
            format!("p{pct}")
        }
    }
}

impl fmt::Display for PercentileReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.2} [{:.2}, {:.2}]",
            self.estimate, self.ci_lo, self.ci_hi
        )
    }
}

fn check(samples: &[f64], qs: &[f64], n_boot: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(HarnessError::Config(
            "bootstrap needs at least one sample".into(),
        ));
    }
    if let Some(q) = qs.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(HarnessError::Config(format!("quantile {q} outside (0, 1)")));
    }
    if n_boot == 0 {
        return Err(HarnessError::Config(
            "bootstrap needs at least one resample".into(),
        ));
    }
    Ok(())
}

/// Point estimates and 95% percentile-bootstrap intervals for several
/// quantiles, sharing the resamples. Each interval is widened if needed so it
/// contains its estimate.
pub fn bootstrap_quantiles<R: Rng + ?Sized>(
    samples: &[f64],
    qs: &[f64],
    n_boot: usize,
    rng: &mut R,
) -> Result<Vec<PercentileReport>> {
    check(samples, qs, n_boot)?;
    let sorted = sorted_copy(samples);
    let n = samples.len();
    let mut boot: Vec<Vec<f64>> = vec![Vec::with_capacity(n_boot); qs.len()];
    let mut resample = vec![0.0; n];
    for _ in 0..n_boot {
        for slot in resample.iter_mut() {
            *slot = samples[rng.random_range(0..n)];
        }
        resample.sort_by(f64::total_cmp);
        for (dist, &q) in boot.iter_mut().zip(qs) {
            dist.push(nearest_rank(&resample, q));
        }
    }
    Ok(qs
        .iter()
        .zip(boot)
        .map(|(&q, dist)| {
            let dist = sorted_copy(&dist);
            let estimate = nearest_rank(&sorted, q);
            PercentileReport {
                q,
                estimate,
                ci_lo: nearest_rank(&dist, 0.025).min(estimate),
                ci_hi: nearest_rank(&dist, 0.975).max(estimate),
                catastrophe_rate: None,
            }
        })
        .collect())
}

pub fn bootstrap_percentiles<R: Rng + ?Sized>(
    samples: &[f64],
    q: f64,
    n_boot: usize,
    rng: &mut R,
) -> Result<PercentileReport> {
    Ok(bootstrap_quantiles(samples, &[q], n_boot, rng)?.remove(0))
}

/// Whether two intervals share at least one point.
pub fn intervals_overlap(a: &PercentileReport, b: &PercentileReport) -> bool {
    a.ci_lo <= b.ci_hi && b.ci_lo <= a.ci_hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use ibrl_core::rng::stream;

    #[test]
    fn nearest_rank_examples() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.5), 50.0);
        assert_eq!(nearest_rank(&v, 0.95), 95.0);
        assert_eq!(nearest_rank(&v, 0.001), 1.0);
        let v: Vec<f64> = (1..=200).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.95), 190.0);
        assert_eq!(nearest_rank(&[3.0], 0.5), 3.0);
    }

    #[test]
    fn constant_samples_collapse() {
        let r = bootstrap_percentiles(&[9.6; 40], 0.5, 500, &mut stream(1, &[])).unwrap();
        assert_eq!((r.estimate, r.ci_lo, r.ci_hi), (9.6, 9.6, 9.6));
        assert_eq!(r.to_string(), "9.60 [9.60, 9.60]");
        assert_eq!(r.statistic(), "p50");
    }

    #[test]
    fn median_of_one_to_hundred() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let r = bootstrap_percentiles(&v, 0.5, 2000, &mut stream(2, &[])).unwrap();
        assert_eq!(r.estimate, 50.0);
        assert!(r.ci_lo <= 50.0 && 50.0 <= r.ci_hi);
        assert!(r.ci_lo >= 35.0 && r.ci_hi <= 65.0);

        // same seed, same interval
        let again = bootstrap_percentiles(&v, 0.5, 2000, &mut stream(2, &[])).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn bad_inputs() {
        let mut rng = stream(0, &[]);
        assert!(bootstrap_percentiles(&[], 0.5, 10, &mut rng).is_err());
        assert!(bootstrap_percentiles(&[1.0], 1.0, 10, &mut rng).is_err());
        assert!(bootstrap_percentiles(&[1.0], 0.5, 0, &mut rng).is_err());
    }
}
