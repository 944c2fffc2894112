use super::{check_weights, Restriction, ReturnFunction, WorldModel};
use crate::error::{Error, Result};

const MASS_SLACK: f64 = 1e-12;

/// Explicit nonnegative masses over a fixed, small outcome set.
///
/// Restriction zeroes off-branch mass instead of renormalizing, so total mass
/// may fall below one.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    masses: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Config(
                "finite measure needs at least one outcome".into(),
            ));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Config(
                "finite masses must be nonnegative reals".into(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if total > 1.0 + MASS_SLACK {
            return Err(Error::Config(format!("finite masses sum to {total} > 1")));
        }
        Ok(Self { masses })
    }

    pub fn point(outcomes: usize, x: usize) -> Result<Self> {
        if x >= outcomes {
            return Err(Error::Config(format!(
                "outcome {x} out of range for {outcomes}"
            )));
        }
        let mut masses = vec![0.0; outcomes];
        masses[x] = 1.0;
        Ok(Self { masses })
    }

    pub fn uniform(outcomes: usize) -> Result<Self> {
        Self::new(vec![1.0 / outcomes as f64; outcomes])
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn outcome_count(&self) -> usize {
        self.masses.len()
    }
}

/// A value per explicit outcome, with declared bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteReturn {
    values: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl FiniteReturn {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "finite return values must be finite and nonempty".into(),
            ));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { values, lo, hi })
    }

    pub fn with_bounds(values: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        let f = Self::new(values)?;
        if lo > f.lo || hi < f.hi {
            return Err(Error::Config(
                "finite return values escape declared bounds".into(),
            ));
        }
        Ok(Self { lo, hi, ..f })
    }

    pub fn constant(outcomes: usize, c: f64) -> Self {
        Self {
            values: vec![c; outcomes],
            lo: c,
            hi: c,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl ReturnFunction for FiniteReturn {
    fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// The realized branch `L` as a subset of outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteEvent {
    branch: Vec<bool>,
}

impl FiniteEvent {
    pub fn new(branch: Vec<bool>) -> Self {
        Self { branch }
    }

    /// The single outcome `x` was observed.
    pub fn outcome(outcomes: usize, x: usize) -> Self {
        Self {
            branch: (0..outcomes).map(|i| i == x).collect(),
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.branch[x]
    }

    pub fn len(&self) -> usize {
        self.branch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branch.is_empty()
    }
}

impl FiniteMeasure {
    fn check_len(&self, n: usize, what: &str) -> Result<()> {
        if n != self.masses.len() {
            return Err(Error::Representation(format!(
                "{what} covers {n} outcomes, measure has {}",
                self.masses.len()
            )));
        }
        Ok(())
    }
}

impl WorldModel for FiniteMeasure {
    type History = ();
    type Return = FiniteReturn;
    type Indicator = FiniteEvent;
    type OffBranch = FiniteReturn;

    fn empty_history(&self) {}

    fn compatible(&self, other: &Self) -> bool {
        self.masses.len() == other.masses.len()
    }

    fn expectation(&self, _: &(), f: &FiniteReturn) -> Result<f64> {
        self.check_len(f.values.len(), "return function")?;
        Ok(self.masses.iter().zip(&f.values).map(|(m, v)| m * v).sum())
    }

    fn total_mass(&self, _: &()) -> Result<f64> {
        Ok(self.masses.iter().sum())
    }

    fn mix(parts: &[(&Self, f64)]) -> Result<Self> {
        let weights: Vec<f64> = parts.iter().map(|(_, w)| *w).collect();
        check_weights(&weights)?;
        let n = parts[0].0.masses.len();
        if parts.iter().any(|(m, _)| m.masses.len() != n) {
            return Err(Error::Representation(
                "mixed finite measures differ in outcome count".into(),
            ));
        }
        let mut masses = vec![0.0; n];
        for (m, w) in parts {
            for (acc, x) in masses.iter_mut().zip(&m.masses) {
                *acc += w * x;
            }
        }
        Ok(Self { masses })
    }

    fn restrict(&self, _: &(), event: &FiniteEvent, g: &FiniteReturn) -> Result<Restriction<Self>> {
        self.check_len(event.branch.len(), "event")?;
        self.check_len(g.values.len(), "off-branch return")?;
        let mut offbranch = 0.0;
        let masses = self
            .masses
            .iter()
            .zip(&event.branch)
            .zip(&g.values)
            .map(|((&m, &kept), &v)| {
                if kept {
                    m
                } else {
                    offbranch += m * v;
                    0.0
                }
            })
            .collect();
        Ok(Restriction {
            measure: Self { masses },
            history: (),
            scale_factor: 1.0,
            offbranch,
        })
    }

    fn effective_masses(&self) -> Option<Vec<f64>> {
        Some(self.masses.clone())
    }
}
