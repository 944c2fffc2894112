//! Affine measures and infradistributions.
//!
//! An [`AMeasure`] is an affine evaluator `(λμ, b)` assigning `λ·E_μ[f] + b` to a
//! bounded return function `f`. An [`Infradistribution`] is stored as a finite
//! set of such points (its extremal minimal points) and evaluates `f` by the
//! minimum over them.
//!
//! Beliefs are assembled from singletons with two operations:
//! [`Infradistribution::mix_classical`] (probabilistic uncertainty, weighted
//! Minkowski combination) and [`Infradistribution::mix_knightian`] (ambiguity,
//! set union).

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::worldmodels::{check_weights, WorldModel};

/// Absolute tolerance used for ties between expectations.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// One affine evaluator over a world model, conditioned on `history`.
#[derive(Debug, Clone, PartialEq)]
pub struct AMeasure<W: WorldModel> {
    scale: f64,
    measure: W,
    offset: f64,
    history: W::History,
}

impl<W: WorldModel> AMeasure<W> {
    pub fn new(scale: f64, measure: W, offset: f64, history: W::History) -> Result<Self> {
        if !scale.is_finite() || scale < 0.0 {
            return Err(Error::Config(format!(
                "a-measure scale {scale} must be a nonnegative real"
            )));
        }
        if !offset.is_finite() || offset < 0.0 {
            return Err(Error::Config(format!(
                "a-measure offset {offset} must be a nonnegative real"
            )));
        }
        Ok(Self {
            scale,
            measure,
            offset,
            history,
        })
    }

    /// `(1·μ, 0)` at the empty history.
    pub fn from_measure(measure: W) -> Self {
        let history = measure.empty_history();
        Self {
            scale: 1.0,
            measure,
            offset: 0.0,
            history,
        }
    }

    pub(crate) fn from_parts(scale: f64, measure: W, offset: f64, history: W::History) -> Self {
        debug_assert!(
            scale >= 0.0 && offset >= 0.0,
            "scale {scale}, offset {offset}"
        );
        Self {
            scale,
            measure,
            offset,
            history,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn measure(&self) -> &W {
        &self.measure
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn history(&self) -> &W::History {
        &self.history
    }

    /// `λ·E_μ[f | history] + b`. A zero-scale point evaluates to its offset
    /// without consulting the measure.
    pub fn evaluate(&self, f: &W::Return) -> Result<f64> {
        if self.scale == 0.0 {
            return Ok(self.offset);
        }
        Ok(self.scale * self.measure.expectation(&self.history, f)? + self.offset)
    }

    /// `λ·E_μ[1] + b`.
    pub fn evaluate_one(&self) -> Result<f64> {
        Ok(self.mass()? + self.offset)
    }

    /// `λ·E_μ[1]`.
    pub fn mass(&self) -> Result<f64> {
        if self.scale == 0.0 {
            return Ok(0.0);
        }
        Ok(self.scale * self.measure.total_mass(&self.history)?)
    }

    /// `(λ·m_1, …, λ·m_n, b)` for explicit models.
    fn effective_vector(&self) -> Option<Vec<f64>> {
        let mut v: Vec<f64> = self
            .measure
            .effective_masses()?
            .into_iter()
            .map(|m| self.scale * m)
            .collect();
        v.push(self.offset);
        Some(v)
    }
}

/// How aggressively [`Infradistribution::prune_with`] removes points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PruneMode {
    /// Exact duplicates only.
    Duplicates,
    /// Duplicates, and on explicit models any point componentwise dominated by another.
    #[default]
    Dominated,
    /// As `Dominated`, plus points lying above a convex combination of the
    /// others (one small LP per point).
    ConvexRedundant,
}

/// A finite nonempty set of a-measures over one world model and one history.
#[derive(Debug, Clone, PartialEq)]
pub struct Infradistribution<W: WorldModel> {
    points: Vec<AMeasure<W>>,
    pruned: bool,
}

impl<W: WorldModel> Infradistribution<W> {
    pub fn new(points: Vec<AMeasure<W>>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInfradistribution)?;
        for p in &points[1..] {
            if !p.measure.compatible(&first.measure) {
                return Err(Error::Representation(
                    "points live over different world models".into(),
                ));
            }
            if p.history != first.history {
                return Err(Error::Representation(
                    "points are conditioned on different histories".into(),
                ));
            }
        }
        Ok(Self {
            points,
            pruned: false,
        })
    }

    pub fn singleton(point: AMeasure<W>) -> Self {
        Self {
            points: vec![point],
            pruned: true,
        }
    }

    /// The singleton `{(1·μ, 0)}`.
    pub fn from_measure(measure: W) -> Self {
        Self::singleton(AMeasure::from_measure(measure))
    }

    pub(crate) fn from_points_unchecked(points: Vec<AMeasure<W>>) -> Self {
        debug_assert!(!points.is_empty());
        Self {
            points,
            pruned: false,
        }
    }

    pub fn points(&self) -> &[AMeasure<W>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_pruned(&self) -> bool {
        self.pruned
    }

    pub fn history(&self) -> &W::History {
        &self.points[0].history
    }

    fn values(&self, f: &W::Return) -> Result<Vec<f64>> {
        self.points.iter().map(|p| p.evaluate(f)).collect()
    }

    /// `min_{a ∈ Ψ} a(f)`.
    pub fn lower_expectation(&self, f: &W::Return) -> Result<f64> {
        if self.points.is_empty() {
            return Err(Error::EmptyInfradistribution);
        }
        Ok(self.values(f)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// The worst-case point for `f`; ties go to the earliest inserted point.
    pub fn argmin_point(&self, f: &W::Return) -> Result<&AMeasure<W>> {
        let values = self.values(f)?;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let idx = values
            .iter()
            .position(|v| *v <= min + TIE_TOLERANCE)
            .ok_or(Error::EmptyInfradistribution)?;
        Ok(&self.points[idx])
    }

    /// `(E_Ψ(0), E_Ψ(1))`.
    pub fn normalization(&self) -> Result<(f64, f64)> {
        let zero = self
            .points
            .iter()
            .map(|p| p.offset)
            .fold(f64::INFINITY, f64::min);
        let mut one = f64::INFINITY;
        for p in &self.points {
            one = one.min(p.evaluate_one()?);
        }
        Ok((zero, one))
    }

    fn check_joinable(components: &[Infradistribution<W>]) -> Result<()> {
        let first = components
            .first()
            .ok_or_else(|| Error::Config("mixture needs at least one component".into()))?;
        let anchor = &first.points[0];
        for c in components {
            if c.points.is_empty() {
                return Err(Error::EmptyInfradistribution);
            }
            let p = &c.points[0];
            if !p.measure.compatible(&anchor.measure) {
                return Err(Error::Representation(
                    "mixture components use different world models".into(),
                ));
            }
            if p.history != anchor.history {
                return Err(Error::Representation(
                    "mixture components have different histories".into(),
                ));
            }
        }
        Ok(())
    }

    /// `Σ_i w_i Ψ_i = { Σ_i w_i a_i : a_i ∈ Ψ_i }` over the Cartesian product of
    /// extremal points. Zero-weight components contribute nothing and are skipped.
    pub fn mix_classical(components: &[Infradistribution<W>], weights: &[f64]) -> Result<Self> {
        if components.len() != weights.len() {
            return Err(Error::Config(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        check_weights(weights)?;
        Self::check_joinable(components)?;
        let active: Vec<(&Infradistribution<W>, f64)> = components
            .iter()
            .zip(weights.iter().copied())
            .filter(|(_, w)| *w > 0.0)
            .collect();
        let history = components[0].history().clone();

        let mut out = Vec::with_capacity(active.iter().map(|(c, _)| c.len()).product());
        let mut idx = vec![0usize; active.len()];
        loop {
            let chosen: Vec<(&AMeasure<W>, f64)> = active
                .iter()
                .zip(&idx)
                .map(|((c, w), &i)| (&c.points[i], *w))
                .collect();
            out.push(combine(&chosen, history.clone())?);

            // odometer over the product
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(Self {
                        points: out,
                        pruned: false,
                    });
                }
                idx[k] += 1;
                if idx[k] < active[k].0.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Set union of the components' points.
    pub fn mix_knightian(components: &[Infradistribution<W>]) -> Result<Self> {
        Self::check_joinable(components)?;
        let points = components
            .iter()
            .flat_map(|c| c.points.iter().cloned())
            .collect();
        Ok(Self {
            points,
            pruned: false,
        })
    }

    /// [`PruneMode::Dominated`] pruning.
    pub fn prune(&self) -> Self {
        self.prune_with(PruneMode::default())
    }

    pub fn prune_with(&self, mode: PruneMode) -> Self {
        let mut kept: Vec<AMeasure<W>> = Vec::with_capacity(self.points.len());
        for p in &self.points {
            if !kept.contains(p) {
                kept.push(p.clone());
            }
        }
        if mode == PruneMode::Duplicates {
            return Self {
                points: kept,
                pruned: true,
            };
        }
        let Some(vectors) = kept
            .iter()
            .map(AMeasure::effective_vector)
            .collect::<Option<Vec<_>>>()
        else {
            return Self {
                points: kept,
                pruned: true,
            };
        };

        let mut alive: Vec<bool> = (0..kept.len())
            .map(|j| !(0..kept.len()).any(|i| i != j && dominates(&vectors[i], i, &vectors[j], j)))
            .collect();

        if mode == PruneMode::ConvexRedundant {
            for j in 0..kept.len() {
                if !alive[j] {
                    continue;
                }
                let others: Vec<usize> = (0..kept.len()).filter(|&i| i != j && alive[i]).collect();
                if convex_redundant(&vectors, &others, j) {
                    alive[j] = false;
                }
            }
        }
        let points = kept
            .into_iter()
            .zip(alive)
            .filter(|(_, a)| *a)
            .map(|(p, _)| p)
            .collect();
        Self {
            points,
            pruned: true,
        }
    }
}

fn combine<W: WorldModel>(
    chosen: &[(&AMeasure<W>, f64)],
    history: W::History,
) -> Result<AMeasure<W>> {
    let scale: f64 = chosen.iter().map(|(a, w)| w * a.scale).sum();
    let offset: f64 = chosen.iter().map(|(a, w)| w * a.offset).sum();
    let parts: Vec<(&W, f64)> = if scale > 0.0 {
        chosen
            .iter()
            .filter(|(a, w)| w * a.scale > 0.0)
            .map(|(a, w)| (&a.measure, w * a.scale / scale))
            .collect()
    } else {
        chosen.iter().map(|(a, w)| (&a.measure, *w)).collect()
    };
    let measure = W::mix(&parts)?;
    Ok(AMeasure::from_parts(scale, measure, offset, history))
}

/// `a` (index `i`) dominates `b` (index `j`) when it is componentwise no larger
/// and either strictly smaller somewhere or equal with an earlier index.
fn dominates(a: &[f64], i: usize, b: &[f64], j: usize) -> bool {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x > y) {
        return false;
    }
    a.iter().zip(b).any(|(x, y)| x < y) || i < j
}

const LP_SLACK: f64 = 1e-14;

/// Whether some convex combination of `others` is componentwise below `target`.
fn convex_redundant(vectors: &[Vec<f64>], others: &[usize], target: usize) -> bool {
    if others.is_empty() {
        return false;
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = others
        .iter()
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let simplex: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(&simplex, ComparisonOp::Eq, 1.0);
    for (d, &bound) in vectors[target].iter().enumerate() {
        let row: Vec<_> = vars
            .iter()
            .zip(others)
            .map(|(&v, &i)| (v, vectors[i][d]))
            .collect();
        lp.add_constraint(&row, ComparisonOp::Le, bound);
    }
    let Ok(solution) = lp.solve() else {
        return false;
    };
    // re-verify in plain arithmetic so LP tolerances cannot remove a needed point
    let theta: Vec<f64> = vars.iter().map(|&v| solution[v].max(0.0)).collect();
    let total: f64 = theta.iter().sum();
    if total <= 0.0 {
        return false;
    }
    (0..vectors[target].len()).all(|d| {
        let combo: f64 = theta
            .iter()
            .zip(others)
            .map(|(t, &i)| t / total * vectors[i][d])
            .sum();
        combo <= vectors[target][d] + LP_SLACK
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmodels::{
        ArmReturn, BernoulliArms, FiniteMeasure, FiniteReturn, OutcomeValues,
    };

    fn finite(masses: &[f64], offset: f64) -> AMeasure<FiniteMeasure> {
        AMeasure::new(
            1.0,
            FiniteMeasure::new(masses.to_vec()).unwrap(),
            offset,
            (),
        )
        .unwrap()
    }

    fn constant_point(value: f64) -> Infradistribution<FiniteMeasure> {
        Infradistribution::singleton(finite(&[0.0, 0.0], value))
    }

    fn pull(arm: usize, arms: usize) -> ArmReturn {
        ArmReturn::pull(arm, arms, OutcomeValues::indicator()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = FiniteReturn::new(vec![0.7, 0.2]).unwrap();
        let a = AMeasure::from_measure(FiniteMeasure::point(2, 0).unwrap());
        assert!((a.evaluate(&f).unwrap() - 0.7).abs() < 1e-15);

        let bern = AMeasure::from_measure(BernoulliArms::point(&[0.5]).unwrap());
        assert!((bern.evaluate(&pull(0, 1)).unwrap() - 0.5).abs() < 1e-15);

        let a = AMeasure::new(0.4, FiniteMeasure::uniform(2).unwrap(), 0.6, ()).unwrap();
        let f = FiniteReturn::new(vec![0.0, 1.0]).unwrap();
        assert!((a.evaluate(&f).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_mismatched_return() {
        let a = AMeasure::from_measure(FiniteMeasure::uniform(2).unwrap());
        let f = FiniteReturn::new(vec![0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(a.evaluate(&f), Err(Error::Representation(_))));
        let b = AMeasure::from_measure(BernoulliArms::point(&[0.5, 0.5]).unwrap());
        assert!(matches!(
            b.evaluate(&pull(0, 3)),
            Err(Error::Representation(_))
        ));
    }

    #[test]
    fn negative_parameters_rejected() {
        let m = FiniteMeasure::uniform(2).unwrap();
        assert!(AMeasure::new(-0.1, m.clone(), 0.0, ()).is_err());
        assert!(AMeasure::new(1.0, m, -0.1, ()).is_err());
        assert_eq!(
            Infradistribution::<FiniteMeasure>::new(vec![]).unwrap_err(),
            Error::EmptyInfradistribution
        );
    }

    #[test]
    fn lower_expectation_examples() {
        let f = FiniteReturn::constant(2, 0.0);
        let psi =
            Infradistribution::mix_knightian(&[constant_point(0.3), constant_point(0.4)]).unwrap();
        assert!((psi.lower_expectation(&f).unwrap() - 0.3).abs() < 1e-15);

        let corners: Vec<_> = [[0.3, 0.4], [0.3, 0.8], [0.7, 0.4], [0.7, 0.8]]
            .iter()
            .map(|ps| Infradistribution::from_measure(BernoulliArms::point(ps).unwrap()))
            .collect();
        let ku = Infradistribution::mix_knightian(&corners).unwrap();
        assert!((ku.lower_expectation(&pull(1, 2)).unwrap() - 0.4).abs() < 1e-15);

        let mixed = Infradistribution::mix_classical(
            &[
                Infradistribution::from_measure(BernoulliArms::point(&[0.2]).unwrap()),
                Infradistribution::from_measure(BernoulliArms::point(&[0.6]).unwrap()),
            ],
            &[0.5, 0.5],
        )
        .unwrap();
        assert!((mixed.lower_expectation(&pull(0, 1)).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn argmin_point_examples() {
        let f = FiniteReturn::constant(2, 0.0);
        let psi =
            Infradistribution::mix_knightian(&[constant_point(0.4), constant_point(0.3)]).unwrap();
        assert_eq!(psi.argmin_point(&f).unwrap().offset(), 0.3);

        let single = constant_point(0.5);
        assert_eq!(single.argmin_point(&f).unwrap(), &single.points()[0]);

        let tied = Infradistribution::new(vec![finite(&[0.0, 0.1], 0.3), finite(&[0.1, 0.0], 0.3)])
            .unwrap();
        assert_eq!(tied.argmin_point(&f).unwrap(), &tied.points()[0]);
    }

    #[test]
    fn mix_classical_examples() {
        let f = FiniteReturn::new(vec![0.2, 0.9]).unwrap();
        let a = Infradistribution::singleton(finite(&[0.3, 0.7], 0.1));
        let b = Infradistribution::singleton(finite(&[0.6, 0.4], 0.0));
        let m = Infradistribution::mix_classical(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap();
        assert_eq!(m.len(), 1);
        let expect =
            0.5 * a.lower_expectation(&f).unwrap() + 0.5 * b.lower_expectation(&f).unwrap();
        assert!((m.lower_expectation(&f).unwrap() - expect).abs() < 1e-15);

        let two = Infradistribution::new(vec![finite(&[0.1, 0.2], 0.0), finite(&[0.3, 0.1], 0.1)])
            .unwrap();
        let three = Infradistribution::new(vec![
            finite(&[0.5, 0.5], 0.0),
            finite(&[0.2, 0.2], 0.2),
            finite(&[0.0, 0.9], 0.0),
        ])
        .unwrap();
        let prod =
            Infradistribution::mix_classical(&[two.clone(), three.clone()], &[0.3, 0.7]).unwrap();
        assert!(prod.len() <= 6);

        let degenerate =
            Infradistribution::mix_classical(&[two.clone(), three], &[1.0, 0.0]).unwrap();
        for g in [[0.0, 1.0], [1.0, 0.0], [0.5, 0.25]] {
            let g = FiniteReturn::new(g.to_vec()).unwrap();
            assert!(
                (degenerate.lower_expectation(&g).unwrap() - two.lower_expectation(&g).unwrap())
                    .abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn mix_classical_rejects_bad_weights() {
        let a = constant_point(0.1);
        assert!(matches!(
            Infradistribution::mix_classical(&[a.clone(), a.clone()], &[0.5, 0.6]),
            Err(Error::Config(_))
        ));
        let b = Infradistribution::from_measure(FiniteMeasure::uniform(3).unwrap());
        assert!(matches!(
            Infradistribution::mix_knightian(&[a, b]),
            Err(Error::Representation(_))
        ));
    }

    #[test]
    fn knightian_identity() {
        let a = Infradistribution::new(vec![finite(&[0.1, 0.2], 0.0), finite(&[0.3, 0.1], 0.1)])
            .unwrap();
        let u = Infradistribution::mix_knightian(std::slice::from_ref(&a)).unwrap();
        assert_eq!(u.points(), a.points());
    }

    #[test]
    fn prune_examples() {
        let dup = Infradistribution::new(vec![finite(&[0.5, 0.5], 0.1), finite(&[0.5, 0.5], 0.1)])
            .unwrap();
        assert_eq!(dup.prune().len(), 1);

        let dominated =
            Infradistribution::new(vec![finite(&[0.2, 0.3], 0.0), finite(&[0.4, 0.5], 0.2)])
                .unwrap();
        let p = dominated.prune();
        assert_eq!(p.points(), &dominated.points()[..1]);

        let incomparable =
            Infradistribution::new(vec![finite(&[0.6, 0.1], 0.0), finite(&[0.1, 0.6], 0.0)])
                .unwrap();
        assert_eq!(incomparable.prune().len(), 2);
        assert!(incomparable.prune().is_pruned());
    }

    #[test]
    fn dominated_example_agrees_on_corners() {
        // a1(f) <= a2(f) at every corner of [0, 1]^2, hence everywhere
        let a1 = finite(&[0.2, 0.3], 0.0);
        let a2 = finite(&[0.4, 0.5], 0.2);
        for f in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
            let f = FiniteReturn::new(f.to_vec()).unwrap();
            assert!(a1.evaluate(&f).unwrap() <= a2.evaluate(&f).unwrap());
        }
    }

    #[test]
    fn effective_duplicates_keep_the_first() {
        let a = AMeasure::new(0.5, FiniteMeasure::new(vec![0.4, 0.6]).unwrap(), 0.1, ()).unwrap();
        let b = finite(&[0.2, 0.3], 0.1);
        let psi = Infradistribution::new(vec![a.clone(), b]).unwrap();
        assert_eq!(psi.prune().points(), &[a]);
    }

    #[test]
    fn convex_redundancy() {
        // the middle point sits above the midpoint of the outer two
        let psi = Infradistribution::new(vec![
            finite(&[0.6, 0.0], 0.0),
            finite(&[0.35, 0.35], 0.0),
            finite(&[0.0, 0.6], 0.0),
        ])
        .unwrap();
        assert_eq!(psi.prune().len(), 3);
        let strong = psi.prune_with(PruneMode::ConvexRedundant);
        assert_eq!(strong.len(), 2);
        assert!(!strong.points().contains(&psi.points()[1]));
    }

    #[test]
    fn parametric_models_only_drop_duplicates() {
        let a = Infradistribution::from_measure(BernoulliArms::point(&[0.3]).unwrap());
        let b = Infradistribution::from_measure(BernoulliArms::point(&[0.2]).unwrap());
        let u = Infradistribution::mix_knightian(&[a.clone(), b, a]).unwrap();
        assert_eq!(u.prune_with(PruneMode::ConvexRedundant).len(), 2);
    }
}
