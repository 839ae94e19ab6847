//! End-to-end error metrics: per-point error samples, AUC@X and the
//! approximate-vs-exact comparison rows.

use serde::{Deserialize, Serialize};

use crate::engine::DualRunResult;
use crate::models::{Family, ModelHypothesis};
use crate::synth::ProblemInstance;
use crate::{Error, Real, Result};

/// One error per ground-truth point: the distance from the noise-free point
/// to `model`. A missing model yields `+inf` for every point.
pub fn error_samples<T: Real>(
    instance: &ProblemInstance<T>,
    model: Option<&ModelHypothesis<T>>,
) -> Vec<T> {
    match model {
        Some(m) => instance
            .clean_points
            .iter()
            .map(|&p| m.distance(p))
            .collect(),
        None => vec![T::infinity(); instance.clean_points.len()],
    }
}

/// Normalized area under the recall-vs-error curve on `[0, t]`, in percent.
///
/// Equals `100 * mean(max(0, 1 - e / t))`.
pub fn auc<T: Real>(errors: &[T], t: T) -> Result<T> {
    if errors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(
            "AUC threshold must be positive".into(),
        ));
    }
    let credit = errors
        .iter()
        .map(|&e| (T::one() - e.min(t) / t).max(T::zero()))
        .sum::<T>();
    Ok(T::lit(100.0) * credit / T::from_count(errors.len()))
}

/// `100 (exact - approx) / approx`; zero when both vanish.
pub fn relative_delta_pct<T: Real>(approx: T, exact: T) -> T {
    if approx == exact {
        T::zero()
    } else {
        T::lit(100.0) * (exact - approx) / approx
    }
}

/// What one instance contributes to a benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome<T> {
    pub errors_approx: Vec<T>,
    pub errors_exact: Vec<T>,
    pub approx_iterations: u64,
    pub exact_iterations: u64,
}

impl<T: Real> InstanceOutcome<T> {
    pub fn new(instance: &ProblemInstance<T>, run: &DualRunResult<T>) -> Self {
        Self {
            errors_approx: error_samples(instance, run.best_at_approx.model.as_ref()),
            errors_exact: error_samples(instance, run.best_at_exact.model.as_ref()),
            approx_iterations: run.approx_iterations(),
            exact_iterations: run.exact_iterations(),
        }
    }

    /// `(N_e - N_a) / N_a` for this instance.
    pub fn undersampling(&self) -> T {
        let na = T::lit(self.approx_iterations as f64);
        let ne = T::lit(self.exact_iterations as f64);
        (ne - na) / na
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow<T> {
    pub family: Family,
    pub n: usize,
    pub inlier_ratio: f64,
    pub thresholds: Vec<T>,
    pub auc_approx: Vec<T>,
    pub auc_exact: Vec<T>,
    pub delta_pct: Vec<T>,
    /// Mean per-instance `(N_e - N_a) / N_a`, in percent.
    pub mean_nea_pct: T,
    pub instance_count: usize,
    /// Instances without any verifiable model at each stop.
    pub failures_approx: usize,
    pub failures_exact: usize,
}

/// Pools error samples over all instances, then computes AUC per threshold.
pub fn aggregate<T: Real>(
    family: Family,
    n: usize,
    inlier_ratio: f64,
    outcomes: &[InstanceOutcome<T>],
    thresholds: &[T],
) -> Result<BenchRow<T>> {
    if outcomes.is_empty() || thresholds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pooled_approx: Vec<T> = outcomes
        .iter()
        .flat_map(|o| o.errors_approx.iter().copied())
        .collect();
    let pooled_exact: Vec<T> = outcomes
        .iter()
        .flat_map(|o| o.errors_exact.iter().copied())
        .collect();
    let auc_approx = thresholds
        .iter()
        .map(|&t| auc(&pooled_approx, t))
        .collect::<Result<Vec<_>>>()?;
    let auc_exact = thresholds
        .iter()
        .map(|&t| auc(&pooled_exact, t))
        .collect::<Result<Vec<_>>>()?;
    let delta_pct = auc_approx
        .iter()
        .zip(&auc_exact)
        .map(|(&a, &e)| relative_delta_pct(a, e))
        .collect();
    let count = T::from_count(outcomes.len());
    let mean_nea_pct = T::lit(100.0)
        * outcomes
            .iter()
            .map(InstanceOutcome::undersampling)
            .sum::<T>()
        / count;
    let failed = |errs: &Vec<T>| errs.first().is_some_and(|e| e.is_infinite());
    Ok(BenchRow {
        family,
        n,
        inlier_ratio,
        thresholds: thresholds.to_vec(),
        auc_approx,
        auc_exact,
        delta_pct,
        mean_nea_pct,
        instance_count: outcomes.len(),
        failures_approx: outcomes.iter().filter(|o| failed(&o.errors_approx)).count(),
        failures_exact: outcomes.iter().filter(|o| failed(&o.errors_exact)).count(),
    })
}

/// [`aggregate`] over raw `(instance, run)` pairs of one configuration.
pub fn aggregate_runs<T: Real>(
    runs: &[(ProblemInstance<T>, DualRunResult<T>)],
    thresholds: &[T],
) -> Result<BenchRow<T>> {
    let (first, _) = runs.first().ok_or(Error::EmptyInput)?;
    let outcomes: Vec<_> = runs
        .iter()
        .map(|(i, r)| InstanceOutcome::new(i, r))
        .collect();
    aggregate(
        first.family(),
        first.n(),
        first.params.inlier_ratio,
        &outcomes,
        thresholds,
    )
}
