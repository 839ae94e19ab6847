//! Solver-free check of the success rate a stopping criterion attains.
//!
//! A trial fixes a population of `n` items of which the first `I` are
//! inliers, computes `N` from the chosen criterion using the true `I`, draws
//! up to `N` uniform k-subsets and succeeds if any of them is all-inlier.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seeding::{self, Purpose};
use crate::stopping::{self, ConsensusCounts, Criterion};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub trials: u64,
    pub successes: u64,
    pub iterations: u64,
    pub rate: f64,
    /// Normal-approximation 95% half-width of the binomial proportion.
    pub half_width: f64,
}

impl SuccessEstimate {
    /// Binomial standard error around `p` for this trial count.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Partial Fisher-Yates draw that stops at the first outlier.
fn draw_is_all_inlier<R: Rng>(perm: &mut [usize], rng: &mut R, k: usize, inliers: usize) -> bool {
    let n = perm.len();
    for j in 0..k {
        let r = rng.random_range(j..n);
        perm.swap(j, r);
        if perm[j] >= inliers {
            return false;
        }
    }
    true
}

pub fn measure_success_rate(
    counts: ConsensusCounts,
    s: f64,
    mode: Criterion,
    trials: u64,
    seed: u64,
) -> Result<SuccessEstimate> {
    if !counts.has_all_inlier_sample() {
        return Err(Error::DegenerateInput("success is impossible when I < k"));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "at least one trial is required".into(),
        ));
    }
    let p: f64 = mode.probability(&counts);
    let iterations = stopping::required_iterations(p, s)?
        .finite()
        .expect("positive probability gives a finite count");
    let (n, k, inliers) = (counts.n(), counts.k(), counts.inliers());

    let successes = (0..trials)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |perm: &mut Vec<usize>, trial| {
                perm.clear();
                perm.extend(0..n);
                let mut rng =
                    seeding::stream(seeding::derive_seed(seed, trial), Purpose::MonteCarlo);
                (0..iterations).any(|_| draw_is_all_inlier(perm, &mut rng, k, inliers))
            },
        )
        .filter(|&ok| ok)
        .count() as u64;

    let rate = successes as f64 / trials as f64;
    Ok(SuccessEstimate {
        trials,
        successes,
        iterations,
        rate,
        half_width: 1.96 * (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}

/// Analytic success rate for `mode`: `s_true` for the approximate criterion
/// and `s` itself for the exact one (1 whenever a single draw must succeed).
pub fn predicted_success_rate(counts: &ConsensusCounts, s: f64, mode: Criterion) -> Result<f64> {
    if counts.inliers() == counts.n() {
        return Ok(1.0);
    }
    match mode {
        Criterion::Approximate => stopping::true_success_rate(counts, s),
        Criterion::Exact => {
            let pe: f64 = stopping::exact_probability(counts);
            stopping::attained_success_rate(pe, pe, s)
        }
    }
}

/// One line of Monte-Carlo output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub n: usize,
    pub inliers: usize,
    pub k: usize,
    pub s: f64,
    pub mode: Criterion,
    pub trials: u64,
    pub success_rate: f64,
    pub half_width: f64,
    pub s_true_predicted: f64,
}

pub fn mc_row(
    counts: ConsensusCounts,
    s: f64,
    mode: Criterion,
    trials: u64,
    seed: u64,
) -> Result<McRow> {
    let est = measure_success_rate(counts, s, mode, trials, seed)?;
    Ok(McRow {
        n: counts.n(),
        inliers: counts.inliers(),
        k: counts.k(),
        s,
        mode,
        trials,
        success_rate: est.rate,
        half_width: est.half_width,
        s_true_predicted: predicted_success_rate(&counts, s, mode)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(n: usize, i: usize, k: usize) -> ConsensusCounts {
        ConsensusCounts::new(n, i, k).unwrap()
    }

    #[test]
    fn all_inlier_population_always_succeeds() {
        for mode in [Criterion::Approximate, Criterion::Exact] {
            let est = measure_success_rate(counts(10, 10, 3), 0.5, mode, 100, 1).unwrap();
            assert_eq!(est.rate, 1.0);
            assert_eq!(est.iterations, 1);
        }
    }

    #[test]
    fn impossible_configurations_rejected() {
        assert!(measure_success_rate(counts(10, 2, 3), 0.99, Criterion::Exact, 100, 1).is_err());
        assert!(measure_success_rate(counts(10, 5, 3), 0.99, Criterion::Exact, 0, 1).is_err());
        assert!(measure_success_rate(counts(10, 5, 3), 1.0, Criterion::Exact, 10, 1).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let c = counts(20, 8, 3);
        let a = measure_success_rate(c, 0.9, Criterion::Approximate, 2000, 5).unwrap();
        let b = measure_success_rate(c, 0.9, Criterion::Approximate, 2000, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_draw_frequency_matches_hypergeometric() {
        // Direct frequency of all-inlier draws, independent of the stopping math.
        let mut rng = seeding::stream(3, Purpose::MonteCarlo);
        let mut perm: Vec<usize> = (0..8).collect();
        let draws = 200_000;
        let hits = (0..draws)
            .filter(|_| draw_is_all_inlier(&mut perm, &mut rng, 3, 5))
            .count();
        // C(5,3)/C(8,3) = 10/56
        let expected = 10.0 / 56.0;
        let se = (expected * (1.0 - expected) / draws as f64).sqrt();
        assert!((hits as f64 / draws as f64 - expected).abs() < 4.0 * se);
    }

    #[test]
    fn predictions() {
        let c = counts(20, 6, 5);
        assert!(
            (predicted_success_rate(&c, 0.99, Criterion::Approximate).unwrap() - 0.519).abs()
                < 5e-4
        );
        assert!((predicted_success_rate(&c, 0.99, Criterion::Exact).unwrap() - 0.99).abs() < 1e-12);
        assert_eq!(
            predicted_success_rate(&counts(10, 10, 3), 0.99, Criterion::Approximate).unwrap(),
            1.0
        );
    }
}
