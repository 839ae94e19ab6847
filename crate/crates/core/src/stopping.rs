//! All-inlier sampling probabilities and the iteration counts derived from them.
//!
//! Every function here is a pure function of integer consensus counts
//! `(n, I, k)` and a target success probability `s`. The inlier ratio is never
//! stored; it is always `I / n`.

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Measurement count `n`, inlier count `I` and minimal sample size `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConsensusCounts {
    n: usize,
    inliers: usize,
    k: usize,
}

impl ConsensusCounts {
    /// Requires `0 <= inliers <= n` and `1 <= k <= n`.
    pub fn new(n: usize, inliers: usize, k: usize) -> Result<Self> {
        if n == 0 || inliers > n || k == 0 || k > n {
            return Err(Error::InvalidCounts { n, inliers, k });
        }
        Ok(Self { n, inliers, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn inliers(&self) -> usize {
        self.inliers
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn inlier_ratio<T: Real>(&self) -> T {
        T::from_count(self.inliers) / T::from_count(self.n)
    }

    /// `true` when at least one all-inlier k-subset exists.
    pub fn has_all_inlier_sample(&self) -> bool {
        self.inliers >= self.k
    }
}

/// Which all-inlier probability drives the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// `p^k`, sampling with replacement.
    Approximate,
    /// `C(I, k) / C(n, k)`, sampling without replacement.
    Exact,
}

impl Criterion {
    pub fn probability<T: Real>(self, counts: &ConsensusCounts) -> T {
        match self {
            Criterion::Approximate => approx_probability(counts),
            Criterion::Exact => exact_probability(counts),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Approximate => "approximate",
            Criterion::Exact => "exact",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approximate" | "approx" => Ok(Criterion::Approximate),
            "exact" => Ok(Criterion::Exact),
            other => Err(Error::InvalidParameter(format!(
                "unknown criterion `{other}`"
            ))),
        }
    }
}

/// An iteration count that may be unbounded.
///
/// `Finite` always orders before `Unbounded`, so `min` clamps against a cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Iterations {
    Finite(u64),
    Unbounded,
}

impl Iterations {
    pub fn finite(self) -> Option<u64> {
        match self {
            Iterations::Finite(n) => Some(n),
            Iterations::Unbounded => None,
        }
    }

    /// `true` once `done` iterations satisfy this budget.
    pub fn is_reached(self, done: u64) -> bool {
        match self {
            Iterations::Finite(n) => done >= n,
            Iterations::Unbounded => false,
        }
    }
}

impl std::fmt::Display for Iterations {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Iterations::Finite(n) => write!(f, "{n}"),
            Iterations::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Target success probability, criterion and hard iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopConfig<T> {
    success: T,
    pub mode: Criterion,
    pub max_iterations: Iterations,
}

impl<T: Real> StopConfig<T> {
    pub const DEFAULT_MAX_ITERATIONS: Iterations = Iterations::Finite(1_000_000);

    pub fn new(success: T, mode: Criterion, max_iterations: Iterations) -> Result<Self> {
        check_target(success)?;
        if max_iterations == Iterations::Finite(0) {
            return Err(Error::InvalidParameter(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(Self {
            success,
            mode,
            max_iterations,
        })
    }

    pub fn success(&self) -> T {
        self.success
    }

    /// Iterations required for `counts`, clamped to the cap.
    pub fn budget(&self, counts: &ConsensusCounts) -> Iterations {
        let p: T = self.mode.probability(counts);
        required_iterations(p, self.success)
            .expect("target validated at construction")
            .min(self.max_iterations)
    }
}

fn check_target<T: Real>(s: T) -> Result<()> {
    if s > T::zero() && s < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidTarget(s.to_f64().unwrap_or(f64::NAN)))
    }
}

/// `(I/n)^k`. Positive whenever `I > 0`, even if no all-inlier sample exists.
pub fn approx_probability<T: Real>(counts: &ConsensusCounts) -> T {
    if counts.inliers == counts.n {
        return T::one();
    }
    counts.inlier_ratio::<T>().powi(counts.k as i32)
}

/// `prod_{i<k} (I - i) / (n - i)`, and exactly zero when `I < k`.
pub fn exact_probability<T: Real>(counts: &ConsensusCounts) -> T {
    if counts.inliers < counts.k {
        return T::zero();
    }
    (0..counts.k).fold(T::one(), |acc, i| {
        acc * T::from_count(counts.inliers - i) / T::from_count(counts.n - i)
    })
}

/// Smallest `N` with `(1 - p)^N <= 1 - s`.
///
/// Returns `Finite(1)` for `p = 1` and `Unbounded` for `p = 0`.
pub fn required_iterations<T: Real>(p: T, s: T) -> Result<Iterations> {
    check_target(s)?;
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidProbability(p.to_f64().unwrap_or(f64::NAN)));
    }
    if p == T::one() {
        return Ok(Iterations::Finite(1));
    }
    if p == T::zero() {
        return Ok(Iterations::Unbounded);
    }
    let n = real_iterations(p, s).ceil();
    let n = n.to_f64().unwrap_or(f64::INFINITY);
    if !n.is_finite() {
        return Ok(Iterations::Unbounded);
    }
    // `as` saturates at u64::MAX.
    Ok(Iterations::Finite((n as u64).max(1)))
}

/// Un-ceiled `log(1 - s) / log(1 - p)` for `0 < p < 1`.
fn real_iterations<T: Real>(p: T, s: T) -> T {
    (-s).ln_1p() / (-p).ln_1p()
}

/// Success probability reached when `N` is computed from `p_assumed` but
/// samples are all-inlier with probability `p_actual`.
pub fn attained_success_rate<T: Real>(p_assumed: T, p_actual: T, s: T) -> Result<T> {
    check_target(s)?;
    if !(p_assumed > T::zero() && p_assumed < T::one()) {
        return Err(Error::DegenerateInput(
            "assumed probability must lie strictly inside (0, 1)",
        ));
    }
    if !(p_actual >= T::zero() && p_actual <= T::one()) {
        return Err(Error::InvalidProbability(
            p_actual.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if p_actual == T::one() {
        return Ok(T::one());
    }
    let exponent = real_iterations(p_assumed, s);
    Ok(-(exponent * (-p_actual).ln_1p()).exp_m1())
}

/// Success rate actually attained when iterating for the approximate
/// criterion's `N` while samples follow the exact probability.
///
/// Fails when `P_a` is 0 or 1, where the exponent is undefined.
pub fn true_success_rate<T: Real>(counts: &ConsensusCounts, s: T) -> Result<T> {
    attained_success_rate(approx_probability(counts), exact_probability(counts), s)
}

/// `(P_a - P_e) / P_a`, in `[0, 1]`. Requires `I > 0`.
pub fn relative_error<T: Real>(counts: &ConsensusCounts) -> Result<T> {
    if counts.inliers == 0 {
        return Err(Error::DegenerateInput(
            "relative error is undefined without inliers",
        ));
    }
    let pa: T = approx_probability(counts);
    let pe: T = exact_probability(counts);
    Ok(((pa - pe) / pa).max(T::zero()).min(T::one()))
}

/// `(N_e - N_a) / N_a` using un-ceiled iteration counts.
///
/// Fails when `I < k` since `N_e` is unbounded. Returns 0 for `I = n`, where
/// both criteria need a single iteration.
pub fn undersampling_ratio<T: Real>(counts: &ConsensusCounts, s: T) -> Result<T> {
    check_target(s)?;
    if !counts.has_all_inlier_sample() {
        return Err(Error::DegenerateInput(
            "no all-inlier sample exists (I < k)",
        ));
    }
    if counts.inliers == counts.n {
        return Ok(T::zero());
    }
    let pa: T = approx_probability(counts);
    let pe: T = exact_probability(counts);
    let ratio = (-pa).ln_1p() / (-pe).ln_1p() - T::one();
    Ok(ratio.max(T::zero()))
}
