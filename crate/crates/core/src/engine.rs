//! Hypothesize-and-verify RANSAC with adaptive stopping.
//!
//! [`run_dual`] performs a single pass over one random stream and records the
//! best model at the point where the approximate criterion would have stopped
//! and again where the exact criterion stops. Because `P_a >= P_e`, the
//! approximate stop is always a prefix of the exact run.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::models::{EllipseModel, Family, GeometricModel, LineModel, ModelHypothesis, Point2};
use crate::seeding::{self, Purpose, StreamRng};
use crate::stopping::{ConsensusCounts, Criterion, Iterations, StopConfig};
use crate::synth::ProblemInstance;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacConfig<T> {
    /// Target success probability shared by both criteria.
    pub success: T,
    pub max_iterations: Iterations,
    /// Cutoff on the whitened distance `d / sigma`.
    pub inlier_threshold: T,
    pub seed: u64,
}

impl<T: Real> RansacConfig<T> {
    pub fn new(success: T, seed: u64) -> Self {
        Self {
            success,
            max_iterations: StopConfig::<T>::DEFAULT_MAX_ITERATIONS,
            inlier_threshold: T::lit(3.0),
            seed,
        }
    }

    pub fn stop_config(&self, mode: Criterion) -> Result<StopConfig<T>> {
        StopConfig::new(self.success, mode, self.max_iterations)
    }

    fn validate(&self) -> Result<()> {
        if !(self.inlier_threshold > T::zero()) {
            return Err(Error::InvalidParameter(
                "inlier threshold must be positive".into(),
            ));
        }
        self.stop_config(Criterion::Exact).map(|_| ())
    }
}

/// Best model at one stopping point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Snapshot<T: Real> {
    /// `None` when no hypothesis with at least `k + 1` inliers was found.
    pub model: Option<ModelHypothesis<T>>,
    pub inlier_count: usize,
    /// Iterations performed when the criterion fired.
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct DualRunResult<T: Real> {
    pub best_at_approx: Snapshot<T>,
    pub best_at_exact: Snapshot<T>,
    /// Minimal samples that did not yield a valid model, over the whole run.
    pub hypothesis_failures: u64,
}

impl<T: Real> DualRunResult<T> {
    /// `N_a`
    pub fn approx_iterations(&self) -> u64 {
        self.best_at_approx.iterations
    }

    /// `N_e`
    pub fn exact_iterations(&self) -> u64 {
        self.best_at_exact.iterations
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct RunResult<T: Real> {
    pub best: Snapshot<T>,
    pub hypothesis_failures: u64,
}

/// Uniform k-subsets by partial Fisher-Yates over a persistent permutation.
///
/// The permutation is never reset: a partial shuffle of any arrangement of
/// the items yields a uniform k-subset.
#[derive(Debug, Clone)]
pub struct SubsetSampler {
    perm: Vec<usize>,
}

impl SubsetSampler {
    pub fn new(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R, k: usize) -> &[usize] {
        let n = self.perm.len();
        assert!(k <= n, "sample size {k} exceeds population {n}");
        for j in 0..k {
            let r = rng.random_range(j..n);
            self.perm.swap(j, r);
        }
        &self.perm[..k]
    }
}

/// `k` distinct indices from `0..n`, every k-subset equally likely.
pub fn draw_minimal_sample<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    SubsetSampler::new(n).draw(rng, k).to_vec()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification<T> {
    pub inlier_count: usize,
    pub mask: Vec<bool>,
    /// Mean whitened distance over the inliers; zero without inliers.
    pub mean_residual: T,
}

/// Flags every measurement whose whitened distance to `model` is at most
/// `threshold`.
pub fn verify<T: Real>(
    model: &ModelHypothesis<T>,
    instance: &ProblemInstance<T>,
    threshold: T,
) -> Verification<T> {
    let sigma = instance.noise_sigma();
    let radius = threshold * sigma;
    let mask: Vec<bool> = instance
        .measurements
        .iter()
        .map(|&p| model.within(p, radius))
        .collect();
    let inlier_count = mask.iter().filter(|&&m| m).count();
    let total = instance
        .measurements
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(&p, _)| model.distance(p) / sigma)
        .sum::<T>();
    let mean_residual = if inlier_count > 0 {
        total / T::from_count(inlier_count)
    } else {
        T::zero()
    };
    Verification {
        inlier_count,
        mask,
        mean_residual,
    }
}

#[derive(Clone)]
struct Best<T, M> {
    model: M,
    count: usize,
    mean_residual: T,
}

/// Loop state shared by the single- and dual-criterion drivers.
struct Search<'a, T: Real, M> {
    points: &'a [Point2<T>],
    sigma: T,
    radius: T,
    k: usize,
    rng: StreamRng,
    sampler: SubsetSampler,
    mask: Vec<bool>,
    best: Option<Best<T, M>>,
    iterations: u64,
    failures: u64,
}

impl<'a, T: Real, M: GeometricModel<T>> Search<'a, T, M> {
    fn new(instance: &'a ProblemInstance<T>, cfg: &RansacConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let n = instance.n();
        let k = M::SAMPLE_SIZE;
        if n < k + 1 {
            return Err(Error::Infeasible { inliers: n, k });
        }
        let sigma = instance.noise_sigma();
        Ok(Self {
            points: &instance.measurements,
            sigma,
            radius: cfg.inlier_threshold * sigma,
            k,
            rng: seeding::stream(cfg.seed, Purpose::Ransac),
            sampler: SubsetSampler::new(n),
            mask: vec![false; n],
            best: None,
            iterations: 0,
            failures: 0,
        })
    }

    /// One hypothesize-verify iteration.
    fn step(&mut self) {
        self.iterations += 1;
        let mut sample = [Point2::default(); 8];
        for (slot, &i) in sample
            .iter_mut()
            .zip(self.sampler.draw(&mut self.rng, self.k))
        {
            *slot = self.points[i];
        }
        let model = match M::fit(&sample[..self.k]) {
            Ok(m) => m,
            Err(_) => {
                self.failures += 1;
                return;
            }
        };
        let floor = self
            .best
            .as_ref()
            .map_or(self.k + 1, |b| b.count.max(self.k + 1));
        let Some(count) = self.count_inliers(&model, floor) else {
            return;
        };
        let total = self
            .points
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(&p, _)| model.distance(p) / self.sigma)
            .sum::<T>();
        let mean_residual = total / T::from_count(count);
        let improves = match &self.best {
            None => true,
            Some(b) => count > b.count || (count == b.count && mean_residual < b.mean_residual),
        };
        if improves {
            self.best = Some(Best {
                model,
                count,
                mean_residual,
            });
        }
    }

    /// Inlier count into `self.mask`, or `None` once it cannot reach `floor`.
    fn count_inliers(&mut self, model: &M, floor: usize) -> Option<usize> {
        let n = self.points.len();
        let mut count = 0;
        for (i, (&p, flag)) in self.points.iter().zip(self.mask.iter_mut()).enumerate() {
            *flag = model.within(p, self.radius);
            if *flag {
                count += 1;
            } else if count + (n - i - 1) < floor {
                return None;
            }
        }
        (count >= floor).then_some(count)
    }

    fn budget(&self, stop: &StopConfig<T>) -> Iterations {
        match &self.best {
            None => stop.max_iterations,
            Some(b) => {
                let counts = ConsensusCounts::new(self.points.len(), b.count, self.k)
                    .expect("inlier count never exceeds n");
                stop.budget(&counts)
            }
        }
    }

    fn snapshot(&self) -> Snapshot<T> {
        Snapshot {
            model: self.best.as_ref().map(|b| b.model.clone().into()),
            inlier_count: self.best.as_ref().map_or(0, |b| b.count),
            iterations: self.iterations,
        }
    }
}

fn run_dual_with<T: Real, M: GeometricModel<T>>(
    instance: &ProblemInstance<T>,
    cfg: &RansacConfig<T>,
) -> Result<DualRunResult<T>> {
    let approx = cfg.stop_config(Criterion::Approximate)?;
    let exact = cfg.stop_config(Criterion::Exact)?;
    let mut search = Search::<T, M>::new(instance, cfg)?;
    let mut at_approx = None;
    loop {
        search.step();
        if at_approx.is_none() && search.budget(&approx).is_reached(search.iterations) {
            at_approx = Some(search.snapshot());
        }
        if search.budget(&exact).is_reached(search.iterations) {
            break;
        }
    }
    let best_at_exact = search.snapshot();
    Ok(DualRunResult {
        // N_a <= N_e, so the approximate stop has fired by now.
        best_at_approx: at_approx.unwrap_or_else(|| best_at_exact.clone()),
        best_at_exact,
        hypothesis_failures: search.failures,
    })
}

fn run_with<T: Real, M: GeometricModel<T>>(
    instance: &ProblemInstance<T>,
    cfg: &RansacConfig<T>,
    mode: Criterion,
) -> Result<RunResult<T>> {
    let stop = cfg.stop_config(mode)?;
    let mut search = Search::<T, M>::new(instance, cfg)?;
    loop {
        search.step();
        if search.budget(&stop).is_reached(search.iterations) {
            break;
        }
    }
    Ok(RunResult {
        best: search.snapshot(),
        hypothesis_failures: search.failures,
    })
}

/// One RANSAC pass recording the best model at both stopping points.
///
/// With `max_iterations = Unbounded` this does not terminate on instances
/// where no hypothesis ever reaches `k + 1` inliers.
pub fn run_dual<T: Real>(
    instance: &ProblemInstance<T>,
    cfg: &RansacConfig<T>,
) -> Result<DualRunResult<T>> {
    match instance.family() {
        Family::Line => run_dual_with::<T, LineModel<T>>(instance, cfg),
        Family::Ellipse => run_dual_with::<T, EllipseModel<T>>(instance, cfg),
    }
}

/// RANSAC stopping on a single criterion.
pub fn run<T: Real>(
    instance: &ProblemInstance<T>,
    cfg: &RansacConfig<T>,
    mode: Criterion,
) -> Result<RunResult<T>> {
    match instance.family() {
        Family::Line => run_with::<T, LineModel<T>>(instance, cfg, mode),
        Family::Ellipse => run_with::<T, EllipseModel<T>>(instance, cfg, mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fit_line;
    use crate::synth::{generate, SynthParams};
    use rand::SeedableRng;

    fn line_instance(points: Vec<Point2<f64>>) -> ProblemInstance<f64> {
        let n = points.len();
        ProblemInstance {
            params: SynthParams::new(Family::Line, n, 1.0, 0),
            inlier_flags: vec![true; n],
            clean_points: points.clone(),
            measurements: points,
            noise_cov: [[1.0, 0.0], [0.0, 1.0]],
            truth: fit_line(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0))
                .unwrap()
                .into(),
        }
    }

    #[test]
    fn full_sample_is_a_permutation() {
        let mut rng = StreamRng::seed_from_u64(3);
        let mut s = draw_minimal_sample(&mut rng, 5, 5);
        s.sort_unstable();
        assert_eq!(s, vec![0, 1, 2, 3, 4]);
        assert_eq!(draw_minimal_sample(&mut rng, 1, 1), vec![0]);
    }

    #[test]
    fn pairs_are_uniform() {
        // 60000 draws of 2 out of 4: each of the 6 pairs expects 10000.
        let mut rng = StreamRng::seed_from_u64(11);
        let mut sampler = SubsetSampler::new(4);
        let mut hist = [0u32; 16];
        for _ in 0..60_000 {
            let s = sampler.draw(&mut rng, 2);
            let (a, b) = (s[0].min(s[1]), s[0].max(s[1]));
            assert_ne!(a, b);
            hist[a * 4 + b] += 1;
        }
        let mut chi2 = 0.0;
        for a in 0..4 {
            for b in a + 1..4 {
                let c = hist[a * 4 + b] as f64;
                assert!(
                    (c - 10_000.0).abs() <= 400.0,
                    "pair ({a},{b}) drawn {c} times"
                );
                chi2 += (c - 10_000.0).powi(2) / 10_000.0;
            }
        }
        // chi-square with 5 dof, 99.9th percentile
        assert!(chi2 < 20.5, "chi2 = {chi2}");
    }

    #[test]
    fn verify_boundary_is_inclusive() {
        let pts = vec![
            Point2::new(5.0, 3.0),
            Point2::new(7.0, 3.0 + 1e-6),
            Point2::new(1.0, -2.0),
        ];
        let inst = line_instance(pts);
        let v = verify(&inst.truth, &inst, 3.0);
        assert_eq!(v.mask, vec![true, false, true]);
        assert_eq!(v.inlier_count, 2);
        assert!((v.mean_residual - 2.5).abs() < 1e-12);
    }

    #[test]
    fn far_model_has_no_inliers() {
        let inst: ProblemInstance<f64> =
            generate(&SynthParams::new(Family::Line, 50, 0.5, 4)).unwrap();
        let far = fit_line(Point2::new(1000.0, 0.0), Point2::new(1000.0, 1.0)).unwrap();
        assert_eq!(verify(&far.into(), &inst, 3.0).inlier_count, 0);
    }

    #[test]
    fn true_model_flags_noise_free_inliers() {
        let mut inst: ProblemInstance<f64> =
            generate(&SynthParams::new(Family::Ellipse, 60, 0.5, 4)).unwrap();
        let mut clean = inst.clean_points.iter();
        for (m, &flag) in inst.measurements.iter_mut().zip(&inst.inlier_flags) {
            if flag {
                *m = *clean.next().unwrap();
            }
        }
        let v = verify(&inst.truth, &inst, 3.0);
        for (&got, &flag) in v.mask.iter().zip(&inst.inlier_flags) {
            assert!(got || !flag);
        }
    }

    #[test]
    fn noise_free_all_inliers_stop_together() {
        let pts = (0..20)
            .map(|i| Point2::new(i as f64 * 3.0 - 30.0, 0.5 * i as f64))
            .collect();
        let inst = line_instance(pts);
        let res = run_dual(&inst, &RansacConfig::new(0.99, 9)).unwrap();
        assert_eq!(res.best_at_approx, res.best_at_exact);
        assert_eq!(res.approx_iterations(), res.exact_iterations());
        assert_eq!(res.best_at_exact.inlier_count, 20);
    }

    #[test]
    fn dual_snapshots_match_single_runs() {
        for family in [Family::Line, Family::Ellipse] {
            for seed in 0..10 {
                let inst: ProblemInstance<f64> =
                    generate(&SynthParams::new(family, 60, 0.3, seed)).unwrap();
                let cfg = RansacConfig::new(0.99, seed + 100);
                let dual = run_dual(&inst, &cfg).unwrap();
                let a = run(&inst, &cfg, Criterion::Approximate).unwrap();
                let e = run(&inst, &cfg, Criterion::Exact).unwrap();
                assert_eq!(a.best, dual.best_at_approx);
                assert_eq!(e.best, dual.best_at_exact);
                assert!(dual.approx_iterations() <= dual.exact_iterations());
            }
        }
    }

    #[test]
    fn iteration_cap_is_honored() {
        let inst: ProblemInstance<f64> =
            generate(&SynthParams::new(Family::Ellipse, 100, 0.2, 1)).unwrap();
        let cfg = RansacConfig {
            max_iterations: Iterations::Finite(50),
            ..RansacConfig::new(0.99, 1)
        };
        let res = run_dual(&inst, &cfg).unwrap();
        assert!(res.exact_iterations() <= 50);
    }

    #[test]
    fn rejects_bad_config() {
        let inst: ProblemInstance<f64> =
            generate(&SynthParams::new(Family::Line, 20, 0.5, 1)).unwrap();
        let cfg = RansacConfig {
            inlier_threshold: 0.0,
            ..RansacConfig::new(0.99, 1)
        };
        assert!(run_dual(&inst, &cfg).is_err());
        assert!(run_dual(&inst, &RansacConfig::new(1.0, 1)).is_err());
    }
}
