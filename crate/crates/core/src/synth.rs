//! Synthetic 2D line and ellipse problem instances.
//!
//! Ground-truth points are drawn from a random segment or ellipse inside the
//! box `[-w, w]^2`, perturbed by isotropic Gaussian noise whose covariance
//! determinant is uniform in a configured range, and mixed with outliers
//! drawn uniformly from the box.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::models::{fit_line, EllipseModel, Family, ModelHypothesis, Point2};
use crate::seeding::{self, Purpose};
use crate::stopping::ConsensusCounts;
use crate::{Error, Real, Result};

/// Shape ranges for the ground-truth models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    /// Segments shorter than this are redrawn.
    pub min_segment_length: f64,
    /// Ellipse centers are uniform in `[-f w, f w]^2`.
    pub center_fraction: f64,
    /// Semi-axes are uniform in this range before being shrunk to fit the box.
    pub semi_axis_range: (f64, f64),
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self {
            min_segment_length: 20.0,
            center_fraction: 0.5,
            semi_axis_range: (10.0, 60.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub family: Family,
    pub n: usize,
    /// Nominal inlier ratio; the instance has exactly `round(n p)` inliers.
    pub inlier_ratio: f64,
    pub box_half_width: f64,
    pub noise_det_range: (f64, f64),
    pub seed: u64,
    #[serde(default)]
    pub shape: ShapeParams,
}

impl SynthParams {
    pub fn new(family: Family, n: usize, inlier_ratio: f64, seed: u64) -> Self {
        Self {
            family,
            n,
            inlier_ratio,
            box_half_width: 100.0,
            noise_det_range: (0.5, 2.0),
            seed,
            shape: ShapeParams::default(),
        }
    }

    pub fn inlier_count(&self) -> usize {
        (self.n as f64 * self.inlier_ratio).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(0.0..=1.0).contains(&self.inlier_ratio) {
            return bad("inlier ratio must lie in [0, 1]");
        }
        if !(self.box_half_width > 0.0) {
            return bad("box half width must be positive");
        }
        let (lo, hi) = self.noise_det_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("noise determinant range must be positive and ordered");
        }
        let shape = &self.shape;
        let (amin, amax) = shape.semi_axis_range;
        if !(amin > 0.0 && amin <= amax && amax.is_finite()) {
            return bad("semi-axis range must be positive and ordered");
        }
        if !(0.0..1.0).contains(&shape.center_fraction) {
            return bad("center fraction must lie in [0, 1)");
        }
        // The segment must fit inside the box diagonal.
        if !(shape.min_segment_length >= 0.0
            && shape.min_segment_length < 2.0 * self.box_half_width * std::f64::consts::SQRT_2)
        {
            return bad("minimum segment length does not fit in the box");
        }
        let k = self.family.sample_size();
        let inliers = self.inlier_count();
        if inliers < k + 1 {
            return Err(Error::Infeasible { inliers, k });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ProblemInstance<T: Real> {
    pub params: SynthParams,
    pub measurements: Vec<Point2<T>>,
    pub inlier_flags: Vec<bool>,
    /// Noise-free ground-truth points; the j-th flagged measurement is
    /// `clean_points[j]` plus noise.
    pub clean_points: Vec<Point2<T>>,
    /// `sigma^2 I`.
    pub noise_cov: [[T; 2]; 2],
    pub truth: ModelHypothesis<T>,
}

impl<T: Real> ProblemInstance<T> {
    pub fn family(&self) -> Family {
        self.truth.family()
    }

    pub fn n(&self) -> usize {
        self.measurements.len()
    }

    pub fn inlier_count(&self) -> usize {
        self.clean_points.len()
    }

    /// Standard deviation of the isotropic noise; whitening divides by it.
    pub fn noise_sigma(&self) -> T {
        self.noise_cov[0][0].sqrt()
    }

    pub fn counts(&self) -> Result<ConsensusCounts> {
        ConsensusCounts::new(self.n(), self.inlier_count(), self.family().sample_size())
    }
}

fn uniform_in_box<R: Rng>(rng: &mut R, w: f64) -> Point2<f64> {
    Point2::new(rng.random_range(-w..=w), rng.random_range(-w..=w))
}

/// Draws a problem instance; deterministic in `params` (including the seed).
pub fn generate<T: Real>(params: &SynthParams) -> Result<ProblemInstance<T>> {
    params.validate()?;
    let mut rng = seeding::stream(params.seed, Purpose::Synthesis);
    let w = params.box_half_width;
    let (det_lo, det_hi) = params.noise_det_range;
    let det = if det_lo < det_hi {
        rng.random_range(det_lo..=det_hi)
    } else {
        det_lo
    };
    // det(s^2 I_2) = s^4
    let variance = det.sqrt();
    let sigma = variance.sqrt();

    let inliers = params.inlier_count();
    let (truth, clean): (ModelHypothesis<T>, Vec<Point2<f64>>) = match params.family {
        Family::Line => {
            let (a, b) = loop {
                let a = uniform_in_box(&mut rng, w);
                let b = uniform_in_box(&mut rng, w);
                if (b - a).norm() >= params.shape.min_segment_length {
                    break (a, b);
                }
            };
            let clean = (0..inliers)
                .map(|_| a + (b - a) * rng.random::<f64>())
                .collect();
            (fit_line(a.cast::<T>(), b.cast::<T>())?.into(), clean)
        }
        Family::Ellipse => {
            let shape = &params.shape;
            let cw = shape.center_fraction * w;
            let center = if cw > 0.0 {
                uniform_in_box(&mut rng, cw)
            } else {
                Point2::default()
            };
            let (amin, amax) = shape.semi_axis_range;
            let mut semi_a = if amin < amax {
                rng.random_range(amin..=amax)
            } else {
                amin
            };
            let mut semi_b = if amin < amax {
                rng.random_range(amin..=amax)
            } else {
                amin
            };
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let (s, c) = angle.sin_cos();
            let half_x = (semi_a * semi_a * c * c + semi_b * semi_b * s * s).sqrt();
            let half_y = (semi_a * semi_a * s * s + semi_b * semi_b * c * c).sqrt();
            let fit = ((w - center.x.abs()) / half_x)
                .min((w - center.y.abs()) / half_y)
                .min(1.0);
            semi_a *= fit;
            semi_b *= fit;
            let clean = (0..inliers)
                .map(|_| {
                    let t = rng.random_range(0.0..std::f64::consts::TAU);
                    let (u, v) = (semi_a * t.cos(), semi_b * t.sin());
                    let p = Point2::new(center.x + c * u - s * v, center.y + s * u + c * v);
                    Point2::new(p.x.clamp(-w, w), p.y.clamp(-w, w))
                })
                .collect();
            let model = EllipseModel::from_geometry(
                center.cast::<T>(),
                T::lit(semi_a),
                T::lit(semi_b),
                T::lit(angle),
            )?;
            (model.into(), clean)
        }
    };

    let mut inlier_flags = vec![false; params.n];
    for i in rand::seq::index::sample(&mut rng, params.n, inliers) {
        inlier_flags[i] = true;
    }
    let mut next_clean = clean.iter();
    let measurements = inlier_flags
        .iter()
        .map(|&flag| {
            let p = if flag {
                let x: f64 = StandardNormal.sample(&mut rng);
                let y: f64 = StandardNormal.sample(&mut rng);
                *next_clean.next().expect("one clean point per flag") + Point2::new(x, y) * sigma
            } else {
                uniform_in_box(&mut rng, w)
            };
            p.cast::<T>()
        })
        .collect();

    let var = T::lit(variance);
    Ok(ProblemInstance {
        params: *params,
        measurements,
        inlier_flags,
        clean_points: clean.into_iter().map(Point2::cast::<T>).collect(),
        noise_cov: [[var, T::zero()], [T::zero(), var]],
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_inlier_count() {
        let inst: ProblemInstance<f64> =
            generate(&SynthParams::new(Family::Line, 50, 0.2, 7)).unwrap();
        assert_eq!(inst.inlier_flags.iter().filter(|&&f| f).count(), 10);
        assert_eq!(inst.clean_points.len(), 10);
        assert_eq!(inst.measurements.len(), 50);
    }

    #[test]
    fn deterministic() {
        let p = SynthParams::new(Family::Ellipse, 100, 0.3, 1);
        let a: ProblemInstance<f64> = generate(&p).unwrap();
        let b: ProblemInstance<f64> = generate(&p).unwrap();
        assert_eq!(a, b);
        let c: ProblemInstance<f64> = generate(&SynthParams { seed: 2, ..p }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn too_few_inliers_rejected() {
        let p = SynthParams::new(Family::Ellipse, 100, 0.04, 1);
        assert_eq!(
            generate::<f64>(&p).unwrap_err(),
            Error::Infeasible { inliers: 4, k: 5 }
        );
        let p = SynthParams::new(Family::Line, 10, 0.3, 1);
        assert!(generate::<f64>(&p).is_ok());
    }

    #[test]
    fn invalid_params_rejected() {
        let base = SynthParams::new(Family::Line, 50, 0.5, 1);
        assert!(SynthParams {
            box_half_width: 0.0,
            ..base
        }
        .validate()
        .is_err());
        assert!(SynthParams {
            noise_det_range: (2.0, 1.0),
            ..base
        }
        .validate()
        .is_err());
        assert!(SynthParams {
            noise_det_range: (0.0, 1.0),
            ..base
        }
        .validate()
        .is_err());
        assert!(SynthParams {
            inlier_ratio: 1.5,
            ..base
        }
        .validate()
        .is_err());
    }

    #[test]
    fn truth_passes_through_clean_points() {
        for family in [Family::Line, Family::Ellipse] {
            for seed in 0..20 {
                let inst: ProblemInstance<f64> =
                    generate(&SynthParams::new(family, 60, 0.5, seed)).unwrap();
                for &c in &inst.clean_points {
                    assert!(inst.truth.distance(c) < 1e-8, "{family:?} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let inst: ProblemInstance<f64> =
            generate(&SynthParams::new(Family::Ellipse, 30, 0.5, 3)).unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        let back: ProblemInstance<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.measurements, inst.measurements);
        assert_eq!(back.inlier_flags, inst.inlier_flags);
        assert_eq!(back.params, inst.params);
    }
}
