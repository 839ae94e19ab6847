//! Synthetic benchmark pipeline: generate, run both criteria, aggregate.
//!
//! Instance `i` of every row uses the seed `seed ^ i` for both synthesis and
//! RANSAC (on separate streams), so rows at different inlier ratios share
//! ground-truth geometry and results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_dual, RansacConfig};
use crate::metrics::{aggregate, BenchRow, InstanceOutcome};
use crate::models::Family;
use crate::seeding::derive_seed;
use crate::stopping::{Iterations, StopConfig};
use crate::synth::{generate, ProblemInstance, ShapeParams, SynthParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub family: Family,
    pub n: usize,
    pub inlier_ratios: Vec<f64>,
    pub success: f64,
    pub instances: usize,
    pub seed: u64,
    /// AUC thresholds in box units.
    pub thresholds: Vec<f64>,
    pub inlier_threshold: f64,
    pub max_iterations: Iterations,
    pub box_half_width: f64,
    pub noise_det_range: (f64, f64),
    pub shape: ShapeParams,
}

impl BenchConfig {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            n: match family {
                Family::Line => 50,
                Family::Ellipse => 100,
            },
            inlier_ratios: vec![0.2, 0.3, 0.4, 0.5],
            success: 0.99,
            instances: 10_000,
            seed: 0,
            thresholds: vec![1.0, 2.0, 3.0],
            inlier_threshold: 3.0,
            max_iterations: StopConfig::<f64>::DEFAULT_MAX_ITERATIONS,
            box_half_width: 100.0,
            noise_det_range: (0.5, 2.0),
            shape: ShapeParams::default(),
        }
    }

    pub fn synth_params(&self, inlier_ratio: f64, index: u64) -> SynthParams {
        SynthParams {
            family: self.family,
            n: self.n,
            inlier_ratio,
            box_half_width: self.box_half_width,
            noise_det_range: self.noise_det_range,
            seed: derive_seed(self.seed, index),
            shape: self.shape,
        }
    }

    pub fn ransac_config(&self, index: u64) -> RansacConfig<f64> {
        RansacConfig {
            success: self.success,
            max_iterations: self.max_iterations,
            inlier_threshold: self.inlier_threshold,
            seed: derive_seed(self.seed, index),
        }
    }

    /// Checks every row up front so a bad ratio fails before any work.
    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(Error::InvalidParameter(
                "at least one instance is required".into(),
            ));
        }
        if self.inlier_ratios.is_empty() || self.thresholds.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.thresholds.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidParameter(
                "AUC thresholds must be positive".into(),
            ));
        }
        StopConfig::new(self.success, crate::Criterion::Exact, self.max_iterations)?;
        for &p in &self.inlier_ratios {
            self.synth_params(p, 0).validate()?;
        }
        Ok(())
    }
}

pub fn evaluate_instance(
    cfg: &BenchConfig,
    inlier_ratio: f64,
    index: u64,
) -> Result<InstanceOutcome<f64>> {
    let instance: ProblemInstance<f64> = generate(&cfg.synth_params(inlier_ratio, index))?;
    let run = run_dual(&instance, &cfg.ransac_config(index))?;
    Ok(InstanceOutcome::new(&instance, &run))
}

/// One row; parallel over instances on the current rayon pool.
pub fn run_row(cfg: &BenchConfig, inlier_ratio: f64) -> Result<BenchRow<f64>> {
    let outcomes = (0..cfg.instances as u64)
        .into_par_iter()
        .map(|i| evaluate_instance(cfg, inlier_ratio, i))
        .collect::<Result<Vec<_>>>()?;
    aggregate(cfg.family, cfg.n, inlier_ratio, &outcomes, &cfg.thresholds)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow<f64>>> {
    cfg.validate()?;
    cfg.inlier_ratios.iter().map(|&p| run_row(cfg, p)).collect()
}
