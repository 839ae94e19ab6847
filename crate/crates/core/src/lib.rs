//! RANSAC with an exact all-inlier stopping criterion.
//!
//! The classic adaptive stopping rule estimates the probability of drawing an
//! all-inlier minimal sample as `p^k`, which treats the draw as sampling with
//! replacement. Drawing without replacement follows the hypergeometric law
//! `C(I, k) / C(n, k)`, which is always smaller for `k >= 2` and `0 < I < n`.
//! This crate provides both rules, a hypothesize-and-verify loop that records
//! the best model at both stopping points in one pass, a synthetic 2D
//! line/ellipse benchmark and a solver-free Monte-Carlo check of the attained
//! success rate.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases below
//! fix the scalar to `f64`, which is what the benchmark and CLI use.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod models;
pub mod montecarlo;
pub mod scalar;
pub mod seeding;
pub mod stopping;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;
pub use stopping::{ConsensusCounts, Criterion, Iterations, StopConfig};

pub type Point = models::Point2<f64>;
pub type Line = models::LineModel<f64>;
pub type Ellipse = models::EllipseModel<f64>;
pub type Hypothesis = models::ModelHypothesis<f64>;
pub type Instance = synth::ProblemInstance<f64>;
pub type DualRun = engine::DualRunResult<f64>;
pub type Outcome = metrics::InstanceOutcome<f64>;
pub type Row = metrics::BenchRow<f64>;
