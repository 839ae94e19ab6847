//! Command-line driver for the `exactsac` crate.
//!
//! Every flag value is kept as text until it is resolved against the
//! optional `--config` file and the built-in defaults, so both sources go
//! through the same parsers.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use exactsac::bench::BenchConfig;
use exactsac::synth::SynthParams;

use crate::commands::{Grid, InlierSpec, ModeSel, Report};
use crate::config::{ConfigFile, Resolver};
use crate::error::usage;
pub use crate::error::CliError;
use crate::grid::{parse_f64_list, parse_usize_list, parse_value};

#[derive(Debug, Parser)]
#[command(
    name = "exactsac",
    version,
    about = "Approximate vs exact RANSAC stopping: theory, Monte-Carlo and benchmarks"
)]
pub struct Cli {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probabilities, relative error, attained success and undersampling over a grid.
    Theory(TheoryArgs),
    /// Monte-Carlo success rate of each criterion with the true inlier count.
    Mc(McArgs),
    /// Synthetic line/ellipse benchmark comparing both stopping points.
    Bench(BenchArgs),
    /// Dump one synthetic instance as JSON.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Primary output file (stdout when absent).
    #[arg(long, value_name = "FILE")]
    pub out: Option<String>,
    /// JSON mirror with a manifest.
    #[arg(long, value_name = "FILE")]
    pub json: Option<String>,
}

/// Lists accept `a,b,c` and inclusive ranges `start:end[:step]`.
#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub n: Option<String>,
    /// Inlier ratios; `I = round(p n)`.
    #[arg(long, conflicts_with = "inliers")]
    pub p: Option<String>,
    /// Inlier counts, instead of `--p`.
    #[arg(long)]
    pub inliers: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub s: Option<String>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// approximate, exact or both.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// line or ellipse.
    pub family: Option<String>,
    /// Measurements per instance (default 50 for lines, 100 for ellipses).
    #[arg(long)]
    pub n: Option<String>,
    /// Inlier ratios, one table row each.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub instances: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// AUC thresholds.
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Whitened residual cutoff for inliers.
    #[arg(long)]
    pub inlier_threshold: Option<String>,
    /// Positive integer or `unbounded`.
    #[arg(long)]
    pub max_iterations: Option<String>,
    #[arg(long)]
    pub box_half_width: Option<String>,
    /// Noise covariance determinant range `lo:hi`.
    #[arg(long)]
    pub noise_det: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long, value_name = "FILE")]
    pub out: Option<String>,
}

const GRID_KEYS: [&str; 5] = ["n", "p", "inliers", "k", "s"];
const OUTPUT_KEYS: [&str; 3] = ["out", "json", "threads"];

/// Where a resolved command writes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Destinations {
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

/// A fully resolved command, ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub threads: usize,
    pub job: Job,
    pub dest: Destinations,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Theory {
        grid: Grid,
    },
    Mc {
        grid: Grid,
        mode: ModeSel,
        trials: u64,
        seed: u64,
    },
    Bench {
        config: Box<BenchConfig>,
    },
    Synth {
        params: SynthParams,
    },
}

struct Resolved<'a> {
    r: Resolver<'a>,
}

impl Resolved<'_> {
    fn grid(
        &mut self,
        g: &GridArgs,
        defaults: [&str; 4],
        default_inliers_as_counts: bool,
    ) -> Result<Grid, CliError> {
        let [dn, dpi, dk, ds] = defaults;
        let n = parse_usize_list("n", &self.r.pick("n", g.n.as_deref(), dn))?;
        // `p` and `inliers` are one setting: a flag for either beats the file.
        let from_flags = match (&g.p, &g.inliers) {
            (Some(p), _) => Some(("p", p.clone())),
            (None, Some(i)) => Some(("inliers", i.clone())),
            (None, None) => None,
        };
        let file = self.r.file();
        let chosen = match from_flags {
            Some(v) => v,
            None => match (
                file.and_then(|f| f.get("p")),
                file.and_then(|f| f.get("inliers")),
            ) {
                (Some(_), Some(_)) => return Err(usage("config file sets both p and inliers")),
                (Some(p), None) => ("p", p.to_string()),
                (None, Some(i)) => ("inliers", i.to_string()),
                (None, None) if default_inliers_as_counts => ("inliers", dpi.to_string()),
                (None, None) => ("p", dpi.to_string()),
            },
        };
        self.r
            .resolved
            .insert(chosen.0.to_string(), chosen.1.clone());
        let inliers = match chosen {
            ("p", v) => InlierSpec::Ratios(parse_f64_list("p", &v)?),
            (_, v) => InlierSpec::Counts(parse_usize_list("inliers", &v)?),
        };
        let k = parse_usize_list("k", &self.r.pick("k", g.k.as_deref(), dk))?;
        let s = parse_f64_list("s", &self.r.pick("s", g.s.as_deref(), ds))?;
        Ok(Grid { n, inliers, k, s })
    }

    fn value<T: std::str::FromStr>(
        &mut self,
        key: &str,
        flag: Option<&str>,
        default: &str,
    ) -> Result<T, CliError> {
        parse_value(key, &self.r.pick(key, flag, default))
    }

    fn path(&mut self, key: &str, flag: Option<&str>) -> Option<PathBuf> {
        let v = self.r.pick_opt(key, flag).map(PathBuf::from);
        // Output locations are not part of the experiment.
        self.r.resolved.remove(key);
        v
    }
}

/// Applies flags > config file > defaults and validates the result.
pub fn plan(cli: &Cli) -> Result<(Plan, std::collections::BTreeMap<String, String>), CliError> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let mut res = Resolved {
        r: Resolver::new(file.as_ref()),
    };
    let threads: usize = res.value("threads", cli.threads.as_deref(), "0")?;
    res.r.resolved.remove("threads");

    let known: Vec<&str>;
    let (job, dest) = match &cli.command {
        Command::Theory(a) => {
            known = [&GRID_KEYS[..], &OUTPUT_KEYS[..]].concat();
            let grid = res.grid(&a.grid, ["50", "0.1:1:0.1", "1:8", "0.99"], false)?;
            let dest = Destinations {
                out: res.path("out", a.output.out.as_deref()),
                json: res.path("json", a.output.json.as_deref()),
            };
            (Job::Theory { grid }, dest)
        }
        Command::Mc(a) => {
            known = [
                &GRID_KEYS[..],
                &OUTPUT_KEYS[..],
                &["mode", "trials", "seed"][..],
            ]
            .concat();
            let grid = res.grid(&a.grid, ["20", "6", "5", "0.99"], true)?;
            let mode = ModeSel::parse(&res.r.pick("mode", a.mode.as_deref(), "both"))?;
            let trials = res.value("trials", a.trials.as_deref(), "100000")?;
            let seed = res.value("seed", a.seed.as_deref(), "0")?;
            let dest = Destinations {
                out: res.path("out", a.output.out.as_deref()),
                json: res.path("json", a.output.json.as_deref()),
            };
            (
                Job::Mc {
                    grid,
                    mode,
                    trials,
                    seed,
                },
                dest,
            )
        }
        Command::Bench(a) => {
            known = [
                &OUTPUT_KEYS[..],
                &[
                    "family",
                    "n",
                    "p",
                    "s",
                    "instances",
                    "seed",
                    "thresholds",
                    "inlier-threshold",
                    "max-iterations",
                    "box-half-width",
                    "noise-det",
                ][..],
            ]
            .concat();
            let family =
                commands::parse_family(&res.r.pick("family", a.family.as_deref(), "line"))?;
            let base = BenchConfig::new(family);
            let n = res.value("n", a.n.as_deref(), &base.n.to_string())?;
            let inlier_ratios =
                parse_f64_list("p", &res.r.pick("p", a.p.as_deref(), "0.2,0.3,0.4,0.5"))?;
            let success = res.value("s", a.s.as_deref(), "0.99")?;
            let instances = res.value("instances", a.instances.as_deref(), "10000")?;
            let seed = res.value("seed", a.seed.as_deref(), "0")?;
            let thresholds = parse_f64_list(
                "thresholds",
                &res.r.pick("thresholds", a.thresholds.as_deref(), "1,2,3"),
            )?;
            let inlier_threshold =
                res.value("inlier-threshold", a.inlier_threshold.as_deref(), "3")?;
            let max_iterations = commands::parse_iterations(
                "max-iterations",
                &res.r.pick(
                    "max-iterations",
                    a.max_iterations.as_deref(),
                    &base.max_iterations.to_string(),
                ),
            )?;
            let box_half_width = res.value("box-half-width", a.box_half_width.as_deref(), "100")?;
            let noise = res.r.pick("noise-det", a.noise_det.as_deref(), "0.5:2");
            let noise_det_range = match noise.split_once(':') {
                Some((lo, hi)) => (parse_value("noise-det", lo)?, parse_value("noise-det", hi)?),
                None => {
                    return Err(usage(format!(
                        "--noise-det: expected `lo:hi`, got `{noise}`"
                    )))
                }
            };
            if !(inlier_threshold > 0.0) {
                return Err(usage("--inlier-threshold must be positive"));
            }
            let config = BenchConfig {
                n,
                inlier_ratios,
                success,
                instances,
                seed,
                thresholds,
                inlier_threshold,
                max_iterations,
                box_half_width,
                noise_det_range,
                ..base
            };
            let dest = Destinations {
                out: res.path("out", a.output.out.as_deref()),
                json: res.path("json", a.output.json.as_deref()),
            };
            (
                Job::Bench {
                    config: Box::new(config),
                },
                dest,
            )
        }
        Command::Synth(a) => {
            known = vec!["family", "n", "p", "seed", "out", "threads"];
            let family =
                commands::parse_family(&res.r.pick("family", a.family.as_deref(), "line"))?;
            let n = res.value("n", a.n.as_deref(), &BenchConfig::new(family).n.to_string())?;
            let p = res.value("p", a.p.as_deref(), "0.5")?;
            let seed = res.value("seed", a.seed.as_deref(), "0")?;
            let dest = Destinations {
                out: res.path("out", a.out.as_deref()),
                json: None,
            };
            (
                Job::Synth {
                    params: SynthParams::new(family, n, p, seed),
                },
                dest,
            )
        }
    };
    if let Some(f) = &file {
        f.check_keys(&known)?;
    }
    Ok((Plan { threads, job, dest }, res.r.resolved))
}

/// Runs a resolved plan on a dedicated pool of `plan.threads` workers.
pub fn execute(
    plan: &Plan,
    flags: &std::collections::BTreeMap<String, String>,
) -> Result<Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads)
        .build()
        .map_err(|e| usage(format!("--threads: {e}")))?;
    pool.install(|| match &plan.job {
        Job::Theory { grid } => commands::cmd_theory(grid, flags),
        Job::Mc {
            grid,
            mode,
            trials,
            seed,
        } => commands::cmd_mc(grid, *mode, *trials, *seed, flags),
        Job::Bench { config } => commands::cmd_bench(config, flags),
        Job::Synth { params } => commands::cmd_synth(params),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a report to its destinations; stdout when no `--out` is set.
pub fn emit(report: &Report, dest: &Destinations) -> Result<(), CliError> {
    match &dest.out {
        Some(path) => write_file(path, &report.primary)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(report.primary.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    if let Some(path) = &dest.json {
        let value = report
            .json
            .as_ref()
            .ok_or_else(|| usage("this command has no JSON output"))?;
        let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
        write_file(path, &text)?;
    }
    Ok(())
}

/// Full pipeline for a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (plan, flags) = plan(cli)?;
    let report = execute(&plan, &flags)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(&report, &plan.dest)
}
