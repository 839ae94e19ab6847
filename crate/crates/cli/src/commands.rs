//! The `theory`, `mc`, `bench` and `synth` subcommands as pure functions of
//! their resolved settings.

use std::collections::BTreeMap;

use exactsac::bench::{run_bench, BenchConfig};
use exactsac::metrics::BenchRow;
use exactsac::models::Family;
use exactsac::montecarlo::{mc_row, McRow};
use exactsac::stopping::{self, ConsensusCounts, Criterion, Iterations};
use exactsac::synth::{generate, SynthParams};
use exactsac::Instance;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{usage, CliError};

pub const CUTOFF: &str = "cutoff";

/// The rendered output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// CSV text, or JSON for `synth`.
    pub primary: String,
    /// JSON mirror with a manifest, when the command has one.
    pub json: Option<Value>,
    /// Notes for stderr, e.g. skipped grid points.
    pub warnings: Vec<String>,
}

pub fn manifest(command: &str, seed: Option<u64>, flags: &BTreeMap<String, String>) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "flags": flags,
    })
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io {
        path: "<csv>".into(),
        source: e.into(),
    };
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: "<csv>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("CSV fields are ASCII"))
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn check_target(s: f64) -> Result<(), CliError> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(usage(format!(
            "--s: success probability must lie strictly inside (0, 1), got {s}"
        )))
    }
}

/// Inlier counts per `n`: either given directly or as `round(p n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum InlierSpec {
    Ratios(Vec<f64>),
    Counts(Vec<usize>),
}

impl InlierSpec {
    fn counts_for(&self, n: usize) -> Vec<usize> {
        match self {
            InlierSpec::Ratios(ps) => ps.iter().map(|p| (p * n as f64).round() as usize).collect(),
            InlierSpec::Counts(is) => is.clone(),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if let InlierSpec::Ratios(ps) = self {
            if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(usage("--p: inlier ratios must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n: Vec<usize>,
    pub inliers: InlierSpec,
    pub k: Vec<usize>,
    pub s: Vec<f64>,
}

impl Grid {
    fn validate(&self) -> Result<(), CliError> {
        if self.n.contains(&0) {
            return Err(usage("--n: values must be positive"));
        }
        if self.k.contains(&0) {
            return Err(usage("--k: values must be positive"));
        }
        self.s.iter().try_for_each(|&s| check_target(s))?;
        self.inliers.validate()
    }

    /// Valid counts in grid order; points with `I > n` or `k > n` are skipped.
    fn points(&self) -> (Vec<(ConsensusCounts, f64)>, usize) {
        let mut out = Vec::new();
        let mut skipped = 0;
        for &n in &self.n {
            for i in self.inliers.counts_for(n) {
                for &k in &self.k {
                    for &s in &self.s {
                        match ConsensusCounts::new(n, i, k) {
                            Ok(c) => out.push((c, s)),
                            Err(_) => skipped += 1,
                        }
                    }
                }
            }
        }
        (out, skipped)
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryRow {
    pub n: usize,
    pub inliers: usize,
    pub k: usize,
    pub p: f64,
    pub s: f64,
    pub p_approx: f64,
    pub p_exact: f64,
    /// `None` marks the cutoff.
    pub epsilon: Option<f64>,
    pub s_true: Option<f64>,
    pub undersampling_pct: Option<f64>,
}

pub fn theory_row(c: ConsensusCounts, s: f64) -> Result<TheoryRow, CliError> {
    let cut = !c.has_all_inlier_sample();
    let s_true = if cut {
        None
    } else if c.inliers() == c.n() {
        Some(1.0)
    } else {
        Some(stopping::true_success_rate(&c, s)?)
    };
    let undersampling_pct = if cut {
        None
    } else {
        Some(100.0 * stopping::undersampling_ratio(&c, s)?)
    };
    Ok(TheoryRow {
        n: c.n(),
        inliers: c.inliers(),
        k: c.k(),
        p: c.inlier_ratio(),
        s,
        p_approx: stopping::approx_probability(&c),
        p_exact: stopping::exact_probability(&c),
        epsilon: stopping::relative_error(&c).ok(),
        s_true,
        undersampling_pct,
    })
}

pub fn cmd_theory(grid: &Grid, flags: &BTreeMap<String, String>) -> Result<Report, CliError> {
    grid.validate()?;
    let (points, skipped) = grid.points();
    let rows = points
        .into_iter()
        .map(|(c, s)| theory_row(c, s))
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(usage(
            "theory grid has no valid point (need k <= n and I <= n)",
        ));
    }
    let opt = |v: Option<f64>| v.map_or_else(|| CUTOFF.to_string(), fmt);
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.inliers.to_string(),
                r.k.to_string(),
                fmt(r.p),
                fmt(r.s),
                fmt(r.p_approx),
                fmt(r.p_exact),
                opt(r.epsilon),
                opt(r.s_true),
                opt(r.undersampling_pct),
            ]
        })
        .collect();
    let cols = [
        "n",
        "I",
        "k",
        "p",
        "s",
        "P_a",
        "P_e",
        "epsilon",
        "s_true",
        "undersampling_pct",
    ];
    let mut warnings = Vec::new();
    if skipped > 0 {
        warnings.push(format!(
            "skipped {skipped} grid point(s) with k > n or I > n"
        ));
    }
    Ok(Report {
        primary: csv_text(&header(&cols), &records)?,
        json: Some(json!({ "manifest": manifest("theory", None, flags), "rows": rows })),
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSel {
    Approximate,
    Exact,
    Both,
}

impl ModeSel {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "both" => Ok(ModeSel::Both),
            other => match other.parse::<Criterion>() {
                Ok(Criterion::Approximate) => Ok(ModeSel::Approximate),
                Ok(Criterion::Exact) => Ok(ModeSel::Exact),
                Err(_) => Err(usage(format!(
                    "--mode: expected approximate, exact or both, got `{s}`"
                ))),
            },
        }
    }

    fn criteria(self) -> &'static [Criterion] {
        match self {
            ModeSel::Approximate => &[Criterion::Approximate],
            ModeSel::Exact => &[Criterion::Exact],
            ModeSel::Both => &[Criterion::Approximate, Criterion::Exact],
        }
    }
}

pub const MIN_TRIALS: u64 = 100;

pub fn cmd_mc(
    grid: &Grid,
    mode: ModeSel,
    trials: u64,
    seed: u64,
    flags: &BTreeMap<String, String>,
) -> Result<Report, CliError> {
    grid.validate()?;
    if trials < MIN_TRIALS {
        return Err(usage(format!(
            "--trials: at least {MIN_TRIALS} trials are required, got {trials}"
        )));
    }
    let (points, skipped) = grid.points();
    let mut warnings = Vec::new();
    if skipped > 0 {
        warnings.push(format!(
            "skipped {skipped} grid point(s) with k > n or I > n"
        ));
    }
    let mut rows: Vec<McRow> = Vec::new();
    for (c, s) in points {
        if !c.has_all_inlier_sample() {
            warnings.push(format!(
                "skipped n={} I={} k={}: no all-inlier sample exists",
                c.n(),
                c.inliers(),
                c.k()
            ));
            continue;
        }
        for &m in mode.criteria() {
            rows.push(mc_row(c, s, m, trials, seed)?);
        }
    }
    if rows.is_empty() {
        return Err(usage("Monte-Carlo grid has no point with k <= I <= n"));
    }
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.inliers.to_string(),
                r.k.to_string(),
                fmt(r.s),
                r.mode.name().to_string(),
                r.trials.to_string(),
                fmt(r.success_rate),
                fmt(r.half_width),
                fmt(r.s_true_predicted),
            ]
        })
        .collect();
    let cols = [
        "n",
        "I",
        "k",
        "s",
        "mode",
        "trials",
        "success_rate",
        "half_width",
        "s_true_predicted",
    ];
    Ok(Report {
        primary: csv_text(&header(&cols), &records)?,
        json: Some(json!({ "manifest": manifest("mc", Some(seed), flags), "rows": rows })),
        warnings,
    })
}

fn threshold_label(t: f64) -> String {
    format!("auc{t}")
}

pub fn bench_csv(rows: &[BenchRow<f64>]) -> Result<String, CliError> {
    let thresholds = rows
        .first()
        .map(|r| r.thresholds.clone())
        .unwrap_or_default();
    let mut cols = vec!["p".to_string()];
    for &t in &thresholds {
        let l = threshold_label(t);
        cols.extend([
            format!("{l}_approx"),
            format!("{l}_exact"),
            format!("{l}_delta_pct"),
        ]);
    }
    cols.push("delta_time_pct".into());
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut rec = vec![fmt(r.inlier_ratio)];
            for j in 0..r.thresholds.len() {
                rec.extend([
                    fmt(r.auc_approx[j]),
                    fmt(r.auc_exact[j]),
                    fmt(r.delta_pct[j]),
                ]);
            }
            rec.push(fmt(r.mean_nea_pct));
            rec
        })
        .collect();
    csv_text(&cols, &records)
}

pub fn cmd_bench(cfg: &BenchConfig, flags: &BTreeMap<String, String>) -> Result<Report, CliError> {
    let rows = run_bench(cfg)?;
    Ok(Report {
        primary: bench_csv(&rows)?,
        json: Some(
            json!({ "manifest": manifest("bench", Some(cfg.seed), flags), "config": cfg, "rows": rows }),
        ),
        warnings: Vec::new(),
    })
}

/// One synthetic instance as pretty JSON.
pub fn cmd_synth(params: &SynthParams) -> Result<Report, CliError> {
    let instance: Instance = generate(params)?;
    let text = serde_json::to_string_pretty(&instance).expect("instances serialize");
    Ok(Report {
        primary: text + "\n",
        json: None,
        warnings: Vec::new(),
    })
}

pub fn parse_family(s: &str) -> Result<Family, CliError> {
    s.parse()
        .map_err(|_| usage(format!("family must be `line` or `ellipse`, got `{s}`")))
}

pub fn parse_iterations(key: &str, s: &str) -> Result<Iterations, CliError> {
    if s == "unbounded" {
        return Ok(Iterations::Unbounded);
    }
    s.parse::<u64>()
        .ok()
        .filter(|&n| n > 0)
        .map(Iterations::Finite)
        .ok_or_else(|| {
            usage(format!(
                "--{key}: expected a positive integer or `unbounded`, got `{s}`"
            ))
        })
}
