use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::noise::inject_label_noise;
use super::{trial_rng, trial_seed, Stream};
use crate::error::{Error, Result};
use crate::graph::PartialLabels;
use crate::pipeline::{run_method_with, GraphContext, Method, MethodConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentSpec {
    pub methods: Vec<Method>,
    pub noise_rates: Vec<f64>,
    pub trials: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub config: MethodConfig,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train fraction must be in (0, 1), got {}", self.train_fraction));
        }
        if self.noise_rates.iter().any(|p| !(0.0..0.5).contains(p)) {
            return bad("noise rates must lie in [0, 0.5)".into());
        }
        if self.noise_rates.windows(2).any(|w| w[1] < w[0]) {
            return bad("noise rates must be sorted ascending".into());
        }
        self.config.solver.validate()
    }
}

/// Train/test split for one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_for_trial(n: usize, train_fraction: f64, seed: u64, trial: usize) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut trial_rng(seed, trial, Stream::Split));
    let k = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut train = idx[..k].to_vec();
    let mut test = idx[k..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Split { train, test }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialResult {
    pub method: Method,
    pub noise_rate: f64,
    pub trial: usize,
    /// Errors among non-rejected test samples.
    pub error_rate: f64,
    pub rejection_rate: f64,
    pub errors: usize,
    pub accepted: usize,
    pub bound_gap: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialFailure {
    pub method: Method,
    pub noise_rate: f64,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub method: Method,
    pub noise_rate: f64,
    pub trials: usize,
    pub failed: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_rejection: f64,
    pub std_rejection: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub rows: Vec<TrialResult>,
    pub failures: Vec<TrialFailure>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentReport {
    pub fn summary_for(&self, method: Method, noise_rate: f64) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.method == method && s.noise_rate == noise_rate)
    }
}

/// Scores decisions on the test nodes against the ground truth.
pub fn score(decisions: &[i8], truth: &[i8], test: &[usize]) -> (usize, usize, usize) {
    let mut errors = 0;
    let mut accepted = 0;
    let mut rejected = 0;
    for &i in test {
        match decisions[i] {
            0 => rejected += 1,
            d => {
                accepted += 1;
                if d != truth[i] {
                    errors += 1;
                }
            }
        }
    }
    (errors, accepted, rejected)
}

enum Outcome {
    Ok(TrialResult),
    Failed(TrialFailure),
}

fn run_trial(
    data: &Dataset,
    ctx: &GraphContext<'_>,
    spec: &ExperimentSpec,
    trial: usize,
) -> Vec<Outcome> {
    let split = split_for_trial(data.len(), spec.train_fraction, spec.seed, trial);
    let clean: Vec<i8> = split.train.iter().map(|&i| data.labels[i]).collect();
    let noise_seed = trial_seed(spec.seed, trial, Stream::Noise);
    let bound_seed = trial_seed(spec.seed, trial, Stream::Bound);
    let mut out = Vec::new();
    for &p in &spec.noise_rates {
        let noisy = inject_label_noise(&clean, p, noise_seed);
        for &method in &spec.methods {
            let start = Instant::now();
            let result = noisy.as_ref().map_err(|e| e.to_string()).and_then(|noisy| {
                let observed = split.train.iter().copied().zip(noisy.iter().copied()).collect();
                let labels = PartialLabels::new(data.len(), observed)
                    .map_err(|e| e.to_string())?
                    .with_noise_rate(p);
                run_method_with(method, ctx, &labels, &spec.config, bound_seed).map_err(|e| e.to_string())
            });
            out.push(match result {
                Ok(res) => {
                    let (errors, accepted, rejected) =
                        score(&res.signal.decisions, &data.labels, &split.test);
                    Outcome::Ok(TrialResult {
                        method,
                        noise_rate: p,
                        trial,
                        error_rate: if accepted == 0 { 0.0 } else { errors as f64 / accepted as f64 },
                        rejection_rate: rejected as f64 / split.test.len() as f64,
                        errors,
                        accepted,
                        bound_gap: res.bound_gap,
                        wall_time: start.elapsed().as_secs_f64(),
                    })
                }
                Err(message) => {
                    log::warn!("trial {trial}, {method}, p = {p}: {message}");
                    Outcome::Failed(TrialFailure {
                        method,
                        noise_rate: p,
                        trial,
                        message,
                    })
                }
            });
        }
    }
    out
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every method at every noise rate for each trial. Trials run in
/// parallel; results come back in trial order.
pub fn run_experiment(data: &Dataset, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let ctx = GraphContext::new(&data.features, &spec.config.graph, spec.config.solver.mu2 > 0.0)?;
    let per_trial: Vec<Vec<Outcome>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(data, &ctx, spec, t))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in per_trial.into_iter().flatten() {
        match o {
            Outcome::Ok(r) => rows.push(r),
            Outcome::Failed(f) => failures.push(f),
        }
    }

    let mut summary = Vec::new();
    for &method in &spec.methods {
        for &p in &spec.noise_rates {
            let sel: Vec<&TrialResult> = rows
                .iter()
                .filter(|r| r.method == method && r.noise_rate == p)
                .collect();
            let errs: Vec<f64> = sel.iter().map(|r| r.error_rate).collect();
            let rejs: Vec<f64> = sel.iter().map(|r| r.rejection_rate).collect();
            let (mean_error, std_error) = mean_std(&errs);
            let (mean_rejection, std_rejection) = mean_std(&rejs);
            summary.push(SummaryRow {
                method,
                noise_rate: p,
                trials: sel.len(),
                failed: failures
                    .iter()
                    .filter(|f| f.method == method && f.noise_rate == p)
                    .count(),
                mean_error,
                std_error,
                mean_rejection,
                std_rejection,
            });
        }
    }
    Ok(ExperimentReport {
        rows,
        failures,
        summary,
    })
}

/// Per-trial CSV: `method,noise_rate,trial,error_rate,rejection_rate`.
pub fn write_results_csv<W: Write>(out: W, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "noise_rate", "trial", "error_rate", "rejection_rate"])?;
    for r in &report.rows {
        w.write_record([
            r.method.name().to_string(),
            r.noise_rate.to_string(),
            r.trial.to_string(),
            r.error_rate.to_string(),
            r.rejection_rate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "noise_rate",
        "trials",
        "failed",
        "mean_error",
        "std_error",
        "mean_rejection",
        "std_rejection",
    ])?;
    for s in &report.summary {
        w.write_record([
            s.method.name().to_string(),
            s.noise_rate.to_string(),
            s.trials.to_string(),
            s.failed.to_string(),
            s.mean_error.to_string(),
            s.std_error.to_string(),
            s.mean_rejection.to_string(),
            s.std_rejection.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
