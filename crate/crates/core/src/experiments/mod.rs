//! Full-matrix Monte Carlo pipelines and their comparison with theory.
//!
//! Trial `i` of a run draws its matrix from `stream(seed, i)`, so the record
//! list depends only on the configuration, never on the number of workers.

mod eig;
mod stats;

pub use eig::{
    eig_right, realness_threshold, retain_all, retained_eigenpairs, EigPair, RetainedEig, REALNESS_TOL, RESIDUAL_TOL,
};
pub use stats::{ks_distance, ks_two_sample, EmpiricalDist, Summary};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::{eigvec_from_block, sample_stiefel_pair, synthetic_eigvec_sample};
use crate::ensembles::{normalization_divisor, sample, EnsembleSpec, Normalization};
use crate::error::{domain, Error, Result};
use crate::ipr::{ipr, EigRecord};
use crate::rng::stream;
use crate::theory::{mean_ipr_depletion_finite_n, mean_ipr_finite_n};

/// Minimum number of samples [`conditional_ipr`] accepts.
pub const MIN_CONDITIONAL_SAMPLES: usize = 100;

/// Largest tolerated fraction of trials lost to solver failures.
pub const MAX_SKIP_FRACTION: f64 = 0.01;

/// Window of scaled heights `√N·Im λ ∈ [y(1−w), y(1+w)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bin {
    pub y_center: f64,
    pub rel_width: f64,
}

impl Bin {
    pub fn validate(&self) -> Result<()> {
        if !(self.y_center > 0.0 && self.y_center.is_finite()) {
            return Err(domain!("bin center must be positive, got {}", self.y_center));
        }
        if !(self.rel_width > 0.0 && self.rel_width < 1.0) {
            return Err(domain!("relative bin width must lie in (0, 1), got {}", self.rel_width));
        }
        Ok(())
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.y_center * (1.0 - self.rel_width), self.y_center * (1.0 + self.rel_width))
    }
}

impl Default for Bin {
    fn default() -> Self {
        Self { y_center: 0.5, rel_width: 0.1 }
    }
}

/// Everything needed to reproduce a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: EnsembleSpec,
    pub trials: usize,
    pub q_set: Vec<u32>,
    pub seed: u64,
    #[serde(default)]
    pub bin: Bin,
    #[serde(default = "default_x_window")]
    pub x_window: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_x_window() -> f64 {
    0.5
}

/// Available parallelism, or 1 if it cannot be determined.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl RunConfig {
    pub fn new(spec: EnsembleSpec, trials: usize, q_set: Vec<u32>, seed: u64) -> Self {
        Self {
            spec,
            trials,
            q_set,
            seed,
            bin: Bin::default(),
            x_window: default_x_window(),
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.trials < 1 {
            return Err(domain!("at least one trial is required"));
        }
        if self.q_set.is_empty() {
            return Err(domain!("at least one IPR order is required"));
        }
        if let Some(q) = self.q_set.iter().find(|q| !(2..=8).contains(*q)) {
            return Err(domain!("IPR orders must lie in 2..=8, got {q}"));
        }
        self.bin.validate()?;
        if !(self.x_window > 0.0) {
            return Err(domain!("x window must be positive, got {}", self.x_window));
        }
        if self.workers < 1 {
            return Err(domain!("at least one worker is required"));
        }
        Ok(())
    }
}

/// Bookkeeping of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub trials: usize,
    pub records: usize,
    /// Trials dropped because the eigensolver failed, with the reason.
    pub skipped: Vec<(u64, String)>,
}

fn trial_records(config: &RunConfig, trial: u64) -> Result<Vec<EigRecord>> {
    let mut rng = stream(config.seed, trial);
    let g = sample(&config.spec, &mut rng)?;
    let kept = retained_eigenpairs(&g)?;
    kept.into_iter()
        .enumerate()
        .map(|(index, e)| {
            let mut iprs = BTreeMap::new();
            for &q in &config.q_set {
                iprs.insert(q, ipr(&e.vector, q)?);
            }
            Ok(EigRecord {
                trial_id: trial,
                index,
                re_lambda: e.lambda.re,
                im_lambda: e.lambda.im,
                is_real_eig: e.is_real,
                ipr: iprs,
                residual: e.residual,
            })
        })
        .collect()
}

fn rescale(records: &mut [EigRecord], divisor: f64) {
    if divisor != 1.0 {
        for r in records {
            r.re_lambda /= divisor;
            r.im_lambda /= divisor;
        }
    }
}

/// Run `config`, handing each batch of records to `sink` in `(trial, index)` order.
///
/// Trials run in parallel chunks on `config.workers` threads. With empirical
/// normalization every record is buffered until the pooled quantile is known.
pub fn spectrum_ipr_map_streaming<F>(config: &RunConfig, mut sink: F) -> Result<RunSummary>
where
    F: FnMut(&[EigRecord]) -> Result<()>,
{
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("cannot start worker pool: {e}")))?;
    let buffered = config.spec.normalization == Normalization::Empirical;
    let fixed_divisor = if buffered { 1.0 } else { normalization_divisor(&config.spec, &[])? };
    let chunk = (4 * config.workers).max(1);
    let mut summary = RunSummary { trials: config.trials, records: 0, skipped: Vec::new() };
    let mut held = Vec::new();
    let trials: Vec<u64> = (0..config.trials as u64).collect();
    for ids in trials.chunks(chunk) {
        let results: Vec<Result<Vec<EigRecord>>> =
            pool.install(|| ids.par_iter().map(|&t| trial_records(config, t)).collect());
        for (&t, result) in ids.iter().zip(results) {
            match result {
                Ok(mut records) => {
                    summary.records += records.len();
                    if buffered {
                        held.append(&mut records);
                    } else {
                        rescale(&mut records, fixed_divisor);
                        sink(&records)?;
                    }
                }
                Err(Error::Solver(reason)) => summary.skipped.push((t, reason)),
                Err(e) => return Err(e),
            }
        }
    }
    if summary.skipped.len() as f64 > MAX_SKIP_FRACTION * config.trials as f64 {
        return Err(Error::Solver(format!(
            "{} of {} trials failed; first: {}",
            summary.skipped.len(),
            config.trials,
            summary.skipped[0].1
        )));
    }
    if buffered {
        let eigs: Vec<_> = held.iter().map(|r| num_complex::Complex64::new(r.re_lambda, r.im_lambda)).collect();
        rescale(&mut held, normalization_divisor(&config.spec, &eigs)?);
        sink(&held)?;
    }
    Ok(summary)
}

/// Every retained eigenvalue of every trial with its IPRs, ordered by `(trial, index)`.
pub fn spectrum_ipr_map(config: &RunConfig) -> Result<Vec<EigRecord>> {
    let mut all = Vec::new();
    spectrum_ipr_map_streaming(config, |batch| {
        all.extend_from_slice(batch);
        Ok(())
    })?;
    Ok(all)
}

/// IPR samples of the non-real eigenvalues with `√N·Im λ` in `bin` and `|Re λ| ≤ x_window`.
///
/// `n` is the matrix dimension the records were drawn at.
pub fn conditional_ipr(records: &[EigRecord], n: usize, q: u32, bin: Bin, x_window: f64) -> Result<EmpiricalDist> {
    bin.validate()?;
    let (lo, hi) = bin.bounds();
    let root_n = (n as f64).sqrt();
    let values = records
        .iter()
        .filter(|r| !r.is_real_eig && r.re_lambda.abs() <= x_window)
        .filter(|r| (lo..=hi).contains(&(root_n * r.im_lambda)))
        .map(|r| r.ipr.get(&q).copied().ok_or_else(|| domain!("records carry no IPR of order {q}")))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() < MIN_CONDITIONAL_SAMPLES {
        return Err(Error::InsufficientData { needed: MIN_CONDITIONAL_SAMPLES, got: values.len() });
    }
    EmpiricalDist::new(values)
}

/// What a convergence study samples at each dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    /// Eigenvectors of an eigenvalue at scaled height `y`, with random `(s, t)`.
    Depletion { y: f64, tau: f64 },
    /// `i·s·O₁ + t·O₂` at fixed mixing amplitudes.
    FixedMixing { s: f64, t: f64 },
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    /// Exact mean IPR at this dimension.
    pub theory_mean: f64,
}

/// Mean and spread of `IPR_q` of synthetic eigenvectors at each dimension in `n_list`.
///
/// Dimension `k` of the list uses `stream(seed, k)`.
pub fn convergence_study(
    q: u32,
    mode: ConvergenceMode,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    if trials < 2 {
        return Err(domain!("a convergence study needs at least 2 trials"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain!("dimensions must be strictly ascending"));
    }
    n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut rng = stream(seed, k as u64);
            let values = (0..trials)
                .map(|_| {
                    let v = match mode {
                        ConvergenceMode::Depletion { y, tau } => synthetic_eigvec_sample(n, y, tau, &mut rng)?.0,
                        ConvergenceMode::FixedMixing { s, t } => {
                            let (o1, o2) = sample_stiefel_pair(n, &mut rng)?;
                            eigvec_from_block(s, t, &o1, &o2)?
                        }
                    };
                    ipr(&v, q)
                })
                .collect::<Result<Vec<f64>>>()?;
            let summary = *EmpiricalDist::new(values)?.summary();
            let theory_mean = match mode {
                ConvergenceMode::Depletion { y, tau } => mean_ipr_depletion_finite_n(n, q, y, tau)?,
                ConvergenceMode::FixedMixing { s, t } => mean_ipr_finite_n(n, q, s, t)?,
            };
            Ok(ConvergenceRow { n, mean: summary.mean, std: summary.std, std_error: summary.std_error, theory_mean })
        })
        .collect()
}
