//! Flat run settings shared by the config file, the flags and the echo on stderr.
//!
//! Every field is optional; flags override the `--config` file, and the fully
//! resolved settings are printed back so a run can be replayed from them.

use std::path::{Path, PathBuf};

use ipr_rmt::ensembles::{EnsembleKind, EnsembleSpec, Normalization, PermMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable consulted for the seed when neither flag nor file sets it.
pub const SEED_ENV: &str = "IPR_RMT_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleKind>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perm: Option<PermKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xwindow: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

/// Permutation law of the sum models, without its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PermKind {
    Uniform,
    Ewens,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// `self` with every field that `top` sets replaced.
    pub fn overlay(mut self, top: Settings) -> Self {
        overlay_fields!(
            self,
            top,
            ensemble,
            n,
            tau,
            nu,
            d,
            perm,
            theta,
            normalization,
            trials,
            q,
            seed,
            workers,
            y,
            relwidth,
            xwindow,
            threshold,
            grid,
            count,
            n_list,
            s,
            t,
            out,
            svg
        );
        self
    }

    /// Fill in the seed: flag or file, then `IPR_RMT_SEED`, then OS entropy.
    pub fn resolve_seed(&mut self) -> Result<u64, CliError> {
        if let Some(seed) = self.seed {
            return Ok(seed);
        }
        let seed = match std::env::var(SEED_ENV) {
            Ok(text) => text
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={text:?} is not a 64-bit unsigned integer")))?,
            Err(_) => rand::random(),
        };
        self.seed = Some(seed);
        Ok(seed)
    }

    pub fn resolve_workers(&mut self) -> usize {
        *self.workers.get_or_insert_with(ipr_rmt::experiments::default_workers)
    }

    pub fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
        value.clone().ok_or_else(|| CliError::Usage(format!("missing required setting --{flag}")))
    }

    /// Ensemble description, with defaults written back into `self`.
    pub fn resolve_ensemble(&mut self) -> Result<EnsembleSpec, CliError> {
        let kind = *self.ensemble.get_or_insert(EnsembleKind::EllipticReal);
        let n = Self::require(&self.n, "N")?;
        let mut spec = EnsembleSpec::new(kind, n);
        match kind {
            EnsembleKind::EllipticReal => spec.tau = *self.tau.get_or_insert(0.0),
            EnsembleKind::InducedGinibre => spec.nu = *self.nu.get_or_insert(0),
            EnsembleKind::OrthogonalSum => spec.d = *self.d.get_or_insert(2),
            EnsembleKind::PermutationSum => {
                spec.d = *self.d.get_or_insert(2);
                spec.perm_mode = match *self.perm.get_or_insert(PermKind::Uniform) {
                    PermKind::Uniform => PermMode::Uniform,
                    PermKind::Ewens => PermMode::Ewens { theta: Self::require(&self.theta, "theta")? },
                };
            }
            EnsembleKind::GinibreReal | EnsembleKind::GinibreComplex => {}
        }
        spec.normalization = *self.normalization.get_or_insert(Normalization::None);
        spec.validate()?;
        Ok(spec)
    }

    pub fn resolve_q_list(&mut self) -> Vec<u32> {
        self.q.get_or_insert_with(|| vec![2]).clone()
    }

    /// A single IPR order; lists longer than one are a usage error.
    pub fn resolve_single_q(&mut self) -> Result<u32, CliError> {
        match self.resolve_q_list().as_slice() {
            [q] => Ok(*q),
            other => Err(CliError::Usage(format!("this command takes exactly one --q, got {other:?}"))),
        }
    }
}

/// `a:b:n` → `n` equally spaced points from `a` to `b` inclusive.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid must look like a:b:n, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}
