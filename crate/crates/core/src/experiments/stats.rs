//! Empirical distributions and Kolmogorov–Smirnov distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean, spread and a few quantiles of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (divisor `n − 1`; zero for a single value).
    pub std: f64,
    /// `std/√n`.
    pub std_error: f64,
    pub min: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

/// A sorted sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    values: Vec<f64>,
    summary: Summary,
}

impl EmpiricalDist {
    /// Sorts `values`; fails on an empty sample or a NaN.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("sample contains NaN".into()));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = crate::ipr::compensated_sum(values.iter().copied()) / n;
        let var = if values.len() > 1 {
            crate::ipr::compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0)
        } else {
            0.0
        };
        let std = var.sqrt();
        let summary = Summary {
            mean,
            std,
            std_error: std / n.sqrt(),
            min: values[0],
            q05: quantile_sorted(&values, 0.05),
            median: quantile_sorted(&values, 0.5),
            q95: quantile_sorted(&values, 0.95),
            max: values[values.len() - 1],
        };
        Ok(Self { values, summary })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn summary(&self) -> &Summary {
        &self.summary
    }

    /// Linear-interpolation quantile, `p ∈ [0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.values, p)
    }

    /// `n` evenly spaced order statistics, for comparisons at matched sample sizes.
    pub fn thinned(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.count() {
            return Err(Error::InsufficientData { needed: n, got: self.count() });
        }
        let step = self.count() as f64 / n as f64;
        Self::new((0..n).map(|i| self.values[((i as f64 + 0.5) * step) as usize]).collect())
    }
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One-sample KS statistic `sup_i max(|i/n − F(x_i)|, |(i−1)/n − F(x_i)|)`.
pub fn ks_distance<F: Fn(f64) -> f64>(dist: &EmpiricalDist, cdf: F) -> f64 {
    let n = dist.count() as f64;
    dist.values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i as f64 + 1.0) / n - f).abs().max((i as f64 / n - f).abs())
        })
        .fold(0.0f64, f64::max)
        .clamp(0.0, 1.0)
}

/// Two-sample KS statistic `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_two_sample(a: &EmpiricalDist, b: &EmpiricalDist) -> f64 {
    let (xa, xb) = (a.values(), b.values());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
