//! Inverse participation ratios and the uniform-sphere reference vectors.
//!
//! `IPR_q(x) = N^{q-1} ‖x‖_{2q}^{2q} / ‖x‖_2^{2q}` equals 1 for a flat vector
//! and `N^{q-1}` for a basis vector.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::gaussian;

/// Scalar field of a reference vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// One eigenvalue of one sampled matrix, with its eigenvector statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigRecord {
    pub trial_id: u64,
    /// Position of the eigenvalue among the retained eigenvalues of its matrix.
    pub index: usize,
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub is_real_eig: bool,
    pub ipr: BTreeMap<u32, f64>,
    /// `‖Gv − λv‖₂ / ‖G‖_F`.
    pub residual: f64,
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// IPR of a vector given the squared moduli `|x_j|²` of its entries.
///
/// The weights are rescaled by their maximum and normalized to unit sum
/// before being raised to the power `q`.
pub fn ipr_from_sq_moduli(weights: &[f64], q: u32) -> Result<f64> {
    if q == 0 {
        return Err(domain!("ipr order q must be at least 1"));
    }
    let n = weights.len();
    if n == 0 {
        return Err(domain!("ipr of an empty vector"));
    }
    let max = weights.iter().fold(0.0f64, |m, &w| m.max(w));
    if !(max > 0.0) || !max.is_finite() {
        return Err(domain!("ipr requires a nonzero finite vector"));
    }
    if q == 1 {
        return Ok(1.0);
    }
    let total = compensated_sum(weights.iter().map(|&w| w / max));
    let moment = compensated_sum(weights.iter().map(|&w| (w / max / total).powi(q as i32)));
    let upper = (n as f64).powi(q as i32 - 1);
    Ok((upper * moment).clamp(1.0, upper))
}

/// `IPR_q(x)`; invariant under scaling of `x` by any nonzero complex number.
pub fn ipr(x: &[Complex64], q: u32) -> Result<f64> {
    // |x_j|² loses range for huge entries, so rescale by the largest modulus first.
    let max = x.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if max == 0.0 || !max.is_finite() {
        return Err(domain!("ipr requires a nonzero finite vector"));
    }
    let weights: Vec<f64> = x.iter().map(|z| (z / max).norm_sqr()).collect();
    ipr_from_sq_moduli(&weights, q)
}

/// Real-vector convenience wrapper around [`ipr`].
pub fn ipr_real(x: &[f64], q: u32) -> Result<f64> {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 || !max.is_finite() {
        return Err(domain!("ipr requires a nonzero finite vector"));
    }
    let weights: Vec<f64> = x.iter().map(|v| (v / max) * (v / max)).collect();
    ipr_from_sq_moduli(&weights, q)
}

/// Euclidean norm with overflow-safe scaling.
pub(crate) fn norm2(x: &[Complex64]) -> f64 {
    let max = x.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if max == 0.0 {
        return 0.0;
    }
    max * compensated_sum(x.iter().map(|z| (z / max).norm_sqr())).sqrt()
}

/// Uniform unit vector on the real or complex sphere of dimension `n`,
/// obtained by normalizing an iid standard Gaussian vector.
pub fn uniform_sphere_sample<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(domain!("sphere dimension must be at least 1"));
    }
    let mut v: Vec<Complex64> = match field {
        Field::Real => (0..n).map(|_| Complex64::new(gaussian(rng), 0.0)).collect(),
        Field::Complex => {
            (0..n).map(|_| Complex64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2).collect()
        }
    };
    let norm = norm2(&v);
    if norm == 0.0 {
        // Probability zero; redraw rather than divide by zero.
        return uniform_sphere_sample(n, field, rng);
    }
    v.iter_mut().for_each(|z| *z /= norm);
    Ok(v)
}

/// `q!` as an exact integer.
pub fn factorial(q: u32) -> Result<u128> {
    (1..=q as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .ok_or_else(|| Error::Range(format!("{q}! overflows u128")))
}

/// `(2q−1)!! = 1·3·5⋯(2q−1)`, with `(−1)!! = 1` for `q = 0`.
pub fn double_factorial_odd(q: u32) -> Result<u128> {
    (1..=q as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(2 * k - 1))
        .ok_or_else(|| Error::Range(format!("(2·{q}−1)!! overflows u128")))
}
