//! Exact conditional laws of the eigenvector IPR in the depletion regime.
//!
//! Conditionally on an eigenvalue `λ = x + iy/√N` of a real elliptic Ginibre
//! matrix with non-symmetry `τ ∈ [0, 1)`:
//!
//! * `δ = √N(b − c)` has density `∝ δ·exp(−δ²/(2(1−τ²)))/√(δ² + 4y²)` on `δ > 0`;
//! * the scale `S = 1/(2st) = √(δ² + 4y²)/(2y)` is `𝒩(0, (1−τ²)/(4y²))`
//!   conditioned on `S > 1`;
//! * the IPR converges in law to `ℓ_{q,y} = g_q(S)`.
//!
//! Throughout, `y` is the *scaled* imaginary part (`Im λ = y/√N`).

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::legendre::{double_factorial_f64, factorial_f64, g, g_inverse, phi};
use crate::rng::gaussian;
use crate::special::{erfcx, integrate_to_infinity};

const QUAD_TOL: f64 = 1e-12;

fn check_y_tau(y: f64, tau: f64) -> Result<()> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(domain!("scaled imaginary part y must be positive, got {y}"));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(domain!("non-symmetry parameter τ must lie in [0, 1), got {tau}"));
    }
    Ok(())
}

fn check_order(q: u32) -> Result<()> {
    if !(2..=crate::legendre::MAX_ORDER).contains(&q) {
        return Err(domain!("IPR order q must lie in [2, {}], got {q}", crate::legendre::MAX_ORDER));
    }
    Ok(())
}

/// `1 − τ²`, the variance scale shared by every conditional law.
fn spread(tau: f64) -> f64 {
    (1.0 - tau) * (1.0 + tau)
}

/// `y·√(2/(1−τ²))`: the truncation point `1` measured in standard deviations of `S`.
fn standardized_cut(y: f64, tau: f64) -> f64 {
    y * (2.0 / spread(tau)).sqrt()
}

/// Standard deviation `√(1−τ²)/(2y)` of the untruncated Gaussian behind `S`.
pub fn scale_sigma(y: f64, tau: f64) -> f64 {
    spread(tau).sqrt() / (2.0 * y)
}

/// A `(q, y, τ)` triple naming one limiting law `ℓ_{q,y}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryQuery {
    pub q: u32,
    pub y: f64,
    pub tau: f64,
}

impl TheoryQuery {
    pub fn new(q: u32, y: f64, tau: f64) -> Result<Self> {
        check_order(q)?;
        check_y_tau(y, tau)?;
        Ok(Self { q, y, tau })
    }

    pub fn density(&self, ell: f64) -> Result<f64> {
        density_ell(self.q, ell, self.y, self.tau)
    }

    pub fn cdf(&self, ell: f64) -> Result<f64> {
        cdf_ell(self.q, ell, self.y, self.tau)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        sample_ell(self.q, self.y, self.tau, rng)
    }

    /// `(q!, (2q−1)!!)`, the open support of `ℓ_{q,y}`.
    pub fn support(&self) -> (f64, f64) {
        (factorial_f64(self.q), double_factorial_f64(self.q))
    }
}

/// `Z_{y,τ} = ∫₀^∞ δ·exp(−δ²/(2(1−τ²)))/√(δ²+4y²) dδ
///          = √(π(1−τ²)/2)·exp(2y²/(1−τ²))·erfc(y√(2/(1−τ²)))`.
pub fn delta_normalizer(y: f64, tau: f64) -> Result<f64> {
    check_y_tau(y, tau)?;
    let a = spread(tau);
    Ok((std::f64::consts::PI * a / 2.0).sqrt() * erfcx(standardized_cut(y, tau)))
}

/// Conditional density of `δ = √N(b − c)` given `λ = x + iy/√N`.
pub fn density_delta(delta: f64, y: f64, tau: f64) -> Result<f64> {
    let z = delta_normalizer(y, tau)?;
    if !(delta > 0.0) {
        return Ok(0.0);
    }
    let a = spread(tau);
    Ok(delta * (-delta * delta / (2.0 * a)).exp() / ((delta * delta + 4.0 * y * y).sqrt() * z))
}

/// Density of `S`, a `𝒩(0, (1−τ²)/(4y²))` variable conditioned on `S > 1`.
pub fn density_s(u: f64, y: f64, tau: f64) -> Result<f64> {
    check_y_tau(y, tau)?;
    if !(u > 1.0) {
        return Ok(0.0);
    }
    if u.is_infinite() {
        return Ok(0.0);
    }
    let a = spread(tau);
    let x0 = standardized_cut(y, tau);
    // exp(−2y²u²/a)/erfc(x0) = exp(−2y²(u²−1)/a)/erfcx(x0)
    let norm = (std::f64::consts::PI * a / (8.0 * y * y)).sqrt() * erfcx(x0);
    Ok((-x0 * x0 * (u - 1.0) * (u + 1.0)).exp() / norm)
}

/// Distribution function of `S`: `1 − erfc(u·x₀)/erfc(x₀)` with `x₀ = y√(2/(1−τ²))`.
pub fn cdf_s(u: f64, y: f64, tau: f64) -> Result<f64> {
    check_y_tau(y, tau)?;
    if !(u > 1.0) {
        return Ok(0.0);
    }
    if u.is_infinite() {
        return Ok(1.0);
    }
    let x0 = standardized_cut(y, tau);
    let tail = (-x0 * x0 * (u - 1.0) * (u + 1.0)).exp() * erfcx(u * x0) / erfcx(x0);
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

/// Exact draw of `S`.
///
/// With the cut at `α = 1/σ` standard deviations: plain Gaussian rejection
/// when `α ≤ 0.5`, otherwise the one-sided exponential proposal with the
/// optimal rate `(α + √(α²+4))/2`, whose acceptance rate stays above 0.7.
pub fn sample_s<R: Rng + ?Sized>(y: f64, tau: f64, rng: &mut R) -> Result<f64> {
    check_y_tau(y, tau)?;
    let sigma = scale_sigma(y, tau);
    let alpha = 1.0 / sigma;
    if alpha <= 0.5 {
        loop {
            let z = gaussian(rng);
            if z > alpha {
                return Ok(sigma * z);
            }
        }
    }
    let rate = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample(Exp1);
        let z = alpha + e / rate;
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - rate) * (z - rate)).exp() && z > alpha {
            return Ok(sigma * z);
        }
    }
}

/// Draw of `ℓ_{q,y} = g_q(S)`.
pub fn sample_ell<R: Rng + ?Sized>(q: u32, y: f64, tau: f64, rng: &mut R) -> Result<f64> {
    check_order(q)?;
    let s = sample_s(y, tau, rng)?;
    g(q, s)
}

/// Density of `ℓ_{q,y}` on `(q!, (2q−1)!!)`, by change of variables through `g_q`.
pub fn density_ell(q: u32, ell: f64, y: f64, tau: f64) -> Result<f64> {
    check_order(q)?;
    check_y_tau(y, tau)?;
    if !(ell > factorial_f64(q) && ell < double_factorial_f64(q)) {
        return Ok(0.0);
    }
    let x = match g_inverse(q, ell) {
        Ok(x) => x,
        // beyond the search cap the density of S is far below f64 range
        Err(Error::Range(_)) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    if x <= 1.0 {
        return Ok(0.0);
    }
    Ok(density_s(x, y, tau)? / phi(q, x)?.abs())
}

/// Distribution function of `ℓ_{q,y}`; `cdf_ell(g_q(u)) = cdf_s(u)`.
pub fn cdf_ell(q: u32, ell: f64, y: f64, tau: f64) -> Result<f64> {
    check_order(q)?;
    check_y_tau(y, tau)?;
    if ell <= factorial_f64(q) {
        return Ok(0.0);
    }
    if ell >= double_factorial_f64(q) {
        return Ok(1.0);
    }
    match g_inverse(q, ell) {
        Ok(x) => cdf_s(x, y, tau),
        Err(Error::Range(_)) => Ok(1.0),
        Err(e) => Err(e),
    }
}

/// `E[O₁₁^{2k}·O₂₁^{2j}] = (2k−1)!!(2j−1)!!/(N(N+2)⋯(N+2k+2j−2))` for Haar `O ∈ O_N`.
pub fn orthogonal_joint_moment(n: usize, k: u32, j: u32) -> Result<f64> {
    if n < 2 {
        return Err(domain!("dimension must be at least 2, got {n}"));
    }
    let numer = double_factorial_f64(k) * double_factorial_f64(j);
    let denom: f64 = (0..k + j).map(|i| n as f64 + 2.0 * i as f64).product();
    Ok(numer / denom)
}

/// `N^q/(N(N+2)⋯(N+2q−2))`, the finite-size factor in front of every mean IPR.
pub fn finite_n_prefactor(n: usize, q: u32) -> f64 {
    let n = n as f64;
    (0..q).map(|i| n / (n + 2.0 * i as f64)).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact `E[IPR_q(i·s·O₁ + t·O₂)]` for a Haar pair at dimension `n`.
pub fn mean_ipr_finite_n(n: usize, q: u32, s: f64, t: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain!("dimension must be at least 2, got {n}"));
    }
    if (s * s + t * t - 1.0).abs() > 1e-10 {
        return Err(domain!("s² + t² = {} ≠ 1", s * s + t * t));
    }
    let (s2, t2) = (s * s, t * t);
    let moment: f64 = (0..=q)
        .map(|k| {
            binomial(q, k)
                * s2.powi(k as i32)
                * t2.powi((q - k) as i32)
                * double_factorial_f64(k)
                * double_factorial_f64(q - k)
        })
        .sum();
    Ok(finite_n_prefactor(n, q) * moment)
}

/// `E[IPR_q | S] → q!·S^{−q}·L_q(S)` as `N → ∞`; equals `E[|tX + isY|^{2q}]` for iid standard `X, Y`.
pub fn mean_ipr_conditional(q: u32, scale: f64) -> Result<f64> {
    if !(scale >= 1.0) {
        return Err(domain!("scale parameter must be ≥ 1, got {scale}"));
    }
    match q {
        0 => Err(domain!("IPR order must be at least 1")),
        1 => Ok(1.0),
        _ => g(q, scale),
    }
}

/// Where on the spectrum an eigenvalue sits, for the almost-sure IPR limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Real eigenvalue: the eigenvector is uniform on the real sphere.
    RealAxis,
    /// Fixed non-real eigenvalue: uniform on the complex sphere in the limit.
    Bulk,
}

/// `(2q−1)!!` on the real axis and `q!` in the bulk.
pub fn ipr_limit(q: u32, regime: Regime) -> Result<f64> {
    if q == 0 || q > crate::legendre::MAX_ORDER {
        return Err(domain!("IPR order must lie in [1, {}], got {q}", crate::legendre::MAX_ORDER));
    }
    Ok(match regime {
        Regime::RealAxis => double_factorial_f64(q),
        Regime::Bulk => factorial_f64(q),
    })
}

/// `E[ℓ_{q,y}] = ∫ g_q(u)·density_s(u) du`.
pub fn mean_ell(q: u32, y: f64, tau: f64) -> Result<f64> {
    check_order(q)?;
    check_y_tau(y, tau)?;
    let sigma = scale_sigma(y, tau);
    // S − 1 lives on the scale σ when σ ≳ 1 and σ² when the cut is far out
    let step = sigma * sigma.min(1.0);
    let quad = integrate_to_infinity(
        |u| match (g(q, u.max(1.0)), density_s(u, y, tau)) {
            (Ok(gv), Ok(dv)) => gv * dv,
            _ => 0.0,
        },
        1.0,
        step,
        QUAD_TOL,
    );
    Ok(quad.value)
}

/// Exact mean IPR at dimension `n` for an eigenvalue at scaled height `y`:
/// the finite-size factor times `E[ℓ_{q,y}]`.
pub fn mean_ipr_depletion_finite_n(n: usize, q: u32, y: f64, tau: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain!("dimension must be at least 2, got {n}"));
    }
    Ok(finite_n_prefactor(n, q) * mean_ell(q, y, tau)?)
}
