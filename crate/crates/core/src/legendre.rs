//! Legendre polynomials and the IPR map `g_q(x) = q!·x^{-q}·L_q(x)`.
//!
//! On `[1, ∞)` the map `g_q` increases strictly from `q!` towards `(2q−1)!!`;
//! it sends the scale parameter `S = 1/(2st)` of a complex eigenvalue to the
//! limiting IPR of its eigenvector.

use crate::error::{domain, Error, Result};
use crate::ipr::{double_factorial_odd, factorial};

/// Largest supported order.
pub const MAX_ORDER: u32 = 30;

/// Upper limit of the search in [`g_inverse`].
pub const INVERSE_CAP: f64 = 1e8;

fn check_order(q: u32) -> Result<()> {
    if q > MAX_ORDER {
        return Err(domain!("Legendre order {q} exceeds {MAX_ORDER}"));
    }
    Ok(())
}

pub(crate) fn factorial_f64(q: u32) -> f64 {
    factorial(q).expect("order bounded by MAX_ORDER") as f64
}

pub(crate) fn double_factorial_f64(q: u32) -> f64 {
    double_factorial_odd(q).expect("order bounded by MAX_ORDER") as f64
}

/// `L_q(x)` by the three-term recurrence `(k+1)L_{k+1} = (2k+1)xL_k − kL_{k−1}`.
pub fn legendre_eval(q: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if q == 0 {
        return prev;
    }
    for k in 1..q {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `(L_q(x)/x^q, L'_q(x)/x^{q−1})` for `x ≠ 0`.
///
/// Dividing the recurrences through by powers of `x` keeps every term of
/// order one, so large `x` neither overflows nor loses the leading coefficient.
fn scaled_with_derivative(q: u32, x: f64) -> (f64, f64) {
    let inv2 = 1.0 / (x * x);
    // m_k = L_k/x^k, d_k = L'_k/x^{k-1}
    let (mut m_prev, mut m) = (1.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 1.0);
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 1..q {
        let kf = k as f64;
        let m_next = ((2.0 * kf + 1.0) * m - kf * m_prev * inv2) / (kf + 1.0);
        // L'_{k+1} = L'_{k-1} + (2k+1) L_k
        let d_next = d_prev * inv2 + (2.0 * kf + 1.0) * m;
        m_prev = m;
        m = m_next;
        d_prev = d;
        d = d_next;
    }
    (m, d)
}

/// `g_q(x) = q!·x^{−q}·L_q(x)` on `x ≥ 1`.
pub fn g(q: u32, x: f64) -> Result<f64> {
    check_order(q)?;
    if q < 2 {
        return Err(domain!("g_q needs q ≥ 2, got {q}"));
    }
    if !(x >= 1.0) {
        return Err(domain!("g_q is defined on [1, ∞), got x = {x}"));
    }
    if x.is_infinite() {
        return Ok(double_factorial_f64(q));
    }
    Ok(factorial_f64(q) * scaled_with_derivative(q, x).0)
}

/// `Φ_q(x) = d/dx g_q(x)` for `x > 1`.
///
/// Evaluated as `q!·x^{−q}(L'_q(x) − qL_q(x)/x)` with `L'_q` from its own
/// recurrence; this equals `q·q!/(x^{q+1}(1−x²))·(xL_{q−1}(x) − L_q(x))` but
/// has no removable `0/0` at `x → 1`.
pub fn phi(q: u32, x: f64) -> Result<f64> {
    check_order(q)?;
    if q < 2 {
        return Err(domain!("Φ_q needs q ≥ 2, got {q}"));
    }
    if !(x > 1.0) {
        return Err(domain!("Φ_q is defined on (1, ∞), got x = {x}"));
    }
    let (m, d) = scaled_with_derivative(q, x);
    Ok(factorial_f64(q) * (d - q as f64 * m) / x)
}

/// The unique `x ≥ 1` with `g_q(x) = ell`, for `ell ∈ (q!, (2q−1)!!)`.
///
/// Newton iteration safeguarded by bisection on a bracket `[1, x_hi]`, where
/// `x_hi` doubles until `g_q(x_hi) > ell`. Values of `ell` so close to the top
/// of the range that `x_hi` would pass [`INVERSE_CAP`] give a range error.
pub fn g_inverse(q: u32, ell: f64) -> Result<f64> {
    check_order(q)?;
    if q < 2 {
        return Err(domain!("g_q needs q ≥ 2, got {q}"));
    }
    let lo_val = factorial_f64(q);
    let hi_val = double_factorial_f64(q);
    if !(ell > lo_val && ell < hi_val) {
        return Err(domain!("g_{q}^-1 is defined on ({lo_val}, {hi_val}), got {ell}"));
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while g(q, hi)? <= ell {
        lo = hi;
        hi *= 2.0;
        if hi > INVERSE_CAP {
            return Err(Error::Range(format!("g_{q}^-1({ell}) lies beyond x = {INVERSE_CAP:e}")));
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = g(q, x)? - ell;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = phi(q, x.max(1.0 + f64::EPSILON))?;
        let mut next = x - fx / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
