//! 2×2 real Schur blocks and the eigenvectors they induce.
//!
//! A complex-conjugate eigenvalue pair of a real matrix lives in a block
//! `[[x, b], [−c, x]]` with `b ≥ c > 0`. The block fixes the mixing amplitudes
//! `s = √(b/(b+c))`, `t = √(c/(b+c))`, and the eigenvector of the full matrix
//! is `i·s·O₁ + t·O₂` for the first two columns `O₁, O₂` of the orthogonal
//! Schur factor.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::gaussian;
use crate::theory;

/// A general real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn half_trace(&self) -> f64 {
        0.5 * (self.a + self.d)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `m² − p`; negative exactly when the eigenvalues are non-real.
    pub fn discriminant(&self) -> f64 {
        // m² − p = ((a−d)/2)² + bc, free of the cancellation in m² − (ad − bc).
        let h = 0.5 * (self.a - self.d);
        h * h + self.b * self.c
    }

    /// `(λ₊, λ₋) = m ± √(m² − p)` with `m = (a+d)/2`, `p = ad − bc`.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let m = self.half_trace();
        let disc = self.discriminant();
        if disc >= 0.0 {
            let r = disc.sqrt();
            (Complex64::new(m + r, 0.0), Complex64::new(m - r, 0.0))
        } else {
            let r = (-disc).sqrt();
            (Complex64::new(m, r), Complex64::new(m, -r))
        }
    }

    /// Unit right eigenvector `(λ₊ − d, c)/‖·‖` for `λ₊`; requires `c ≠ 0`.
    pub fn unit_eigenvector_plus(&self) -> Result<[Complex64; 2]> {
        if self.c == 0.0 {
            return Err(Error::Unsupported("eigenvector formula needs c ≠ 0".into()));
        }
        let (plus, _) = self.eigenvalues();
        let top = plus - self.d;
        let norm = if self.discriminant() < 0.0 {
            // |λ₊ − d|² + c² collapses to c² − bc on a complex pair
            (self.c * self.c - self.b * self.c).sqrt()
        } else {
            (top.norm_sqr() + self.c * self.c).sqrt()
        };
        Ok([top / norm, Complex64::new(self.c / norm, 0.0)])
    }
}

/// Eigenvalues of `[[a, b], [c, d]]`, plus the unit eigenvector of `λ₊`.
///
/// Fails with [`Error::Unsupported`] when `c = 0`; use
/// [`Mat2::eigenvalues`] when only the spectrum is needed.
pub fn eig2x2_general(a: f64, b: f64, c: f64, d: f64) -> Result<(Complex64, Complex64, [Complex64; 2])> {
    let m = Mat2::new(a, b, c, d);
    let (plus, minus) = m.eigenvalues();
    Ok((plus, minus, m.unit_eigenvector_plus()?))
}

/// Canonical block `[[x, b], [−c, x]]` with `b ≥ c > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub x: f64,
    pub b: f64,
    pub c: f64,
}

impl BlockParams {
    pub fn new(x: f64, b: f64, c: f64) -> Result<Self> {
        let p = Self { x, b, c };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.b >= self.c) || !self.x.is_finite() || !self.b.is_finite() {
            return Err(domain!("canonical block needs b ≥ c > 0, got b = {}, c = {}", self.b, self.c));
        }
        Ok(())
    }

    pub fn as_matrix(&self) -> Mat2 {
        Mat2::new(self.x, self.b, -self.c, self.x)
    }
}

/// Spectral data of a canonical block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSpectral {
    /// Eigenvalue in the upper half plane, `x + i√(bc)`.
    pub lambda: Complex64,
    pub s: f64,
    pub t: f64,
    /// Scale parameter `S = 1/(2st) = (b+c)/(2√(bc)) ≥ 1`.
    pub scale: f64,
}

pub fn block_spectral(p: &BlockParams) -> Result<BlockSpectral> {
    p.validate()?;
    let (b, c) = (p.b, p.c);
    let sum = b + c;
    let root_bc = b.sqrt() * c.sqrt();
    Ok(BlockSpectral {
        lambda: Complex64::new(p.x, root_bc),
        s: (b / sum).sqrt(),
        t: (c / sum).sqrt(),
        scale: sum / (2.0 * root_bc),
    })
}

/// Orthogonally similar canonical form of a 2×2 matrix with non-real spectrum.
///
/// Uses only similarity invariants (trace, determinant, Frobenius norm): with
/// `b'c' = p − m²` and `b'² + c'² = ‖A‖²_F − 2x²` one gets
/// `b' + c' = |b − c|` and `b' − c' = √((a−d)² + (b+c)²)`.
pub fn canonicalize_2x2(a: f64, b: f64, c: f64, d: f64) -> Result<BlockParams> {
    let m = Mat2::new(a, b, c, d);
    let disc = m.discriminant();
    if !(disc < 0.0) {
        return Err(domain!("real spectrum (m² − p = {disc}); no canonical complex block"));
    }
    if a == d && b >= -c && -c > 0.0 {
        return BlockParams::new(a, b, -c);
    }
    let x = m.half_trace();
    let sum = (b - c).abs();
    let diff = (a - d).hypot(b + c);
    let b_new = 0.5 * (sum + diff);
    let c_new = -disc / b_new;
    BlockParams::new(x, b_new, c_new.min(b_new))
}

/// Inverse of `S = 1/(2st)` on `s² + t² = 1`, `s ≥ t > 0`.
pub fn st_from_scale(scale: f64) -> Result<(f64, f64)> {
    if !(scale >= 1.0) {
        return Err(domain!("scale parameter must be ≥ 1, got {scale}"));
    }
    let inv2 = 1.0 / (scale * scale);
    let r = (1.0 - inv2).max(0.0).sqrt();
    let s2 = 0.5 * (1.0 + r);
    // (1 − r)/2 rewritten to avoid cancellation for large S
    let t2 = 0.5 * inv2 / (1.0 + r);
    Ok((s2.sqrt(), t2.sqrt()))
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    crate::ipr::compensated_sum(u.iter().zip(v).map(|(a, b)| a * b))
}

/// Uniform orthonormal pair in `ℝ^n` (a point of the Stiefel manifold),
/// by Gram–Schmidt on two iid Gaussian vectors.
pub fn sample_stiefel_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(domain!("Stiefel pair needs n ≥ 2, got {n}"));
    }
    let mut u: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    let mut v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    let nu = dot(&u, &u).sqrt();
    u.iter_mut().for_each(|e| *e /= nu);
    // two projection passes keep ⟨u, v⟩ at round-off level
    for _ in 0..2 {
        let proj = dot(&u, &v);
        v.iter_mut().zip(&u).for_each(|(e, ue)| *e -= proj * ue);
    }
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|e| *e /= nv);
    Ok((u, v))
}

const ORTHONORMAL_TOL: f64 = 1e-8;

/// `R = i·s·O₁ + t·O₂`; a unit vector whenever `s² + t² = 1`.
///
/// `(is, t)` spans the eigenspace of `x − i√(bc)` in the block; the
/// eigenvector of `x + i√(bc)` is `i·s·O₁ − t·O₂`, which has the same law
/// because `O₂` and `−O₂` do.
pub fn eigvec_from_block(s: f64, t: f64, o1: &[f64], o2: &[f64]) -> Result<Vec<Complex64>> {
    if o1.len() != o2.len() {
        return Err(domain!("column lengths differ: {} vs {}", o1.len(), o2.len()));
    }
    if (s * s + t * t - 1.0).abs() > 1e-10 {
        return Err(domain!("s² + t² = {} ≠ 1", s * s + t * t));
    }
    let gram = [dot(o1, o1) - 1.0, dot(o2, o2) - 1.0, dot(o1, o2)];
    if gram.iter().any(|e| e.abs() > ORTHONORMAL_TOL) {
        return Err(domain!("columns are not orthonormal (Gram defect {gram:?})"));
    }
    Ok(o1.iter().zip(o2).map(|(&a, &b)| Complex64::new(t * b, s * a)).collect())
}

/// Draw of a depletion-regime eigenvector: `S` from its conditional law at
/// scaled height `y`, then `i·s·O₁ + t·O₂` for a uniform Stiefel pair.
/// Returns the vector together with the sampled `S`.
pub fn synthetic_eigvec_sample<R: Rng + ?Sized>(
    n: usize,
    y: f64,
    tau: f64,
    rng: &mut R,
) -> Result<(Vec<Complex64>, f64)> {
    let scale = theory::sample_s(y, tau, rng)?;
    let (s, t) = st_from_scale(scale)?;
    let (o1, o2) = sample_stiefel_pair(n, rng)?;
    Ok((eigvec_from_block(s, t, &o1, &o2)?, scale))
}
