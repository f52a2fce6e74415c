//! Samplers for the random-matrix models.
//!
//! Every sampler is a pure function of its parameters and the random stream
//! it is handed, so one `(spec, seed)` pair always yields the same matrix.

use faer::{c64, Mat, Side};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::gaussian;

/// Which random-matrix model to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    EllipticReal,
    GinibreReal,
    GinibreComplex,
    InducedGinibre,
    OrthogonalSum,
    PermutationSum,
}

/// How the permutations of a sum model are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PermMode {
    #[default]
    Uniform,
    /// Ewens measure: weight `θ^{#cycles}`; `θ = 1` is the uniform measure.
    Ewens { theta: f64 },
}

/// Rescaling applied to spectra before display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    /// Fixed per-model constant: `√(d−1)` for permutation sums, `√d` for
    /// orthogonal sums, identity for the other models.
    Bulk,
    /// Divide by the 0.999-quantile of `|λ|` over the pooled batch.
    Empirical,
}

/// Full description of one ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub nu: usize,
    #[serde(default = "one")]
    pub d: usize,
    #[serde(default)]
    pub perm_mode: PermMode,
    #[serde(default)]
    pub normalization: Normalization,
}

fn one() -> usize {
    1
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize) -> Self {
        Self { kind, n, tau: 0.0, nu: 0, d: 1, perm_mode: PermMode::Uniform, normalization: Normalization::None }
    }

    pub fn elliptic(n: usize, tau: f64) -> Self {
        Self { tau, ..Self::new(EnsembleKind::EllipticReal, n) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain!("matrix dimension must be at least 2, got {}", self.n));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(domain!("τ must lie in [0, 1], got {}", self.tau));
        }
        if self.d < 1 {
            return Err(domain!("number of summands must be at least 1"));
        }
        if let PermMode::Ewens { theta } = self.perm_mode {
            if !(theta > 0.0 && theta.is_finite()) {
                return Err(domain!("Ewens parameter θ must be positive, got {theta}"));
            }
        }
        if self.normalization == Normalization::Bulk && self.kind == EnsembleKind::PermutationSum && self.d < 2 {
            return Err(domain!("bulk normalization of a permutation sum needs d ≥ 2"));
        }
        Ok(())
    }

    /// Whether the matrices of this ensemble have real entries.
    pub fn is_real(&self) -> bool {
        self.kind != EnsembleKind::GinibreComplex
    }
}

/// A sampled square matrix.
#[derive(Debug, Clone)]
pub enum SampledMatrix {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl SampledMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            Self::Real(m) => m.nrows(),
            Self::Complex(m) => m.nrows(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            Self::Real(m) => m.norm_l2(),
            Self::Complex(m) => m.norm_l2(),
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(domain!("matrix dimension must be at least 2, got {n}"));
    }
    Ok(())
}

/// `(√(1+τ)·H + √(1−τ)·A)/√(2N)` with `H` symmetric Gaussian (diagonal
/// variance 2, off-diagonal 1) and `A` antisymmetric Gaussian.
pub fn sample_elliptic<R: Rng + ?Sized>(n: usize, tau: f64, rng: &mut R) -> Result<Mat<f64>> {
    check_dim(n)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(domain!("τ must lie in [0, 1], got {tau}"));
    }
    let scale = 1.0 / (2.0 * n as f64).sqrt();
    let sym = (1.0 + tau).sqrt() * scale;
    let anti = (1.0 - tau).sqrt() * scale;
    let mut x = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        x[(i, i)] = sym * std::f64::consts::SQRT_2 * gaussian(rng);
        for j in i + 1..n {
            let h = gaussian(rng);
            let a = gaussian(rng);
            x[(i, j)] = sym * h + anti * a;
            x[(j, i)] = sym * h - anti * a;
        }
    }
    Ok(x)
}

/// Iid `𝒩(0, 1/N)` real entries.
pub fn sample_ginibre_real<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Mat<f64>> {
    check_dim(n)?;
    let sd = 1.0 / (n as f64).sqrt();
    Ok(gaussian_matrix(n, n, sd, rng))
}

/// Iid complex `𝒩_ℂ(0, 1/N)` entries: real and imaginary parts of variance `1/(2N)`.
pub fn sample_ginibre_complex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Mat<c64>> {
    check_dim(n)?;
    let sd = 1.0 / (2.0 * n as f64).sqrt();
    let mut x = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            x[(i, j)] = c64::new(sd * gaussian(rng), sd * gaussian(rng));
        }
    }
    Ok(x)
}

/// Column-major fill, so the draw order is fixed.
fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, sd: f64, rng: &mut R) -> Mat<f64> {
    let mut x = Mat::<f64>::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            x[(i, j)] = sd * gaussian(rng);
        }
    }
    x
}

/// Haar orthogonal matrix: `Q` from the QR factorization of a Gaussian
/// matrix, with column signs fixed so that `R` has a positive diagonal.
pub fn sample_haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Mat<f64>> {
    if n < 1 {
        return Err(domain!("matrix dimension must be at least 1"));
    }
    let g = gaussian_matrix(n, n, 1.0, rng);
    let qr = g.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(q)
}

/// `U·√(XXᵀ)` with `X` an `N×(N+ν)` standard Gaussian matrix and `U` Haar.
pub fn sample_induced_ginibre<R: Rng + ?Sized>(n: usize, nu: usize, rng: &mut R) -> Result<Mat<f64>> {
    check_dim(n)?;
    let x = gaussian_matrix(n, n + nu, 1.0, rng);
    let gram = &x * x.transpose();
    let evd = gram.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Solver(format!("{e:?}")))?;
    let v = evd.U();
    let s = evd.S().column_vector();
    let mut v_scaled = v.to_owned();
    for j in 0..n {
        let root = s[j].max(0.0).sqrt();
        for i in 0..n {
            v_scaled[(i, j)] *= root;
        }
    }
    let root_gram = &v_scaled * v.transpose();
    let u = sample_haar_orthogonal(n, rng)?;
    Ok(&u * &root_gram)
}

/// Sum of `d` independent Haar orthogonal matrices.
pub fn sample_orthogonal_sum<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Mat<f64>> {
    check_dim(n)?;
    if d < 1 {
        return Err(domain!("number of summands must be at least 1"));
    }
    let mut sum = Mat::<f64>::zeros(n, n);
    for _ in 0..d {
        sum += sample_haar_orthogonal(n, rng)?;
    }
    Ok(sum)
}

/// One permutation of `0..n` as the image vector `i ↦ σ(i)`.
pub fn sample_permutation<R: Rng + ?Sized>(n: usize, mode: PermMode, rng: &mut R) -> Result<Vec<usize>> {
    match mode {
        PermMode::Uniform => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            Ok(perm)
        }
        PermMode::Ewens { theta } => {
            if !(theta > 0.0 && theta.is_finite()) {
                return Err(domain!("Ewens parameter θ must be positive, got {theta}"));
            }
            // Chinese restaurant process for the cycle lengths: customer k opens
            // a new table with probability θ/(θ+k), otherwise sits next to a
            // uniformly chosen earlier customer.
            let mut table_of = Vec::with_capacity(n);
            let mut sizes: Vec<usize> = Vec::new();
            for k in 0..n {
                let u: f64 = rng.random::<f64>() * (theta + k as f64);
                let table = if u < theta || k == 0 {
                    sizes.push(0);
                    sizes.len() - 1
                } else {
                    table_of[rng.random_range(0..k)]
                };
                sizes[table] += 1;
                table_of.push(table);
            }
            // Given its cycle type, an Ewens permutation is uniform.
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut perm = vec![0; n];
            let mut start = 0;
            for len in sizes {
                let cycle = &order[start..start + len];
                for (i, &from) in cycle.iter().enumerate() {
                    perm[from] = cycle[(i + 1) % len];
                }
                start += len;
            }
            Ok(perm)
        }
    }
}

/// Number of cycles of a permutation given as an image vector.
pub fn cycle_count(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
        }
    }
    cycles
}

/// Sum of `d` independent permutation matrices (`P[σ(i), i] = 1`).
pub fn sample_permutation_sum<R: Rng + ?Sized>(n: usize, d: usize, mode: PermMode, rng: &mut R) -> Result<Mat<f64>> {
    check_dim(n)?;
    if d < 1 {
        return Err(domain!("number of summands must be at least 1"));
    }
    let mut sum = Mat::<f64>::zeros(n, n);
    for _ in 0..d {
        let perm = sample_permutation(n, mode, rng)?;
        for (i, &j) in perm.iter().enumerate() {
            sum[(j, i)] += 1.0;
        }
    }
    Ok(sum)
}

/// Draw one matrix from `spec` (unnormalized; see [`normalize_spectrum`]).
pub fn sample<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<SampledMatrix> {
    spec.validate()?;
    let n = spec.n;
    Ok(match spec.kind {
        EnsembleKind::EllipticReal => SampledMatrix::Real(sample_elliptic(n, spec.tau, rng)?),
        EnsembleKind::GinibreReal => SampledMatrix::Real(sample_ginibre_real(n, rng)?),
        EnsembleKind::GinibreComplex => SampledMatrix::Complex(sample_ginibre_complex(n, rng)?),
        EnsembleKind::InducedGinibre => SampledMatrix::Real(sample_induced_ginibre(n, spec.nu, rng)?),
        EnsembleKind::OrthogonalSum => SampledMatrix::Real(sample_orthogonal_sum(n, spec.d, rng)?),
        EnsembleKind::PermutationSum => SampledMatrix::Real(sample_permutation_sum(n, spec.d, spec.perm_mode, rng)?),
    })
}

/// The divisor applied to eigenvalues under `spec.normalization`.
///
/// `pooled` is the batch of eigenvalues the empirical quantile is taken over;
/// the other modes ignore it.
pub fn normalization_divisor(spec: &EnsembleSpec, pooled: &[Complex64]) -> Result<f64> {
    match spec.normalization {
        Normalization::None => Ok(1.0),
        Normalization::Bulk => match spec.kind {
            EnsembleKind::PermutationSum if spec.d < 2 => {
                Err(domain!("bulk normalization of a permutation sum needs d ≥ 2"))
            }
            EnsembleKind::PermutationSum => Ok(((spec.d - 1) as f64).sqrt()),
            EnsembleKind::OrthogonalSum => Ok((spec.d as f64).sqrt()),
            _ => Ok(1.0),
        },
        Normalization::Empirical => {
            if pooled.is_empty() {
                return Err(domain!("empirical normalization of an empty spectrum"));
            }
            let mut moduli: Vec<f64> = pooled.iter().map(|z| z.norm()).collect();
            moduli.sort_by(f64::total_cmp);
            let rank = ((0.999 * moduli.len() as f64).ceil() as usize).clamp(1, moduli.len());
            let quantile = moduli[rank - 1];
            if !(quantile > 0.0) {
                return Err(domain!("empirical normalization of an all-zero spectrum"));
            }
            Ok(quantile)
        }
    }
}

/// Rescale a pooled batch of eigenvalues in place according to `spec.normalization`.
pub fn normalize_spectrum(eigs: &mut [Complex64], spec: &EnsembleSpec) -> Result<()> {
    if eigs.is_empty() {
        return Err(domain!("cannot normalize an empty spectrum"));
    }
    let divisor = normalization_divisor(spec, eigs)?;
    if divisor != 1.0 {
        eigs.iter_mut().for_each(|z| *z /= divisor);
    }
    Ok(())
}
