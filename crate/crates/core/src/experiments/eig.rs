//! Dense right eigendecomposition with a residual contract, and the pairing
//! of complex-conjugate eigenvalues of real matrices.

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::ensembles::SampledMatrix;
use crate::error::{Error, Result};
use crate::ipr::norm2;

/// Largest accepted `‖Gv − λv‖₂ / ‖G‖_F`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Eigenvalues with `|Im λ| ≤ REALNESS_TOL·‖G‖_F` are treated as real.
pub const REALNESS_TOL: f64 = 1e-10;

/// One right eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct EigPair {
    pub lambda: Complex64,
    /// Unit-norm right eigenvector.
    pub vector: Vec<Complex64>,
    /// `‖Gv − λv‖₂ / ‖G‖_F`.
    pub residual: f64,
}

/// An eigenpair retained after pairing, one per real eigenvalue or conjugate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RetainedEig {
    pub lambda: Complex64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub is_real: bool,
}

/// All `N` right eigenpairs of `g`.
///
/// Fails with [`Error::Solver`] if the solver does not converge or any pair
/// misses the residual bound.
pub fn eig_right(g: &SampledMatrix) -> Result<Vec<EigPair>> {
    let frob = g.frobenius_norm();
    if !frob.is_finite() {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let (g_c, evd) = match g {
        SampledMatrix::Real(m) => {
            let evd = m.eigen().map_err(|e| Error::Solver(format!("{e:?}")))?;
            (Mat::<c64>::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0)), evd)
        }
        SampledMatrix::Complex(m) => (m.clone(), m.eigen().map_err(|e| Error::Solver(format!("{e:?}")))?),
    };
    let n = g_c.nrows();
    let u = evd.U();
    let s = evd.S().column_vector();
    let gu = &g_c * u;
    let scale = if frob > 0.0 { frob } else { 1.0 };
    let mut pairs = Vec::with_capacity(n);
    for j in 0..n {
        let lambda = s[j];
        let mut vector: Vec<Complex64> = (0..n).map(|i| u[(i, j)]).collect();
        let norm = norm2(&vector);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Solver(format!("eigenvector {j} has norm {norm}")));
        }
        vector.iter_mut().for_each(|z| *z /= norm);
        let diff: Vec<Complex64> = (0..n).map(|i| (gu[(i, j)] - lambda * u[(i, j)]) / norm).collect();
        let residual = norm2(&diff) / scale;
        if !(residual <= RESIDUAL_TOL) {
            return Err(Error::Solver(format!("eigenpair {j} has residual {residual:e}")));
        }
        pairs.push(EigPair { lambda, vector, residual });
    }
    Ok(pairs)
}

/// Snap nearly-real eigenvalues of a real matrix to the axis and keep one
/// member (`Im λ > 0`) of each conjugate pair, in solver order.
///
/// A complex eigenvalue without a conjugate partner is an integrity error.
pub fn realness_threshold(pairs: Vec<EigPair>, frobenius_norm: f64) -> Result<Vec<RetainedEig>> {
    let snap = REALNESS_TOL * frobenius_norm;
    let pair_tol = 1e-8 * frobenius_norm.max(f64::MIN_POSITIVE);
    let lower: Vec<Complex64> = pairs.iter().map(|p| p.lambda).filter(|l| l.im < 0.0 && l.im.abs() > snap).collect();
    let mut used = vec![false; lower.len()];
    let mut retained = Vec::with_capacity(pairs.len());
    let mut upper_count = 0;
    for p in pairs {
        if p.lambda.im.abs() <= snap {
            let mut vector = p.vector;
            // A real eigenvalue has a real eigenvector up to a global phase.
            if let Some(pivot) = vector.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())) {
                let phase = pivot.conj() / pivot.norm();
                vector.iter_mut().for_each(|z| *z = Complex64::new((*z * phase).re, 0.0));
                let norm = norm2(&vector);
                vector.iter_mut().for_each(|z| *z /= norm);
            }
            retained.push(RetainedEig {
                lambda: Complex64::new(p.lambda.re, 0.0),
                vector,
                residual: p.residual,
                is_real: true,
            });
        } else if p.lambda.im > 0.0 {
            upper_count += 1;
            let partner = lower
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, l)| (k, (l.conj() - p.lambda).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match partner {
                Some((k, dist)) if dist <= pair_tol => used[k] = true,
                _ => {
                    return Err(Error::Integrity(format!("eigenvalue {} has no conjugate partner", p.lambda)));
                }
            }
            retained.push(RetainedEig { lambda: p.lambda, vector: p.vector, residual: p.residual, is_real: false });
        }
    }
    if upper_count != lower.len() {
        return Err(Error::Integrity(format!("{} eigenvalues above the axis but {} below", upper_count, lower.len())));
    }
    Ok(retained)
}

/// Keep every eigenpair of a complex matrix, none of them flagged real.
pub fn retain_all(pairs: Vec<EigPair>) -> Vec<RetainedEig> {
    pairs
        .into_iter()
        .map(|p| RetainedEig { lambda: p.lambda, vector: p.vector, residual: p.residual, is_real: false })
        .collect()
}

/// Eigendecompose and pair according to the field of `g`.
pub fn retained_eigenpairs(g: &SampledMatrix) -> Result<Vec<RetainedEig>> {
    let pairs = eig_right(g)?;
    match g {
        SampledMatrix::Real(_) => realness_threshold(pairs, g.frobenius_norm()),
        SampledMatrix::Complex(_) => Ok(retain_all(pairs)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_elliptic;
    use crate::rng::stream;

    fn real(m: Mat<f64>) -> SampledMatrix {
        SampledMatrix::Real(m)
    }

    #[test]
    fn diagonal_matrix() {
        let g = real(Mat::from_fn(3, 3, |i, j| if i == j { (i + 1) as f64 } else { 0.0 }));
        let mut eigs: Vec<f64> = eig_right(&g).unwrap().iter().map(|p| p.lambda.re).collect();
        eigs.sort_by(f64::total_cmp);
        assert_eq!(eigs, vec![1.0, 2.0, 3.0]);
        assert!(eig_right(&g).unwrap().iter().all(|p| p.residual < 1e-15 && p.lambda.im == 0.0));
    }

    #[test]
    fn embedded_canonical_block() {
        let (x, b, c) = (0.3, 2.0, 0.5);
        let g = real(Mat::from_fn(4, 4, |i, j| match (i, j) {
            (0, 0) | (1, 1) => x,
            (0, 1) => b,
            (1, 0) => -c,
            _ => 0.0,
        }));
        let kept = retained_eigenpairs(&g).unwrap();
        let complex: Vec<_> = kept.iter().filter(|e| !e.is_real).collect();
        assert_eq!(complex.len(), 1);
        assert!((complex[0].lambda - Complex64::new(x, (b * c).sqrt())).norm() < 1e-14);
        assert_eq!(kept.iter().filter(|e| e.is_real).count(), 2);
    }

    #[test]
    fn random_elliptic_residuals_and_counts() {
        let mut rng = stream(21, 0);
        for tau in [0.0, 0.5, 1.0] {
            let g = real(sample_elliptic(50, tau, &mut rng).unwrap());
            let pairs = eig_right(&g).unwrap();
            assert!(pairs.iter().all(|p| p.residual <= RESIDUAL_TOL));
            let kept = realness_threshold(pairs, g.frobenius_norm()).unwrap();
            let r = kept.iter().filter(|e| e.is_real).count();
            let m = kept.len() - r;
            assert_eq!(r + 2 * m, 50);
            assert!(kept.iter().filter(|e| e.is_real).all(|e| e.lambda.im == 0.0));
            if tau == 1.0 {
                assert_eq!(m, 0);
            }
        }
    }

    #[test]
    fn unpaired_eigenvalue_is_rejected() {
        let lone = EigPair { lambda: Complex64::new(0.0, 1.0), vector: vec![Complex64::new(1.0, 0.0)], residual: 0.0 };
        assert!(matches!(realness_threshold(vec![lone], 1.0), Err(Error::Integrity(_))));
    }
}
