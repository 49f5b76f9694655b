//! Hermitian spectral calculus and entropies.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues below this are treated as zero before taking logarithms.
pub const LOG_CLAMP: f64 = 1e-30;
/// Smallest eigenvalue accepted for a reference state.
pub const FULL_RANK: f64 = 1e-12;

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let hermitian = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(hermitian);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `V diag(f(lambda)) V^dagger`.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    compose(&values.iter().map(|&x| f(x)).collect::<Vec<_>>(), &vectors)
}

pub(crate) fn compose(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        scaled.column_mut(c).scale_mut(v);
    }
    scaled * vectors.adjoint()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    let (values, _) = eigh(m);
    values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Natural logarithm of a full-rank state.
pub fn log_state(sigma: &DensityMatrix) -> Result<CMatrix> {
    let (values, vectors) = eigh(sigma.matrix());
    let min = values[0];
    if min <= FULL_RANK {
        return Err(Error::Singular { min_eigenvalue: min });
    }
    Ok(compose(&values.iter().map(|v| v.ln()).collect::<Vec<_>>(), &vectors))
}

/// `-tr(rho log2 rho)` with negative eigenvalues clamped to zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (values, _) = eigh(rho.matrix());
    values
        .iter()
        .filter(|&&v| v > LOG_CLAMP)
        .map(|&v| -v * v.log2())
        .sum()
}

/// `D(rho || sigma) = tr rho (log rho - log sigma)` in bits.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let log_sigma = log_state(sigma)?;
    let cross = (rho.matrix() * &log_sigma).trace().re;
    let (values, _) = eigh(rho.matrix());
    let neg_entropy: f64 = values.iter().filter(|&&v| v > LOG_CLAMP).map(|&v| v * v.ln()).sum();
    Ok((neg_entropy - cross) / std::f64::consts::LN_2)
}

/// `D_inf(rho || sigma) = log2 lambda_max(sigma^{-1/2} rho sigma^{-1/2})`.
pub fn max_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let (values, vectors) = eigh(sigma.matrix());
    if values[0] <= FULL_RANK {
        return Err(Error::Singular { min_eigenvalue: values[0] });
    }
    let inv_sqrt = compose(&values.iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>(), &vectors);
    let m = &inv_sqrt * rho.matrix() * &inv_sqrt;
    let (lam, _) = eigh(&m);
    Ok(lam[lam.len() - 1].max(LOG_CLAMP).log2())
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.n() != b.n() {
        return Err(crate::error::invalid(format!("qubit counts differ: {} vs {}", a.n(), b.n())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigh_sorts_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), Complex64::new(2.0, 0.0)],
        );
        let (values, vectors) = eigh(&m);
        assert_relative_eq!(values[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(values[1], 3.0, epsilon = 1e-14);
        let back = compose(&values, &vectors);
        assert!((back - m).norm() < 1e-13);
    }

    #[test]
    fn log_requires_full_rank() {
        let pure = DensityMatrix::basis(2, 0);
        assert!(matches!(log_state(&pure), Err(Error::Singular { .. })));
    }
}
