//! Dense density matrices and local operations on them.

use num_complex::Complex64;

use crate::error::{check_cap, invalid, Result};
use crate::linalg::{eigh, max_abs, CMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense `2^n x 2^n` Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace to `1e-12` and positivity to `-1e-10`.
    pub fn from_matrix(n: usize, m: CMatrix) -> Result<Self> {
        check_cap(n, 16)?;
        let dim = 1usize << n;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(invalid(format!("expected a {dim}x{dim} matrix")));
        }
        if max_abs(&(&m - m.adjoint())) > 1e-12 {
            return Err(invalid("matrix is not Hermitian"));
        }
        if (m.trace() - ONE).norm() > 1e-12 {
            return Err(invalid("matrix does not have unit trace"));
        }
        let (values, _) = eigh(&m);
        if values[0] < -1e-10 {
            return Err(invalid(format!("matrix has negative eigenvalue {}", values[0])));
        }
        Ok(Self { n, m })
    }

    /// Wraps a matrix already known to be a state, symmetrizing rounding noise.
    pub(crate) fn from_raw(n: usize, m: CMatrix) -> Self {
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self { n, m }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self { n, m }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        Self { n, m: CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0) }
    }

    /// Diagonal state with the given basis probabilities.
    pub fn diagonal(n: usize, probs: &[f64]) -> Result<Self> {
        let dim = 1usize << n;
        if probs.len() != dim || probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("need 2^n non-negative probabilities"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("probabilities must sum to 1"));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = Complex64::new(p, 0.0);
        }
        Ok(Self { n, m })
    }

    /// `q^{(x) n}` for a single-qubit state `q`.
    pub fn product(q: &CMatrix, n: usize) -> Self {
        let mut m = q.clone();
        for _ in 1..n {
            m = q.kronecker(&m);
        }
        Self::from_raw(n, m)
    }

    /// `|+><+|^{(x) n}`.
    pub fn plus_state(n: usize) -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self::product(&CMatrix::from_element(2, 2, h), n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Re tr(rho H)`.
    pub fn expectation(&self, h: &CMatrix) -> f64 {
        self.m.component_mul(&h.transpose()).sum().re
    }

    /// `sum_i rho_ii d_i` for a diagonal observable.
    pub fn expectation_diagonal(&self, d: &[f64]) -> f64 {
        d.iter().enumerate().map(|(i, &x)| self.m[(i, i)].re * x).sum()
    }

    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// `rho -> U rho U^dagger` for `U` acting on `wires` (wire `wires[b]` is bit `b` of `U`'s index).
    pub fn apply_local_unitary(&mut self, u: &CMatrix, wires: &[usize]) -> Result<()> {
        check_local(self.n, u, wires)?;
        let a = left_apply(&self.m, u, wires);
        self.m = left_apply(&a.adjoint(), u, wires);
        Ok(())
    }

    /// `rho -> U rho U^dagger` for a full-register unitary.
    pub fn apply_unitary(&mut self, u: &CMatrix) {
        self.m = u * &self.m * u.adjoint();
    }

    /// `(1 - p) rho + p tr_k(rho) (x) I/2` on qubit `k`.
    pub fn depolarize(&mut self, k: usize, p: f64) {
        let half = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        self.replace_toward(k, p, &half);
    }

    /// `(1 - p) rho + p tr_k(rho) (x) q` on qubit `k`.
    pub fn replace_toward(&mut self, k: usize, p: f64, q: &CMatrix) {
        let dim = self.dim();
        let bit = 1usize << k;
        let mut out = self.m.clone() * Complex64::new(1.0 - p, 0.0);
        let pc = Complex64::new(p, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                // reduced entry of tr_k rho at the other bits of (i, j)
                let (i0, j0) = (i & !bit, j & !bit);
                let reduced = self.m[(i0, j0)] + self.m[(i0 | bit, j0 | bit)];
                let (bi, bj) = ((i & bit != 0) as usize, (j & bit != 0) as usize);
                out[(i, j)] += pc * reduced * q[(bi, bj)];
            }
        }
        self.m = out;
    }

    /// Rescales to unit trace; returns the drift removed.
    pub(crate) fn renormalize(&mut self) -> f64 {
        let t = self.trace();
        self.m /= Complex64::new(t, 0.0);
        (t - 1.0).abs()
    }
}

fn check_local(n: usize, u: &CMatrix, wires: &[usize]) -> Result<()> {
    let w = wires.len();
    if u.nrows() != 1 << w || u.ncols() != 1 << w {
        return Err(invalid("operator size does not match wire count"));
    }
    for (a, &x) in wires.iter().enumerate() {
        if x >= n {
            return Err(invalid(format!("wire {x} out of range")));
        }
        if wires[..a].contains(&x) {
            return Err(invalid("wires must be distinct"));
        }
    }
    Ok(())
}

/// `(op on wires) * m` without forming the full operator.
pub(crate) fn left_apply(m: &CMatrix, op: &CMatrix, wires: &[usize]) -> CMatrix {
    let dim = m.nrows();
    let local = 1usize << wires.len();
    let mask: usize = wires.iter().map(|&w| 1usize << w).sum();
    let offsets: Vec<usize> = (0..local)
        .map(|l| wires.iter().enumerate().filter(|(b, _)| l >> b & 1 == 1).map(|(_, &w)| 1usize << w).sum())
        .collect();
    let mut out = CMatrix::zeros(dim, m.ncols());
    let mut gathered = vec![ZERO; local];
    for base in (0..dim).filter(|i| i & mask == 0) {
        for c in 0..m.ncols() {
            for (l, &o) in offsets.iter().enumerate() {
                gathered[l] = m[(base | o, c)];
            }
            for (r, &o) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (l, g) in gathered.iter().enumerate() {
                    acc += op[(r, l)] * g;
                }
                out[(base | o, c)] = acc;
            }
        }
    }
    out
}

/// Full-register matrix of `op` acting on `wires`.
pub fn embed(n: usize, op: &CMatrix, wires: &[usize]) -> CMatrix {
    let dim = 1usize << n;
    left_apply(&CMatrix::identity(dim, dim), op, wires)
}

/// Pauli matrices.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Single-qubit state `diag(p0, 1 - p0)`.
pub fn qubit_diagonal(p0: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[Complex64::new(p0, 0.0), ZERO, ZERO, Complex64::new(1.0 - p0, 0.0)])
}

/// Diagonal `2^n x 2^n` matrix of the Ising energies (basis index = spin configuration).
pub fn ising_matrix(instance: &nisqbound_core::instances::IsingInstance) -> Result<CMatrix> {
    let d = ising_diagonal(instance)?;
    let mut m = CMatrix::zeros(d.len(), d.len());
    for (i, &e) in d.iter().enumerate() {
        m[(i, i)] = Complex64::new(e, 0.0);
    }
    Ok(m)
}

pub fn ising_diagonal(instance: &nisqbound_core::instances::IsingInstance) -> Result<Vec<f64>> {
    use nisqbound_core::instances::SpinConfig;
    let n = instance.n();
    check_cap(n, 16)?;
    (0..1u64 << n)
        .map(|i| Ok(instance.energy(&SpinConfig::from_index(i, n))?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn depolarizing_a_basis_state() {
        let mut rho = DensityMatrix::basis(1, 0);
        rho.depolarize(0, 0.3);
        assert_relative_eq!(rho.matrix()[(0, 0)].re, 0.85, epsilon = 1e-15);
        assert_relative_eq!(rho.matrix()[(1, 1)].re, 0.15, epsilon = 1e-15);
    }

    #[test]
    fn depolarizing_acts_locally() {
        // on |00>, depolarizing qubit 1 leaves qubit 0 pure
        let mut rho = DensityMatrix::basis(2, 0);
        rho.depolarize(1, 1.0);
        let p = rho.diagonal_probabilities();
        assert_relative_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(p[2], 0.5, epsilon = 1e-15);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn local_unitary_matches_embedding() {
        let x = pauli_x();
        let mut rho = DensityMatrix::basis(3, 0);
        rho.apply_local_unitary(&x, &[1]).unwrap();
        assert_relative_eq!(rho.matrix()[(2, 2)].re, 1.0);
        let cnot = CMatrix::from_fn(4, 4, |r, c| {
            // control = bit 0, target = bit 1
            let target = if c & 1 == 1 { c ^ 2 } else { c };
            if r == target { ONE } else { ZERO }
        });
        let full = embed(3, &cnot, &[2, 0]);
        let mut a = DensityMatrix::plus_state(3);
        let mut b = a.clone();
        a.apply_local_unitary(&cnot, &[2, 0]).unwrap();
        b.apply_unitary(&full);
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-14);
    }

    #[test]
    fn validation() {
        let m = CMatrix::identity(2, 2);
        assert!(DensityMatrix::from_matrix(1, m).is_err());
        let ok = DensityMatrix::from_matrix(1, qubit_diagonal(0.3)).unwrap();
        assert_relative_eq!(ok.purity(), 0.58, epsilon = 1e-15);
        assert!(DensityMatrix::from_matrix(1, qubit_diagonal(1.2)).is_err());
        let mut bad = DensityMatrix::maximally_mixed(1);
        assert!(bad.apply_local_unitary(&pauli_x(), &[1]).is_err());
    }
}
