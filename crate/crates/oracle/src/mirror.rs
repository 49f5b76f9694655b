//! Mirror descent over Gibbs states `sigma_t ∝ exp(log sigma - t eta H)` with
//! `eta = eps / (2 ||H||)`, run until `sigma_t` matches the energy of a target
//! state to within `eps ||H||`.

use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{check_cap, invalid, Result};
use crate::linalg::{eigh, max_abs, hermitian_norm, log_state, CMatrix, LOG_CLAMP};
use crate::DENSE_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorStep {
    pub t: u64,
    /// Total coefficient `t eta` of `H` in the Gibbs exponent.
    pub coefficient: f64,
    /// `tr(H sigma_t)`.
    pub energy: f64,
    /// `tr(H (sigma_t - rho))`.
    pub gap: f64,
    /// `D(rho || sigma_t)` in nats.
    pub relative_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorTrace {
    pub eps: f64,
    pub h_norm: f64,
    pub eta: f64,
    /// `ceil(4 D(rho || sigma) / eps^2)`, with `D` in nats.
    pub step_cap: u64,
    pub steps: Vec<MirrorStep>,
    /// Whether the stop condition was met within `step_cap` updates.
    pub converged: bool,
}

impl MirrorTrace {
    /// Number of updates performed before stopping.
    pub fn updates(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.t)
    }

    /// Smallest decrease `D_t - D_{t+1}` (nats) over the performed updates.
    pub fn min_decrease(&self) -> Option<f64> {
        self.steps
            .windows(2)
            .map(|w| w[0].relative_entropy - w[1].relative_entropy)
            .reduce(f64::min)
    }

    /// Every update decreased the relative entropy by at least `eps^2 / 4` nats.
    pub fn decrease_holds(&self, tol: f64) -> bool {
        self.min_decrease().is_none_or(|d| d >= self.eps * self.eps / 4.0 - tol)
    }
}

/// Runs the updates from `sigma` (full rank) toward the energy of `rho`.
pub fn mirror_descent_trace(rho: &DensityMatrix, h: &CMatrix, eps: f64, sigma: &DensityMatrix) -> Result<MirrorTrace> {
    let n = rho.n();
    check_cap(n, DENSE_CAP)?;
    if sigma.n() != n || h.nrows() != rho.dim() || h.ncols() != rho.dim() {
        return Err(invalid("state, reference and Hamiltonian sizes differ"));
    }
    if max_abs(&(h - h.adjoint())) > 1e-12 {
        return Err(invalid("Hamiltonian is not Hermitian"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid("eps must be positive"));
    }
    let h_norm = hermitian_norm(h);
    if h_norm == 0.0 {
        return Err(invalid("Hamiltonian is zero"));
    }
    let eta = eps / (2.0 * h_norm);
    let h0 = -log_state(sigma)?;
    let (rho_values, _) = eigh(rho.matrix());
    let neg_entropy: f64 = rho_values.iter().filter(|&&v| v > LOG_CLAMP).map(|&v| v * v.ln()).sum();
    let target = rho.expectation(h);

    let step = |t: u64| -> MirrorStep {
        let coefficient = t as f64 * eta;
        let generator = &h0 + h * num_complex::Complex64::new(coefficient, 0.0);
        let (values, vectors) = eigh(&generator);
        // sigma_t = exp(-generator) / Z, shifted by the smallest eigenvalue
        let shift = values[0];
        let weights: Vec<f64> = values.iter().map(|v| (-(v - shift)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let log_z = z.ln() - shift;
        let mut energy = 0.0;
        for (k, w) in weights.iter().enumerate() {
            let v = vectors.column(k);
            let hv = h * v;
            energy += w / z * v.dotc(&hv).re;
        }
        let cross = (rho.matrix() * &generator).trace().re;
        MirrorStep {
            t,
            coefficient,
            energy,
            gap: energy - target,
            relative_entropy: neg_entropy + cross + log_z,
        }
    };

    let first = step(0);
    let step_cap = (4.0 * first.relative_entropy.max(0.0) / (eps * eps)).ceil() as u64;
    let stop = eps * h_norm;
    let mut steps = vec![first];
    let mut converged = first.gap <= stop;
    let mut t = 0;
    while !converged && t < step_cap {
        t += 1;
        let s = step(t);
        converged = s.gap <= stop;
        steps.push(s);
    }
    Ok(MirrorTrace { eps, h_norm, eta, step_cap, steps, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{ising_matrix, pauli_z, embed};
    use nisqbound_core::instances::IsingInstance;
    use num_complex::Complex64;

    #[test]
    fn already_matched_stops_immediately() {
        let h = embed(3, &pauli_z(), &[1]);
        let mixed = DensityMatrix::maximally_mixed(3);
        let tr = mirror_descent_trace(&mixed, &h, 0.1, &mixed).unwrap();
        assert!(tr.converged);
        assert_eq!(tr.updates(), 0);
        assert_eq!(tr.step_cap, 0);
    }

    #[test]
    fn gibbs_target_is_reached() {
        let inst = IsingInstance::new(3, vec![(0, 1, 1.0), (1, 2, -0.5)], vec![0.2, 0.0, 0.3]).unwrap();
        let h = ising_matrix(&inst).unwrap();
        let beta = 1.3;
        let d: Vec<f64> = (0..8).map(|i| (-beta * h[(i, i)].re).exp()).collect();
        let z: f64 = d.iter().sum();
        let rho = DensityMatrix::diagonal(3, &d.iter().map(|w| w / z).collect::<Vec<_>>()).unwrap();
        let mixed = DensityMatrix::maximally_mixed(3);
        let tr = mirror_descent_trace(&rho, &h, 0.05, &mixed).unwrap();
        assert!(tr.converged);
        let last = tr.steps.last().unwrap();
        assert!(last.gap <= 0.05 * tr.h_norm);
        assert!(tr.decrease_holds(1e-12));
        // the path passes through beta within one step
        assert!(last.coefficient <= beta + tr.eta + 1e-12);
    }

    #[test]
    fn relative_entropy_at_start_matches_direct_formula() {
        let h = embed(2, &pauli_z(), &[0]) * Complex64::new(2.0, 0.0);
        let rho = DensityMatrix::basis(2, 3);
        let mixed = DensityMatrix::maximally_mixed(2);
        let tr = mirror_descent_trace(&rho, &h, 0.1, &mixed).unwrap();
        assert!((tr.steps[0].relative_entropy - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(tr.step_cap, (4.0 * 2.0 * std::f64::consts::LN_2 / 0.01f64).ceil() as u64);
        assert!(tr.converged);
        assert!(tr.decrease_holds(1e-12));
    }
}
