//! Layer-by-layer check of the data-processing bound for noisy circuits
//! whose noise has a product fixed point `sigma = q^{(x) n}`:
//!
//! `D(rho_m || sigma) <= prod (1 - alpha) D(rho_0 || sigma)
//!     + sum_t (1 - alpha)^{m - t + 1} D_inf(U_t sigma U_t^dag || sigma)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{for_each_noisy_layer, layer_noise, CircuitSpec};
use crate::density::DensityMatrix;
use crate::error::{check_cap, invalid, Result};
use crate::linalg::{max_abs, max_relative_entropy, relative_entropy, CMatrix};
use crate::DENSE_CAP;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCheck {
    pub layer: usize,
    /// `D(rho_t || sigma)` in bits.
    pub measured: f64,
    /// Right-hand side after `t` layers, in bits.
    pub bound: f64,
    /// `D_inf(U_t sigma U_t^dag || sigma)` in bits.
    pub d_inf: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `D(rho_0 || sigma)` in bits.
    pub initial: f64,
    /// Contraction constant used for each layer.
    pub alpha: Vec<f64>,
    pub layers: Vec<LayerCheck>,
    pub min_margin: f64,
}

/// Contraction constant of `rho -> (1 - p) rho + p tr_k(rho) (x) q` applied on
/// every qubit, relative to `q^{(x) n}`: `1 - (1 - p)^2` for `q = I/2`
/// and `p` otherwise.
pub fn contraction_constant(p: f64, q: &CMatrix) -> f64 {
    let half = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
    if max_abs(&(q - half)) < 1e-15 {
        1.0 - (1.0 - p) * (1.0 - p)
    } else {
        p
    }
}

/// Runs `circuit` from `rho0` with per-qubit noise toward `q` and compares
/// both sides of the bound after every layer.
pub fn verify_contraction(rho0: &DensityMatrix, circuit: &CircuitSpec, noise: &[f64], q: &CMatrix) -> Result<ContractionReport> {
    let n = circuit.n();
    check_cap(n, DENSE_CAP)?;
    if q.nrows() != 2 || q.ncols() != 2 {
        return Err(invalid("single-qubit fixed point must be 2x2"));
    }
    let sigma = DensityMatrix::from_matrix(1, q.clone())
        .map(|s| DensityMatrix::product(s.matrix(), n))?;
    let ps = layer_noise(noise, circuit.depth())?;
    let alpha: Vec<f64> = ps.iter().map(|&p| contraction_constant(p, q)).collect();

    let mut d_inf = Vec::with_capacity(circuit.depth());
    for layer in circuit.layers() {
        let mut moved = sigma.clone();
        for gate in &layer.gates {
            moved.apply_local_unitary(&gate.unitary, &gate.wires)?;
        }
        d_inf.push(max_relative_entropy(&moved, &sigma)?.max(0.0));
    }

    let initial = relative_entropy(rho0, &sigma)?;
    let mut bound = initial;
    let mut layers = Vec::with_capacity(circuit.depth());
    let mut rho = rho0.clone();
    for_each_noisy_layer(circuit, &ps, q, &mut rho, |t, state| {
        bound = (1.0 - alpha[t]) * (bound + d_inf[t]);
        let measured = relative_entropy(state, &sigma)?;
        layers.push(LayerCheck { layer: t + 1, measured, bound, d_inf: d_inf[t], margin: bound - measured });
        Ok(())
    })?;
    let min_margin = layers.iter().map(|l| l.margin).fold(f64::INFINITY, f64::min);
    Ok(ContractionReport { initial, alpha, layers, min_margin })
}
