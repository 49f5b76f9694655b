//! Layered circuits and their noisy execution.
//!
//! Random circuits use a fixed gate set so that any run can be regenerated
//! from its seed: every layer applies a Haar-random single-qubit unitary to
//! each wire followed by Haar-random two-qubit unitaries on a brickwork of
//! adjacent pairs, `(0,1), (2,3), ...` on even layers and `(1,2), (3,4), ...`
//! on odd layers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use nisqbound_core::rng;

use crate::density::{embed, DensityMatrix};
use crate::error::{check_cap, invalid, Result};
use crate::linalg::{max_abs, CMatrix};
use crate::CIRCUIT_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    /// Only single-qubit gates (counts towards `f1`).
    Single,
    /// Contains two-qubit gates (counts towards `f2`).
    Two,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub wires: Vec<usize>,
    pub unitary: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub gates: Vec<Gate>,
    pub kind: LayerKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    n: usize,
    layers: Vec<Layer>,
}

impl CircuitSpec {
    /// Rejects out-of-range wires, repeated wires within a gate, gates
    /// overlapping within a layer and non-unitary matrices.
    pub fn new(n: usize, layers: Vec<Layer>) -> Result<Self> {
        check_cap(n, CIRCUIT_CAP)?;
        for (t, layer) in layers.iter().enumerate() {
            let mut used = vec![false; n];
            for gate in &layer.gates {
                let w = gate.wires.len();
                if !(1..=2).contains(&w) {
                    return Err(invalid(format!("layer {t}: gates act on one or two wires")));
                }
                if gate.unitary.nrows() != 1 << w || gate.unitary.ncols() != 1 << w {
                    return Err(invalid(format!("layer {t}: gate matrix size does not match its wires")));
                }
                let defect = max_abs(&(&gate.unitary * gate.unitary.adjoint() - CMatrix::identity(1 << w, 1 << w)));
                if defect > 1e-10 {
                    return Err(invalid(format!("layer {t}: gate is not unitary")));
                }
                for &x in &gate.wires {
                    if x >= n {
                        return Err(invalid(format!("layer {t}: wire {x} out of range")));
                    }
                    if used[x] {
                        return Err(invalid(format!("layer {t}: wire {x} used twice")));
                    }
                    used[x] = true;
                }
            }
        }
        Ok(Self { n, layers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Full-register unitary of layer `t`.
    pub fn layer_unitary(&self, t: usize) -> CMatrix {
        let dim = 1usize << self.n;
        let mut u = CMatrix::identity(dim, dim);
        for gate in &self.layers[t].gates {
            u = embed(self.n, &gate.unitary, &gate.wires) * u;
        }
        u
    }
}

/// Haar-random `dim x dim` unitary (QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal divided out).
pub fn haar_unitary(dim: usize, rng: &mut rng::Rng) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for x in q.column_mut(c).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Random circuit of `depth` layers on `n` wires (see module docs).
pub fn random_brickwork(n: usize, depth: usize, seed: u64) -> Result<CircuitSpec> {
    check_cap(n, CIRCUIT_CAP)?;
    let mut rng = rng::seeded(seed);
    let mut layers = Vec::with_capacity(depth);
    for t in 0..depth {
        let mut singles = Vec::with_capacity(n);
        for w in 0..n {
            singles.push(Gate { wires: vec![w], unitary: haar_unitary(2, &mut rng) });
        }
        let mut gates: Vec<Gate> = Vec::new();
        let mut paired = vec![false; n];
        let mut a = t % 2;
        while a + 1 < n {
            paired[a] = true;
            paired[a + 1] = true;
            let g = haar_unitary(4, &mut rng);
            // absorb the single-qubit rotations of both wires into the pair gate
            let local = singles[a + 1].unitary.kronecker(&singles[a].unitary);
            gates.push(Gate { wires: vec![a, a + 1], unitary: g * local });
            a += 2;
        }
        for (w, single) in singles.into_iter().enumerate() {
            if !paired[w] {
                gates.push(single);
            }
        }
        let kind = if n >= 2 { LayerKind::Two } else { LayerKind::Single };
        layers.push(Layer { gates, kind });
    }
    CircuitSpec::new(n, layers)
}

/// Per-layer noise strengths: one value for all layers or one per layer.
pub(crate) fn layer_noise(noise: &[f64], depth: usize) -> Result<Vec<f64>> {
    let out = match noise.len() {
        1 => vec![noise[0]; depth],
        l if l == depth => noise.to_vec(),
        _ => return Err(invalid("give one noise value or one per layer")),
    };
    if out.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid("noise strengths must lie in [0, 1]"));
    }
    Ok(out)
}

/// Each layer's unitary followed by depolarizing noise on every qubit.
pub fn run_noisy_circuit(circuit: &CircuitSpec, noise: &[f64], rho0: &DensityMatrix) -> Result<DensityMatrix> {
    let half = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
    run_noisy_circuit_toward(circuit, noise, &half, rho0)
}

/// As [`run_noisy_circuit`] with the generalized channel
/// `rho -> (1 - p) rho + p tr_k(rho) (x) q` on every qubit `k`.
pub fn run_noisy_circuit_toward(
    circuit: &CircuitSpec,
    noise: &[f64],
    q: &CMatrix,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    let mut rho = rho0.clone();
    for_each_noisy_layer(circuit, noise, q, &mut rho, |_, _| Ok(()))?;
    Ok(rho)
}

/// Runs the noisy circuit calling `visit(t, state)` after each layer `t`.
pub(crate) fn for_each_noisy_layer(
    circuit: &CircuitSpec,
    noise: &[f64],
    q: &CMatrix,
    rho: &mut DensityMatrix,
    mut visit: impl FnMut(usize, &DensityMatrix) -> Result<()>,
) -> Result<()> {
    if rho.n() != circuit.n() {
        return Err(invalid("state and circuit sizes differ"));
    }
    let ps = layer_noise(noise, circuit.depth())?;
    for (t, layer) in circuit.layers().iter().enumerate() {
        for gate in &layer.gates {
            rho.apply_local_unitary(&gate.unitary, &gate.wires)?;
        }
        if ps[t] > 0.0 {
            for k in 0..circuit.n() {
                rho.replace_toward(k, ps[t], q);
            }
        }
        visit(t, rho)?;
    }
    Ok(())
}
