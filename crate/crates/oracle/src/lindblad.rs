//! Fourth-order Runge-Kutta integration of the noisy annealer master equation
//!
//! `d rho/dt = -i [H_s, rho] + sum_k r1 D_amp,k + r2 D_deph,k + r3 D_ctrl,k`
//!
//! with `D_amp(rho) = L rho L^dag - {L^dag L, rho}/2` for `L = |0><1|`,
//! `D_deph(rho) = (Z rho Z - rho)/2` and `D_ctrl(rho) = X rho X + Z rho Z - 2 rho`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nisqbound_core::annealer::{ContinuousNoise, Schedule};
use nisqbound_core::instances::IsingInstance;

use crate::density::{ising_diagonal, left_apply, pauli_x, pauli_z, DensityMatrix};
use crate::error::{check_cap, invalid, Error, Result};
use crate::linalg::{max_abs, CMatrix};
use crate::LINDBLAD_CAP;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest trace drift per step tolerated before renormalizing.
const DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Largest per-step trace drift removed by renormalization.
    pub max_drift: f64,
    /// Max-entry difference of the final state against a run at `dt/2`.
    pub error_estimate: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory holds the initial state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladOptions {
    pub dt: f64,
    /// Record every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
    /// Repeat the run at `dt/2` and report the difference.
    pub estimate_error: bool,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self { dt: 1e-2, record_every: usize::MAX, estimate_error: false }
    }
}

struct Generator {
    n: usize,
    energies: Vec<f64>,
    transverse: Vec<f64>,
    noise: ContinuousNoise,
    x: CMatrix,
    z: CMatrix,
    lower: CMatrix,
}

impl Generator {
    fn new(instance: &IsingInstance, schedule: &Schedule, noise: &ContinuousNoise) -> Result<Self> {
        let n = instance.n();
        if schedule.n() != n {
            return Err(invalid("schedule and instance sizes differ"));
        }
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        Ok(Self {
            n,
            energies: ising_diagonal(instance)?,
            transverse: schedule.transverse.clone(),
            noise: *noise,
            x: pauli_x(),
            z: pauli_z(),
            lower: CMatrix::from_row_slice(2, 2, &[zero, one, zero, zero]),
        })
    }

    /// `O rho O^dag` for a single-qubit operator on qubit `k`.
    fn sandwich(&self, op: &CMatrix, rho: &CMatrix, k: usize) -> CMatrix {
        let a = left_apply(rho, op, &[k]);
        left_apply(&a.adjoint(), op, &[k]).adjoint()
    }

    fn apply(&self, rho: &CMatrix, g0: f64, gi: f64) -> CMatrix {
        let dim = rho.nrows();
        let i = Complex64::new(0.0, 1.0);
        // diagonal part of -i[H, rho]
        let mut out = CMatrix::from_fn(dim, dim, |r, c| -i * gi * (self.energies[r] - self.energies[c]) * rho[(r, c)]);
        let ContinuousNoise { r1, r2, r3 } = self.noise;
        for k in 0..self.n {
            let g = g0 * self.transverse[k];
            if g != 0.0 {
                // H_0 = -sum Gamma_k X_k
                let xr = left_apply(rho, &self.x, &[k]);
                let rx = xr.adjoint();
                out += (xr - rx) * (i * g);
            }
            if r1 != 0.0 || r3 != 0.0 || r2 != 0.0 {
                let zrz = self.sandwich(&self.z, rho, k);
                if r1 != 0.0 {
                    let lrl = self.sandwich(&self.lower, rho, k);
                    // L^dag L = |1><1| = (I - Z)/2
                    let zr = left_apply(rho, &self.z, &[k]);
                    let anti = rho - (&zr + zr.adjoint()) * c(0.5);
                    out += (lrl - anti * c(0.5)) * c(r1);
                }
                if r2 != 0.0 {
                    out += (&zrz - rho) * c(0.5 * r2);
                }
                if r3 != 0.0 {
                    let xrx = self.sandwich(&self.x, rho, k);
                    out += (xrx + &zrz - rho * c(2.0)) * c(r3);
                }
            }
        }
        out
    }
}

/// Integrates from `rho0` over `[0, T]` along `schedule`.
pub fn lindblad_evolve(
    instance: &IsingInstance,
    schedule: &Schedule,
    noise: &ContinuousNoise,
    options: &LindbladOptions,
    rho0: &DensityMatrix,
) -> Result<Trajectory> {
    check_cap(instance.n(), LINDBLAD_CAP)?;
    if !(options.dt > 0.0) || options.record_every == 0 {
        return Err(invalid("dt must be positive and record_every at least 1"));
    }
    if rho0.n() != instance.n() {
        return Err(invalid("state and instance sizes differ"));
    }
    let generator = Generator::new(instance, schedule, noise)?;
    let mut traj = integrate(&generator, schedule, options.dt, options.record_every, rho0)?;
    if options.estimate_error {
        let fine = integrate(&generator, schedule, options.dt / 2.0, usize::MAX, rho0)?;
        traj.error_estimate = Some(max_abs(&(traj.final_state().matrix() - fine.final_state().matrix())));
    }
    Ok(traj)
}

fn integrate(gen: &Generator, schedule: &Schedule, dt: f64, record_every: usize, rho0: &DensityMatrix) -> Result<Trajectory> {
    let total = schedule.total_time;
    let steps = (total / dt).ceil().max(0.0) as usize;
    let h = if steps > 0 { total / steps as f64 } else { 0.0 };
    let coeffs = |t: f64| {
        if total > 0.0 {
            schedule.modulation.at((t / total).clamp(0.0, 1.0))
        } else {
            schedule.modulation.at(1.0)
        }
    };
    let mut rho = rho0.clone();
    let mut traj = Trajectory { times: vec![0.0], states: vec![rho0.clone()], max_drift: 0.0, error_estimate: None };
    for step in 0..steps {
        let t = step as f64 * h;
        let m = rho.matrix();
        let eval = |tt: f64, r: &CMatrix| {
            let (g0, gi) = coeffs(tt);
            gen.apply(r, g0, gi)
        };
        let k1 = eval(t, m);
        let k2 = eval(t + h / 2.0, &(m + &k1 * c(h / 2.0)));
        let k3 = eval(t + h / 2.0, &(m + &k2 * c(h / 2.0)));
        let k4 = eval(t + h, &(m + &k3 * c(h)));
        let next = m + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
        rho = DensityMatrix::from_raw(rho.n(), next);
        let drift = rho.renormalize();
        if drift > DRIFT_LIMIT || !drift.is_finite() {
            return Err(Error::Unstable { drift, time: t + h, suggested_dt: h / 4.0 });
        }
        traj.max_drift = traj.max_drift.max(drift);
        if (step + 1) % record_every == 0 || step + 1 == steps {
            traj.times.push(t + h);
            traj.states.push(rho.clone());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::qubit_diagonal;
    use nisqbound_core::annealer::{fixed_point, Modulation};

    fn idle(n: usize, t: f64) -> (IsingInstance, Schedule) {
        let inst = IsingInstance::new(n, vec![], vec![0.0; n]).unwrap();
        let sched = Schedule::new(t, Modulation::Linear, vec![0.0; n], false).unwrap();
        (inst, sched)
    }

    #[test]
    fn amplitude_damping_relaxes_to_ground() {
        let (inst, sched) = idle(1, 20.0);
        let noise = ContinuousNoise::new(1.0, 0.0, 0.0).unwrap();
        let opts = LindbladOptions { dt: 0.01, ..Default::default() };
        let traj = lindblad_evolve(&inst, &sched, &noise, &opts, &DensityMatrix::basis(1, 1)).unwrap();
        let p = traj.final_state().diagonal_probabilities();
        assert!((p[0] - 1.0).abs() < 1e-8, "{p:?}");
    }

    #[test]
    fn converges_to_the_noise_fixed_point() {
        let (inst, sched) = idle(2, 60.0);
        for (r1, r3) in [(0.3, 0.2), (0.0, 0.5), (1.0, 0.1)] {
            let noise = ContinuousNoise::new(r1, 0.4, r3).unwrap();
            let fp = fixed_point(&noise).unwrap();
            let opts = LindbladOptions { dt: 0.02, ..Default::default() };
            let traj = lindblad_evolve(&inst, &sched, &noise, &opts, &DensityMatrix::plus_state(2)).unwrap();
            let target = DensityMatrix::product(&qubit_diagonal(fp.p0), 2);
            let diff = max_abs(&(traj.final_state().matrix() - target.matrix()));
            assert!(diff < 1e-8, "({r1}, {r3}): {diff}");
        }
    }

    #[test]
    fn unitary_part_preserves_purity() {
        let inst = IsingInstance::new(2, vec![(0, 1, 0.7)], vec![0.3, -0.2]).unwrap();
        let sched = Schedule::linear(3.0, vec![1.0, 0.5]).unwrap();
        let noise = ContinuousNoise::new(0.0, 0.0, 0.0).unwrap();
        let opts = LindbladOptions { dt: 1e-3, estimate_error: true, ..Default::default() };
        let traj = lindblad_evolve(&inst, &sched, &noise, &opts, &DensityMatrix::plus_state(2)).unwrap();
        assert!((traj.final_state().purity() - 1.0).abs() < 1e-9);
        assert!(traj.error_estimate.unwrap() < 1e-10);
    }

    #[test]
    fn huge_steps_are_rejected() {
        let (inst, sched) = idle(1, 10.0);
        let noise = ContinuousNoise::new(50.0, 0.0, 50.0).unwrap();
        let opts = LindbladOptions { dt: 1.0, ..Default::default() };
        let err = lindblad_evolve(&inst, &sched, &noise, &opts, &DensityMatrix::basis(1, 1)).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
    }
}
