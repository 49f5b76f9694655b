//! Closed-form entropy budgets, depth ceilings and noise thresholds.
//!
//! Relative entropies are in bits. Depths are real-valued; callers floor them
//! when an integer layer count is needed.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::Result;

/// Layered depolarizing noise: single-qubit layers (error `p1`, fraction `f1`),
/// two-qubit layers (`p2`, `f2`) and a final measurement error `pm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteNoise {
    pub p1: f64,
    pub p2: f64,
    pub pm: f64,
    pub f1: f64,
    pub f2: f64,
}

impl DiscreteNoise {
    pub fn new(p1: f64, p2: f64, pm: f64, f1: f64, f2: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2), ("pm", pm)] {
            if !(0.0..1.0).contains(&p) {
                return Err(invalid(format!("{name} = {p} must lie in [0, 1)")));
            }
        }
        if f1 < 0.0 || f2 < 0.0 || (f1 + f2 - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("layer fractions ({f1}, {f2}) must be >= 0 and sum to 1")));
        }
        Ok(Self { p1, p2, pm, f1, f2 })
    }

    /// Noise rates of the 2019 superconducting-processor experiment with equal
    /// layer fractions.
    pub fn sycamore() -> Self {
        Self { p1: 1.6e-3, p2: 6.2e-3, pm: 3.8e-2, f1: 0.5, f2: 0.5 }
    }

    /// `f1 p1 + f2 p2`.
    pub fn effective_rate(&self) -> f64 {
        self.f1 * self.p1 + self.f2 * self.p2
    }

    /// `f1 (-ln(1-p1)) + f2 (-ln(1-p2))`, the exact per-layer log-contraction.
    pub fn effective_log_rate(&self) -> f64 {
        -(self.f1 * (-self.p1).ln_1p() + self.f2 * (-self.p2).ln_1p())
    }
}

/// Which inequality produced an entropy budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Product depolarizing contraction `n (1-p1)^{2Df1} (1-p2)^{2Df2}`.
    DepolarizingContraction,
    /// Closed form for the noisy linear annealing path.
    LinearPathClosedForm,
    /// Quadrature of the continuous-time contraction integral.
    ScheduleQuadrature,
    /// Measured exactly on a simulated state.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyBudget {
    /// Upper bound on `D(Phi(rho) || sigma)` in bits.
    pub bits: f64,
    pub provenance: Provenance,
}

impl EntropyBudget {
    pub fn new(bits: f64, provenance: Provenance) -> Result<Self> {
        if !(bits >= 0.0) || !bits.is_finite() {
            return Err(invalid(format!("entropy budget {bits} must be finite and >= 0")));
        }
        Ok(Self { bits, provenance })
    }

    pub fn nats(&self) -> f64 {
        self.bits * LN_2
    }
}

/// Depth or time ceiling that may be infinite when there is no noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ceiling {
    Finite(f64),
    Unbounded,
}

impl Ceiling {
    pub fn value(&self) -> Option<f64> {
        match self {
            Ceiling::Finite(v) => Some(*v),
            Ceiling::Unbounded => None,
        }
    }
}

/// Evaluation of the Ising depth ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthForm {
    /// Linearised rates `-ln(1-p) ~ p`, as the closed form is usually quoted.
    Approximate,
    /// Exact per-layer contraction `-ln(1-p)` in place of `p`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dimension: u32,
    pub locality: u32,
    pub strength: f64,
}

impl LatticeSpec {
    pub fn new(dimension: u32, locality: u32, strength: f64) -> Result<Self> {
        if dimension < 1 || locality < 1 || !(strength > 0.0) {
            return Err(invalid("lattice needs d >= 1, kappa >= 1, J > 0"));
        }
        Ok(Self { dimension, locality, strength })
    }

    /// `d^kappa`.
    fn coordination(&self) -> f64 {
        f64::from(self.dimension).powi(self.locality as i32)
    }
}

/// Relative-entropy budget after `depth` noisy layers starting from any state.
pub fn entropy_budget(noise: &DiscreteNoise, depth: f64, n: usize, include_measurement: bool) -> EntropyBudget {
    let depth = depth.max(0.0);
    let log_factor = 2.0 * depth * (noise.f1 * (-noise.p1).ln_1p() + noise.f2 * (-noise.p2).ln_1p());
    let mut bits = n as f64 * log_factor.exp();
    if include_measurement {
        bits *= (1.0 - noise.pm).powi(2);
    }
    EntropyBudget { bits, provenance: Provenance::DepolarizingContraction }
}

/// `ln(||A|| n / ||H_I||)`, the instance-dependent term of the Ising depth ceiling.
pub fn ising_log_term(h_norm: f64, a_norm: f64, n: usize) -> Result<f64> {
    if !(h_norm > 0.0) || !(a_norm > 0.0) || n == 0 {
        return Err(invalid("log term needs ||H_I|| > 0, ||A|| > 0 and n > 0"));
    }
    Ok((a_norm * n as f64 / h_norm).ln())
}

/// Depth beyond which a rapidly mixing Gibbs state matches the noisy output
/// energy to relative error `eps`:
/// `(ln(1/eps) + log_term - pm) / (2 (f1 p1 + f2 p2))`, clamped at 0.
pub fn dmax_ising(noise: &DiscreteNoise, log_term: f64, eps: f64, form: DepthForm) -> Result<Ceiling> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    let (rate, measurement) = match form {
        DepthForm::Approximate => (noise.effective_rate(), noise.pm),
        DepthForm::Exact => (noise.effective_log_rate(), -(-noise.pm).ln_1p()),
    };
    if rate <= 0.0 {
        return Ok(Ceiling::Unbounded);
    }
    let numerator = (1.0 / eps).ln() + log_term - measurement;
    Ok(Ceiling::Finite((numerator / (2.0 * rate)).max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeDepth {
    pub dmax: Ceiling,
    /// Inverse temperature below which the lattice partition function is
    /// classically approximable, `(5 e kappa d^kappa J)^-1`.
    pub beta_c: f64,
}

/// Depth ceiling for `kappa`-local lattice Hamiltonians under depolarizing rate `p`:
/// `ln(20 e / (d^kappa eps)) / (2p)`, clamped at 0.
pub fn dmax_lattice(spec: &LatticeSpec, eps: f64, p: f64) -> Result<LatticeDepth> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(invalid(format!("p = {p} must lie in [0, 1)")));
    }
    let beta_c = 1.0 / (5.0 * E * f64::from(spec.locality) * spec.coordination() * spec.strength);
    let dmax = if p == 0.0 {
        Ceiling::Unbounded
    } else {
        let arg = 20.0 * E / (spec.coordination() * eps);
        Ceiling::Finite((arg.ln() / (2.0 * p)).max(0.0))
    };
    Ok(LatticeDepth { dmax, beta_c })
}

/// Inverse temperature of the Gibbs state matching the noisy output energy.
///
/// `lambda / (||H|| eps)` with `lambda` in nats; the `generalized` form (any
/// fixed point, not only the maximally mixed state) carries an extra factor 4.
pub fn beta_equivalent(budget: &EntropyBudget, h_norm: f64, eps: f64, generalized: bool) -> Result<f64> {
    if !(h_norm > 0.0) || !(eps > 0.0) {
        return Err(invalid("beta_equivalent needs ||H|| > 0 and eps > 0"));
    }
    let factor = if generalized { 4.0 } else { 1.0 };
    Ok(factor * budget.nats() / (h_norm * eps))
}

/// Number of channel applications after which Pinsker's inequality puts every
/// output within trace distance `eps` of the fixed point:
/// smallest `N >= 0` with `(1-alpha)^N D0 ln2 <= 2 eps^2`.
pub fn trace_mixing_depth(alpha: f64, eps: f64, initial_bits: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(initial_bits > 0.0) {
        return Err(invalid("initial relative entropy must be positive"));
    }
    let ratio = initial_bits * LN_2 / (2.0 * eps * eps);
    if ratio <= 1.0 {
        return Ok(0);
    }
    if alpha == 1.0 {
        return Ok(1);
    }
    let steps = (ratio.ln() / -(-alpha).ln_1p()).ceil();
    Ok(steps.max(0.0) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaoaThresholds {
    /// Rounds needed before QAOA can beat a 1/2 approximation ratio on the
    /// hard regular instances: `ln n / ln(degree - 1)`.
    pub min_rounds: f64,
    /// Per-round depolarizing rate above which QAOA never beats polynomial
    /// classical algorithms: `ln(1/eps) ln(degree - 1) / (2 ln n)`.
    pub noise_threshold: f64,
}

pub fn qaoa_thresholds(n: usize, degree: usize, eps: f64) -> Result<QaoaThresholds> {
    if degree < 3 {
        return Err(invalid(format!("degree {degree} must be at least 3")));
    }
    if n < degree + 1 {
        return Err(invalid(format!("n = {n} must be at least degree + 1")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    let ln_n = (n as f64).ln();
    let ln_branch = ((degree - 1) as f64).ln();
    Ok(QaoaThresholds {
        min_rounds: ln_n / ln_branch,
        noise_threshold: (1.0 / eps).ln() * ln_branch / (2.0 * ln_n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationThresholds {
    /// Depth below which the output stays a constant trace distance from a
    /// ground state with correlation length `xi`: `xi / 2`.
    pub min_depth: f64,
    /// Depolarizing rate above which deeper circuits are classically matched:
    /// `2 ln(20 e d^kappa / eps) / xi`.
    pub noise_threshold: f64,
}

pub fn correlation_thresholds(xi: f64, spec: &LatticeSpec, eps: f64) -> Result<CorrelationThresholds> {
    if !(xi > 0.0) {
        return Err(invalid("correlation length must be positive"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    let arg = 20.0 * E * spec.coordination() / eps;
    Ok(CorrelationThresholds { min_depth: xi / 2.0, noise_threshold: 2.0 * arg.ln() / xi })
}
