//! Entropy bounds for continuous-time noisy annealers.
//!
//! Each qubit undergoes amplitude damping (rate `r1`), dephasing (`r2`) and
//! white control noise (`r3`). The noise drives every qubit towards
//! `sigma_gamma = e^{gamma Z} / (2 cosh gamma)` with log-Sobolev rate
//! `alpha = r1 + 2 r3`; dephasing does not enter either quantity.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::bounds::{EntropyBudget, Provenance};
use crate::error::invalid;
use crate::partition::ln_two_cosh;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousNoise {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl ContinuousNoise {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        for (name, r) in [("r1", r1), ("r2", r2), ("r3", r3)] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(invalid(format!("{name} = {r} must be finite and >= 0")));
            }
        }
        Ok(Self { r1, r2, r3 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointParams {
    /// Bias of the fixed point; `f64::INFINITY` when it is the pure state `|0>`.
    pub gamma: f64,
    pub alpha: f64,
    pub p0: f64,
    pub p1: f64,
}

impl FixedPointParams {
    pub fn is_pure(&self) -> bool {
        self.gamma.is_infinite()
    }

    /// Per-qubit relative entropy of `|+><+|` to the fixed point, in nats.
    pub fn initial_entropy(&self) -> Result<f64> {
        if self.is_pure() {
            return Err(invalid("fixed point is pure; relative entropy to it is unbounded"));
        }
        Ok(ln_two_cosh(self.gamma))
    }
}

pub fn fixed_point(noise: &ContinuousNoise) -> Result<FixedPointParams> {
    let alpha = noise.r1 + 2.0 * noise.r3;
    if alpha <= 0.0 {
        return Err(invalid("r1 + 2 r3 must be positive for the noise to contract"));
    }
    if noise.r3 == 0.0 {
        return Ok(FixedPointParams { gamma: f64::INFINITY, alpha, p0: 1.0, p1: 0.0 });
    }
    let p0 = (noise.r1 + noise.r3) / alpha;
    Ok(FixedPointParams { gamma: 0.5 * (noise.r1 / noise.r3).ln_1p(), alpha, p0, p1: 1.0 - p0 })
}

/// `1 - e^{-x}(1 + x)`, accurate for small `x`.
fn u(x: f64) -> f64 {
    if x < 0.1 {
        // sum_{k>=2} (-1)^k (k-1) x^k / k!
        let mut term = x * x / 2.0;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) || k < 4.0 {
            sum += (k - 1.0) * term;
            k += 1.0;
            term *= -x / k;
        }
        sum
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    }
}

/// Per-qubit relative-entropy density (nats) after time `t` on the linear path
/// `H_s = (1 - s/T) H_0 + (s/T) H_I` with mean transverse field `gbar`:
/// `e^{-rT} ln(2 cosh gamma) + 2 sinh(gamma) gbar T u(rT) / (rT)^2`.
pub fn linear_path_density(gamma: f64, r: f64, t: f64, gbar: f64) -> f64 {
    let x = r * t;
    let head = (-x).exp() * ln_two_cosh(gamma);
    if t == 0.0 {
        return head;
    }
    // T u(x)/x^2 -> T/2 as x -> 0
    let tail = if x == 0.0 { t / 2.0 } else { t * u(x) / (x * x) };
    head + 2.0 * gamma.sinh() * gbar * tail
}

pub fn linear_path_bound(noise: &ContinuousNoise, gbar: f64, t: f64, n: usize) -> Result<EntropyBudget> {
    if !(t >= 0.0) || !(gbar >= 0.0) {
        return Err(invalid("time and transverse field must be >= 0"));
    }
    let fp = fixed_point(noise)?;
    fp.initial_entropy()?;
    let f = linear_path_density(fp.gamma, fp.alpha, t, gbar);
    EntropyBudget::new(n as f64 * f / LN_2, Provenance::LinearPathClosedForm)
}

/// Modulation of the Hamiltonian in the normalized time `u = s/T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    /// `g0 = 1 - u`, `gI = u`.
    Linear,
    /// Piecewise-linear table of `(u, g0, gI)` with `u` running from 0 to 1.
    Table(Vec<(f64, f64, f64)>),
}

impl Modulation {
    /// `(g0(u), gI(u))`.
    pub fn at(&self, u: f64) -> (f64, f64) {
        match self {
            Modulation::Linear => (1.0 - u, u),
            Modulation::Table(rows) => {
                let i = rows.partition_point(|r| r.0 <= u).clamp(1, rows.len() - 1);
                let (a, b) = (rows[i - 1], rows[i]);
                let w = if b.0 > a.0 { ((u - a.0) / (b.0 - a.0)).clamp(0.0, 1.0) } else { 1.0 };
                (a.1 + w * (b.1 - a.1), a.2 + w * (b.2 - a.2))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Modulation::Table(rows) = self {
            if rows.len() < 2 || rows[0].0 != 0.0 || rows[rows.len() - 1].0 != 1.0 {
                return Err(invalid("modulation table must span u = 0 to u = 1"));
            }
            if rows.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(invalid("modulation table must be strictly increasing in u"));
            }
            if rows.iter().any(|r| !r.1.is_finite() || !r.2.is_finite()) {
                return Err(invalid("modulation values must be finite"));
            }
        }
        Ok(())
    }
}

/// Annealing schedule `H_s = gI(s/T) H_I + g0(s/T) H_0` with
/// `H_0 = -sum_i Gamma_i X_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub total_time: f64,
    pub modulation: Modulation,
    pub transverse: Vec<f64>,
}

impl Schedule {
    /// With `strict_endpoints`, also requires `g0(0) > 0` and `gI(0) = 0`.
    pub fn new(total_time: f64, modulation: Modulation, transverse: Vec<f64>, strict_endpoints: bool) -> Result<Self> {
        if !(total_time >= 0.0) || !total_time.is_finite() {
            return Err(invalid("total time must be finite and >= 0"));
        }
        if transverse.is_empty() || transverse.iter().any(|g| !g.is_finite()) {
            return Err(invalid("transverse fields must be finite and non-empty"));
        }
        modulation.validate()?;
        if strict_endpoints {
            let (g0, gi) = modulation.at(0.0);
            if !(g0 > 0.0) || gi != 0.0 {
                return Err(invalid("schedule must start with g0 > 0 and gI = 0"));
            }
        }
        Ok(Self { total_time, modulation, transverse })
    }

    pub fn linear(total_time: f64, transverse: Vec<f64>) -> Result<Self> {
        Self::new(total_time, Modulation::Linear, transverse, true)
    }

    pub fn n(&self) -> usize {
        self.transverse.len()
    }

    /// Mean transverse field strength.
    pub fn mean_transverse(&self) -> f64 {
        self.transverse.iter().map(|g| g.abs()).sum::<f64>() / self.n() as f64
    }
}

/// `e^{-alpha T} n ln(2 cosh gamma) + int_0^T e^{-alpha (T - tau)} |g0(tau)| sum|Gamma_i| 2 sinh(gamma) dtau`
/// by composite Simpson with spacing at most `step`; returned in bits.
pub fn schedule_bound(schedule: &Schedule, noise: &ContinuousNoise, step: f64) -> Result<EntropyBudget> {
    if !(step > 0.0) {
        return Err(invalid("quadrature step must be positive"));
    }
    let fp = fixed_point(noise)?;
    let n = schedule.n() as f64;
    let t = schedule.total_time;
    let initial = n * fp.initial_entropy()?;
    let weight = schedule.transverse.iter().map(|g| g.abs()).sum::<f64>() * 2.0 * fp.gamma.sinh();
    let mut integral = 0.0;
    if t > 0.0 && weight != 0.0 {
        let mut m = (t / step).ceil() as usize;
        m += m % 2;
        let m = m.max(2);
        let h = t / m as f64;
        let integrand = |i: usize| {
            let tau = i as f64 * h;
            (-fp.alpha * (t - tau)).exp() * schedule.modulation.at(tau / t).0.abs()
        };
        let mut sum = integrand(0) + integrand(m);
        for i in 1..m {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i);
        }
        integral = weight * sum * h / 3.0;
    }
    let nats = (-fp.alpha * t).exp() * initial + integral;
    EntropyBudget::new(nats / LN_2, Provenance::ScheduleQuadrature)
}

/// `4 ||A|| n eps / ||H_I||`, the per-qubit density below which the noisy
/// annealer output is matched by a rapidly mixing classical Gibbs state.
pub fn realm_threshold(a_norm: f64, n: usize, h_norm: f64, eps: f64) -> Result<f64> {
    if !(a_norm > 0.0) || !(h_norm > 0.0) || n == 0 || !(eps > 0.0) {
        return Err(invalid("threshold needs ||A|| > 0, ||H_I|| > 0, n > 0 and eps > 0"));
    }
    Ok(4.0 * a_norm * n as f64 * eps / h_norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealmTime {
    /// Already classical at `T = 0`.
    Immediate,
    /// Annealing times beyond this are classically simulable.
    At(f64),
    /// No time up to the search limit qualifies.
    Never,
}

/// Smallest annealing time `T` on the linear path with per-qubit density
/// `f(T) <= threshold` (nats), to relative tolerance `1e-6`.
pub fn classical_realm_time(noise: &ContinuousNoise, gbar: f64, threshold: f64) -> Result<RealmTime> {
    if !(threshold > 0.0) {
        return Err(invalid("threshold must be positive"));
    }
    if !(gbar >= 0.0) {
        return Err(invalid("transverse field must be >= 0"));
    }
    let fp = fixed_point(noise)?;
    fp.initial_entropy()?;
    let f = |t: f64| linear_path_density(fp.gamma, fp.alpha, t, gbar);
    if f(0.0) <= threshold {
        return Ok(RealmTime::Immediate);
    }
    let mut lo = 0.0;
    let mut hi = 1e-3 / fp.alpha;
    while f(hi) > threshold {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 / fp.alpha {
            return Ok(RealmTime::Never);
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RealmTime::At(hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealmRow {
    pub t: f64,
    pub budget_bits_per_qubit: f64,
    pub poly_threshold: f64,
    pub classical: bool,
}

/// Per-qubit budget (bits) against the threshold (bits) over annealing times.
pub fn realm_curve(noise: &ContinuousNoise, gbar: f64, threshold: f64, times: &[f64]) -> Result<Vec<RealmRow>> {
    let fp = fixed_point(noise)?;
    fp.initial_entropy()?;
    Ok(times
        .iter()
        .map(|&t| {
            let f = linear_path_density(fp.gamma, fp.alpha, t, gbar);
            RealmRow { t, budget_bits_per_qubit: f / LN_2, poly_threshold: threshold / LN_2, classical: f <= threshold }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn noise(r1: f64, r3: f64) -> ContinuousNoise {
        ContinuousNoise::new(r1, 0.0, r3).unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        let fp = fixed_point(&noise(0.0, 0.1)).unwrap();
        assert_eq!((fp.p0, fp.p1, fp.gamma), (0.5, 0.5, 0.0));
        let fp = fixed_point(&noise(0.3, 0.3)).unwrap();
        assert_relative_eq!(fp.p0, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(fp.p1, 1.0 / 3.0, max_relative = 1e-14);
        // p0/p1 = e^{2 gamma}
        assert_relative_eq!((2.0 * fp.gamma).exp(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(fp.alpha, 0.9, max_relative = 1e-15);
        let fp = fixed_point(&noise(1e-2, 1.0)).unwrap();
        assert!((fp.gamma - 4.9752e-3).abs() < 1e-7);
        let fp = fixed_point(&noise(0.2, 0.0)).unwrap();
        assert!(fp.is_pure());
        assert!(fp.initial_entropy().is_err());
        assert!(fixed_point(&ContinuousNoise::new(0.0, 1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn u_series_and_direct_agree() {
        for x in [0.099f64, 0.1, 0.101] {
            let direct = -(-x).exp_m1() - x * (-x).exp();
            assert_relative_eq!(u(x), direct, max_relative = 1e-12);
        }
        assert_relative_eq!(u(1e-8), 0.5e-16, max_relative = 1e-7);
    }

    #[test]
    fn density_limits() {
        let g = 0.3;
        assert_eq!(linear_path_density(g, 0.05, 0.0, 1.0), ln_two_cosh(g));
        let small = linear_path_density(g, 0.05, 1e-9, 1.0);
        assert_relative_eq!(small, ln_two_cosh(g), max_relative = 1e-8);
        assert!(linear_path_density(g, 0.05, 1e7, 1.0) < 1e-3);
        let b = linear_path_bound(&noise(0.0, 0.1), 1.0, 0.0, 5).unwrap();
        assert_relative_eq!(b.bits, 5.0, max_relative = 1e-15);
    }

    #[test]
    fn density_matches_independent_quadrature() {
        // r = 0.02, gamma = 0.005, gbar = 1, T = 100: trapezoid on a fine grid
        let (r, g, t) = (0.02, 0.005, 100.0);
        let m = 2_000_000;
        let h = t / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let tau = i as f64 * h;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            s += w * (-r * (t - tau)).exp() * (1.0 - tau / t);
        }
        let expected = (-r * t).exp() * ln_two_cosh(g) + 2.0 * g.sinh() * s * h;
        assert_relative_eq!(linear_path_density(g, r, t, 1.0), expected, max_relative = 1e-6);
    }

    #[test]
    fn quadrature_reproduces_closed_form() {
        let nz = noise(2e-4, 2e-2);
        let fp = fixed_point(&nz).unwrap();
        for t in [1.0, 50.0, 200.0, 1000.0] {
            let sched = Schedule::linear(t, vec![1.0; 6]).unwrap();
            let q = schedule_bound(&sched, &nz, t / 1e4).unwrap();
            let c = linear_path_bound(&nz, 1.0, t, 6).unwrap();
            assert_relative_eq!(q.bits, c.bits, max_relative = 1e-6);
            let coarse = schedule_bound(&sched, &nz, t / 5e3).unwrap();
            assert!((coarse.bits - q.bits).abs() < 1e-6 * q.bits);
            let _ = fp;
        }
    }

    #[test]
    fn schedule_special_cases() {
        let nz = noise(0.05, 0.1);
        let fp = fixed_point(&nz).unwrap();
        let off = Schedule::new(30.0, Modulation::Table(vec![(0.0, 0.0, 0.0), (1.0, 0.0, 1.0)]), vec![1.0; 4], false)
            .unwrap();
        let b = schedule_bound(&off, &nz, 0.1).unwrap();
        assert_relative_eq!(b.bits, (-fp.alpha * 30.0).exp() * 4.0 * ln_two_cosh(fp.gamma) / LN_2, max_relative = 1e-14);
        let unbiased = noise(0.0, 0.1);
        let b = schedule_bound(&Schedule::linear(10.0, vec![2.0; 3]).unwrap(), &unbiased, 0.01).unwrap();
        assert_relative_eq!(b.bits, (-0.2f64 * 10.0).exp() * 3.0, max_relative = 1e-14);
        assert!(schedule_bound(&off, &nz, 0.0).is_err());
        assert!(Schedule::new(1.0, Modulation::Table(vec![(0.0, 0.0, 0.0), (1.0, 0.0, 1.0)]), vec![1.0], true).is_err());
    }

    #[test]
    fn table_interpolates() {
        let m = Modulation::Table(vec![(0.0, 1.0, 0.0), (0.5, 0.5, 0.2), (1.0, 0.0, 1.0)]);
        assert_eq!(m.at(0.25), (0.75, 0.1));
        assert_eq!(m.at(1.0), (0.0, 1.0));
        assert_eq!(m.at(0.0), (1.0, 0.0));
    }

    #[test]
    fn realm_time_cases() {
        let nz = noise(2e-4, 2e-2);
        assert_eq!(classical_realm_time(&nz, 1.0, 1.0).unwrap(), RealmTime::Immediate);
        // no transverse field: pure exponential decay
        let fp = fixed_point(&nz).unwrap();
        let thr = 0.01;
        match classical_realm_time(&nz, 0.0, thr).unwrap() {
            RealmTime::At(t) => {
                assert_relative_eq!(t, (ln_two_cosh(fp.gamma) / thr).ln() / fp.alpha, max_relative = 2e-6)
            }
            other => panic!("{other:?}"),
        }
        assert!(classical_realm_time(&nz, 1.0, 0.0).is_err());
    }

    #[test]
    fn realm_curve_flags() {
        let nz = noise(2e-4, 2e-2);
        let rows = realm_curve(&nz, 1.0, 0.04, &[0.0, 50.0, 500.0]).unwrap();
        assert!(!rows[0].classical);
        assert!(rows[2].classical);
        assert_relative_eq!(rows[0].poly_threshold, 0.04 / LN_2, max_relative = 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn density_nonnegative_and_decays(r1 in 0.0..1.0f64, r3 in 1e-3..1.0f64, gbar in 0.0..5.0f64, t in 0.0..1e3f64) {
                let fp = fixed_point(&noise(r1, r3)).unwrap();
                let f = linear_path_density(fp.gamma, fp.alpha, t, gbar);
                prop_assert!(f >= 0.0);
                let far = linear_path_density(fp.gamma, fp.alpha, 1e9 / fp.alpha, gbar);
                prop_assert!(far < 1e-6);
            }
        }
    }
}
