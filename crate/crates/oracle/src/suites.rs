//! Seeded verification suites. Each case is generated from its own seed, run
//! independently, and reported as `{seed, n, D, p, bound, measured, margin}`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nisqbound_core::annealer::{fixed_point, schedule_bound, ContinuousNoise, Schedule};
use nisqbound_core::bounds::{EntropyBudget, Provenance};
use nisqbound_core::instances::generate_random;
use nisqbound_core::partition::{variational_lower_bound, BetaGrid};
use nisqbound_core::rng;

use crate::circuit::{random_brickwork, run_noisy_circuit};
use crate::contraction::verify_contraction;
use crate::density::{ising_diagonal, qubit_diagonal, DensityMatrix};
use crate::error::{invalid, Result};
use crate::lindblad::{lindblad_evolve, LindbladOptions};
use crate::linalg::{eigh, relative_entropy, CMatrix};
use crate::mirror::mirror_descent_trace;
use crate::{CIRCUIT_CAP, DENSE_CAP, LINDBLAD_CAP};

/// Noise strengths drawn by the circuit suites.
pub const CIRCUIT_NOISE: [f64; 3] = [0.01, 0.05, 0.2];
/// Bias of the product fixed point in the contraction suite.
pub const CONTRACTION_GAMMA: f64 = 0.2;
/// Energy tolerance of the mirror-descent suite.
pub const MIRROR_EPS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Depolarized brickwork circuits against `(1 - p)^{2D} n` bits.
    Lemma1,
    /// Per-update entropy decrease and step cap of mirror descent.
    Mirror,
    /// Variational lower bound against the exact energy of circuit outputs.
    Variational,
    /// Layered bound with `D_inf` corrections for a biased product fixed point.
    Contraction,
    /// Lindblad evolution against the annealer schedule bound.
    Annealer,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Lemma1, Suite::Mirror, Suite::Variational, Suite::Contraction, Suite::Annealer];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Mirror => "mirror",
            Suite::Variational => "variational",
            Suite::Contraction => "contraction",
            Suite::Annealer => "annealer",
        }
    }

    /// Default register size (largest size for suites that draw `n`).
    pub fn default_n(self) -> usize {
        match self {
            Suite::Lemma1 => 6,
            Suite::Mirror => 4,
            Suite::Variational => 8,
            Suite::Contraction => 5,
            Suite::Annealer => 3,
        }
    }

    /// Smallest margin accepted.
    pub fn tolerance(self) -> f64 {
        match self {
            Suite::Annealer => -1e-6,
            _ => -1e-9,
        }
    }

    fn cap(self) -> usize {
        match self {
            Suite::Lemma1 => CIRCUIT_CAP,
            Suite::Annealer => LINDBLAD_CAP,
            _ => DENSE_CAP,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub n: usize,
    /// Number of cases; case `i` uses seed `base_seed + i`.
    pub cases: u64,
    pub base_seed: u64,
    pub threads: usize,
}

impl SuiteConfig {
    pub fn new(suite: Suite, cases: u64) -> Self {
        Self { suite, n: suite.default_n(), cases, base_seed: 0, threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub seed: u64,
    pub n: usize,
    /// Circuit depth, mirror-descent updates, or anneal time.
    #[serde(rename = "D")]
    pub d: f64,
    /// Noise strength, or `eps` for mirror descent.
    pub p: f64,
    pub bound: f64,
    pub measured: f64,
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub tolerance: f64,
    pub cases: Vec<CaseResult>,
    pub min_margin: f64,
    pub passed: bool,
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let suite = config.suite;
    let min_n = match suite {
        Suite::Annealer => 1,
        _ => 2,
    };
    if config.n < min_n || config.n > suite.cap() {
        return Err(invalid(format!("suite {suite} needs {min_n} <= n <= {}", suite.cap())));
    }
    if config.cases == 0 {
        return Err(invalid("at least one case is required"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()
        .map_err(|e| invalid(e.to_string()))?;
    let seeds: Vec<u64> = (0..config.cases).map(|i| config.base_seed.wrapping_add(i)).collect();
    let cases = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| run_case(suite, config.n, seed))
            .collect::<Result<Vec<_>>>()
    })?;
    let min_margin = cases.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let passed = cases.iter().all(|c| c.passed);
    Ok(SuiteReport { suite, tolerance: suite.tolerance(), cases, min_margin, passed })
}

fn run_case(suite: Suite, n_max: usize, seed: u64) -> Result<CaseResult> {
    let mut result = match suite {
        Suite::Lemma1 => lemma1_case(n_max, seed),
        Suite::Mirror => mirror_case(n_max, seed),
        Suite::Variational => variational_case(n_max, seed),
        Suite::Contraction => contraction_case(n_max, seed),
        Suite::Annealer => annealer_case(n_max, seed),
    }?;
    result.passed &= result.margin >= suite.tolerance();
    Ok(result)
}

fn circuit_draw(n_min: usize, n_max: usize, depth_max: usize, seed: u64) -> (usize, usize, f64, rng::Rng) {
    let mut r = rng::substream(seed, 1);
    let n = r.random_range(n_min..=n_max);
    let depth = r.random_range(1..=depth_max);
    let p = CIRCUIT_NOISE[r.random_range(0..CIRCUIT_NOISE.len())];
    (n, depth, p, r)
}

fn lemma1_case(n_max: usize, seed: u64) -> Result<CaseResult> {
    let (n, depth, p, _) = circuit_draw(2, n_max, 20, seed);
    let circuit = random_brickwork(n, depth, seed)?;
    let out = run_noisy_circuit(&circuit, &[p], &DensityMatrix::basis(n, 0))?;
    let measured = relative_entropy(&out, &DensityMatrix::maximally_mixed(n))?;
    let bound = (1.0 - p).powi(2 * depth as i32) * n as f64;
    Ok(CaseResult { seed, n, d: depth as f64, p, bound, measured, margin: bound - measured, passed: true })
}

fn variational_case(n: usize, seed: u64) -> Result<CaseResult> {
    let (_, depth, p, _) = circuit_draw(n, n, 10, seed);
    let instance = generate_random(n, 0.5, 1.0, 0.5, seed)?;
    let circuit = random_brickwork(n, depth, seed)?;
    let out = run_noisy_circuit(&circuit, &[p], &DensityMatrix::basis(n, 0))?;
    let measured = out.expectation_diagonal(&ising_diagonal(&instance)?);
    let d = relative_entropy(&out, &DensityMatrix::maximally_mixed(n))?.max(0.0);
    let budget = EntropyBudget::new(d, Provenance::Exact)?;
    let bound = variational_lower_bound(&instance, &budget, 0.0, &BetaGrid::default())?.bound;
    Ok(CaseResult { seed, n, d: depth as f64, p, bound, measured, margin: measured - bound, passed: true })
}

fn contraction_case(n_max: usize, seed: u64) -> Result<CaseResult> {
    let (n, depth, p, mut r) = circuit_draw(2, n_max, 10, seed);
    let circuit = random_brickwork(n, depth, seed)?;
    let g = CONTRACTION_GAMMA;
    let q = qubit_diagonal(g.exp() / (2.0 * g.cosh()));
    let rho0 = DensityMatrix::basis(n, r.random_range(0..1usize << n));
    let report = verify_contraction(&rho0, &circuit, &[p], &q)?;
    let last = report.layers.last().expect("depth is at least one");
    Ok(CaseResult {
        seed,
        n,
        d: depth as f64,
        p,
        bound: last.bound,
        measured: last.measured,
        margin: report.min_margin,
        passed: true,
    })
}

fn gaussian_matrix(rows: usize, cols: usize, r: &mut rng::Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
}

/// Random Hermitian `H` and a state with half its weight on the ground space
/// of `H` and half on a random state of rank 1 to 3.
pub fn mirror_draw(n: usize, seed: u64) -> Result<(DensityMatrix, CMatrix)> {
    let dim = 1usize << n;
    let mut r = rng::substream(seed, 2);
    let g = gaussian_matrix(dim, dim, &mut r);
    let h = (&g + g.adjoint()) * Complex64::new(0.5 / (dim as f64).sqrt(), 0.0);
    let rank = r.random_range(1..=3);
    let a = gaussian_matrix(dim, rank, &mut r);
    let mut m = &a * a.adjoint();
    m /= m.trace();
    let (_, vectors) = eigh(&h);
    let ground = vectors.column(0);
    let m = m * Complex64::new(0.5, 0.0) + ground * ground.adjoint() * Complex64::new(0.5, 0.0);
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Ok((DensityMatrix::from_matrix(n, m)?, h))
}

fn mirror_case(n: usize, seed: u64) -> Result<CaseResult> {
    let (rho, h) = mirror_draw(n, seed)?;
    let trace = mirror_descent_trace(&rho, &h, MIRROR_EPS, &DensityMatrix::maximally_mixed(n))?;
    let bound = MIRROR_EPS * MIRROR_EPS / 4.0;
    let measured = trace.min_decrease().unwrap_or(bound);
    Ok(CaseResult {
        seed,
        n,
        d: trace.updates() as f64,
        p: MIRROR_EPS,
        bound,
        measured,
        margin: measured - bound,
        passed: trace.converged,
    })
}

fn annealer_case(n_max: usize, seed: u64) -> Result<CaseResult> {
    let mut r = rng::substream(seed, 3);
    let n = r.random_range(1..=n_max);
    let noise = ContinuousNoise::new(r.random_range(0.0..0.5), r.random_range(0.0..0.3), r.random_range(0.05..0.5))?;
    let total = r.random_range(0.5..5.0);
    let transverse: Vec<f64> = (0..n).map(|_| r.random_range(0.5..1.5)).collect();
    let instance = generate_random(n, 1.0, 1.0, 0.5, seed)?;
    let schedule = Schedule::linear(total, transverse)?;
    let fp = fixed_point(&noise)?;
    let sigma = DensityMatrix::product(&qubit_diagonal(fp.p0), n);
    let opts = LindbladOptions { dt: 1e-2, ..Default::default() };
    let traj = lindblad_evolve(&instance, &schedule, &noise, &opts, &DensityMatrix::plus_state(n))?;
    let measured = relative_entropy(traj.final_state(), &sigma)?;
    let bound = schedule_bound(&schedule, &noise, total / 2000.0)?.bits;
    Ok(CaseResult { seed, n, d: total, p: fp.alpha, bound, measured, margin: bound - measured, passed: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn reports_do_not_depend_on_thread_count() {
        let mut cfg = SuiteConfig::new(Suite::Lemma1, 6);
        cfg.n = 4;
        let one = run_suite(&cfg).unwrap();
        cfg.threads = 3;
        let three = run_suite(&cfg).unwrap();
        assert_eq!(one, three);
        assert!(one.passed);
    }

    #[test]
    fn oversized_registers_are_rejected() {
        let mut cfg = SuiteConfig::new(Suite::Annealer, 1);
        cfg.n = 7;
        assert!(run_suite(&cfg).is_err());
    }

    #[test]
    fn small_runs_of_every_suite_pass() {
        for s in Suite::ALL {
            let mut cfg = SuiteConfig::new(s, 3);
            cfg.n = cfg.n.min(4);
            let r = run_suite(&cfg).unwrap();
            assert!(r.passed, "{s}: {:?}", r.cases);
        }
    }
}
