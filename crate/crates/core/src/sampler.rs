//! Heat-bath Glauber dynamics for classical Gibbs states.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::instances::{Family, IsingInstance, SpinConfig};
use crate::partition::GibbsSpec;
use crate::rng::{self, Rng};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingCriterion {
    /// `beta ||A|| < 1`.
    SpectralNorm,
    /// `beta < 1/4` for Sherrington-Kirkpatrick couplings.
    SherringtonKirkpatrick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionCheck {
    pub criterion: MixingCriterion,
    pub ok: bool,
    pub margin: f64,
}

/// Rapid-mixing certificate. `ok` and `margin` are those of the looser
/// applicable criterion; every evaluated criterion is listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCertificate {
    pub ok: bool,
    pub margin: f64,
    pub criterion: MixingCriterion,
    pub checks: Vec<CriterionCheck>,
}

impl MixingCertificate {
    /// `100 ceil(1/margin)` sweeps when certified.
    pub fn default_burn_in(&self) -> Option<u64> {
        self.ok.then(|| 100 * (1.0 / self.margin).ceil() as u64)
    }
}

pub fn rapid_mixing_check(instance: &IsingInstance, beta: f64) -> Result<MixingCertificate> {
    rapid_mixing_check_with_norm(instance, beta, instance.spectral_norm())
}

/// As [`rapid_mixing_check`] with a precomputed `||A||`.
pub fn rapid_mixing_check_with_norm(instance: &IsingInstance, beta: f64, a_norm: f64) -> Result<MixingCertificate> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid(format!("beta = {beta} must be finite and >= 0")));
    }
    let margin = 1.0 - beta * a_norm;
    let mut checks = vec![CriterionCheck { criterion: MixingCriterion::SpectralNorm, ok: margin > 0.0, margin }];
    if instance.family() == Family::Sk {
        let margin = 1.0 - 4.0 * beta;
        checks.push(CriterionCheck { criterion: MixingCriterion::SherringtonKirkpatrick, ok: margin > 0.0, margin });
    }
    let best = *checks
        .iter()
        .max_by(|a, b| a.margin.total_cmp(&b.margin))
        .expect("at least one criterion");
    Ok(MixingCertificate { ok: best.ok, margin: best.margin, criterion: best.criterion, checks })
}

/// Single Glauber chain with an incrementally maintained energy.
#[derive(Debug, Clone)]
pub struct ChainState {
    config: SpinConfig,
    energy: f64,
    sweep_count: u64,
    rng: Rng,
}

impl ChainState {
    /// Uniformly random start drawn from the chain's own generator.
    pub fn new(instance: &IsingInstance, rng: Rng) -> Self {
        let mut rng = rng;
        let spins = (0..instance.n()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let config = SpinConfig::new(spins).expect("spins are +-1");
        let energy = instance.energy_unchecked(config.spins());
        Self { config, energy, sweep_count: 0, rng }
    }

    pub fn config(&self) -> &SpinConfig {
        &self.config
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn sweep_count(&self) -> u64 {
        self.sweep_count
    }

    /// One heat-bath update of site `k`: `s_k = +1` with probability
    /// `1 / (1 + exp(-2 beta h_k - 2 gamma))`.
    pub fn update_site(&mut self, instance: &IsingInstance, beta: f64, gamma: f64, k: usize) {
        let h = instance.local_field(self.config.spins(), k);
        let p_up = 1.0 / (1.0 + (-2.0 * (beta * h + gamma)).exp());
        let new = if self.rng.random::<f64>() < p_up { 1 } else { -1 };
        let old = self.config.spins()[k];
        if new != old {
            self.energy += 2.0 * f64::from(old) * h;
            self.config.set(k, new);
        }
    }

    /// Updates sites `0..n` in order at inverse temperature `beta`.
    pub fn sweep(&mut self, instance: &IsingInstance, beta: f64, gamma: f64) {
        for k in 0..instance.n() {
            self.update_site(instance, beta, gamma, k);
        }
        self.sweep_count += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub config: SpinConfig,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub burn_in: u64,
    pub thin: u64,
    /// Whether the rapid-mixing certificate held for this run.
    pub certified: bool,
}

impl SampleSet {
    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.energy).collect()
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.energy).min_by(f64::total_cmp)
    }
}

/// Runs one chain for `burn_in + sweeps` sweeps keeping every `thin`-th
/// post-burn-in configuration. Without an explicit `burn_in` the certified
/// default is used; uncertified runs then require one.
pub fn glauber_run(spec: &GibbsSpec<'_>, sweeps: u64, burn_in: Option<u64>, thin: u64, seed: u64) -> Result<SampleSet> {
    let cert = rapid_mixing_check(spec.instance, spec.beta)?;
    run_chain(spec, &cert, sweeps, burn_in, thin, rng::seeded(seed))
}

/// Independent chains on generator substreams `0..chains` of `seed`,
/// concatenated in chain order.
pub fn glauber_chains(
    spec: &GibbsSpec<'_>,
    chains: usize,
    sweeps: u64,
    burn_in: Option<u64>,
    thin: u64,
    seed: u64,
    threads: usize,
) -> Result<SampleSet> {
    if chains == 0 {
        return Err(invalid("need at least one chain"));
    }
    let cert = rapid_mixing_check(spec.instance, spec.beta)?;
    let job = |c: usize| run_chain(spec, &cert, sweeps, burn_in, thin, rng::substream(seed, c as u64));
    let parts: Vec<Result<SampleSet>> = if threads <= 1 {
        (0..chains).map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
        pool.install(|| (0..chains).into_par_iter().map(job).collect())
    };
    let mut out: Option<SampleSet> = None;
    for part in parts {
        let part = part?;
        match out.as_mut() {
            None => out = Some(part),
            Some(acc) => acc.samples.extend(part.samples),
        }
    }
    Ok(out.expect("chains > 0"))
}

fn run_chain(
    spec: &GibbsSpec<'_>,
    cert: &MixingCertificate,
    sweeps: u64,
    burn_in: Option<u64>,
    thin: u64,
    rng: Rng,
) -> Result<SampleSet> {
    if sweeps == 0 || thin == 0 {
        return Err(invalid("sweeps and thin must be positive"));
    }
    let burn_in = match burn_in.or_else(|| cert.default_burn_in()) {
        Some(b) => b,
        None => return Err(invalid("outside the certified regime a burn-in must be given")),
    };
    let inst = spec.instance;
    let mut chain = ChainState::new(inst, rng);
    for _ in 0..burn_in {
        chain.sweep(inst, spec.beta, spec.gamma);
    }
    let mut samples = Vec::with_capacity((sweeps / thin) as usize);
    for i in 1..=sweeps {
        chain.sweep(inst, spec.beta, spec.gamma);
        if i % thin == 0 {
            samples.push(Sample { config: chain.config.clone(), energy: chain.energy });
        }
    }
    Ok(SampleSet { samples, burn_in, thin, certified: cert.ok })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Sample mean and batch-means standard error (16 batches, fewer when
/// there are fewer samples). Energies are recomputed from the configurations.
pub fn estimate_energy(samples: &[Sample], instance: &IsingInstance) -> Result<EnergyEstimate> {
    let energies = samples
        .iter()
        .map(|s| instance.energy(&s.config))
        .collect::<Result<Vec<f64>>>()?;
    batch_means(&energies)
}

pub fn batch_means(values: &[f64]) -> Result<EnergyEstimate> {
    if values.len() < 2 {
        return Err(invalid("need at least 2 samples"));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let batches = values.len().min(16);
    let size = values.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(EnergyEstimate { mean, stderr: (var / batches as f64).sqrt() })
}
