//! Exact classical partition functions and the variational energy lower bound.
//!
//! All `2^n` configurations are visited along a Gray-code walk so each step
//! flips one spin and costs `O(degree)`. The walk is cut into fixed blocks of
//! `2^20` configurations; every block restarts from an exactly evaluated
//! energy and partial results are merged by a fixed binary tree, so the output
//! does not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{entropy_budget, DiscreteNoise, EntropyBudget};
use crate::error::invalid;
use crate::instances::IsingInstance;
use crate::{Error, Result};

/// Default largest system size accepted for exhaustive enumeration.
pub const DEFAULT_CAP: usize = 30;
const BLOCK_BITS: u32 = 20;
/// Contiguous block groups used by the spectrum builder.
const SPECTRUM_GROUPS: usize = 16;
/// Largest number of energy bins a spectrum may allocate per sector.
const MAX_BINS: usize = 1 << 22;

/// Classical Gibbs state `exp(-beta H_I + gamma sum_i Z_i) / Z`.
#[derive(Debug, Clone, Copy)]
pub struct GibbsSpec<'a> {
    pub instance: &'a IsingInstance,
    pub beta: f64,
    pub gamma: f64,
}

impl<'a> GibbsSpec<'a> {
    pub fn new(instance: &'a IsingInstance, beta: f64, gamma: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(invalid(format!("beta = {beta} must be finite and >= 0")));
        }
        if !gamma.is_finite() {
            return Err(invalid(format!("gamma = {gamma} must be finite")));
        }
        Ok(Self { instance, beta, gamma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    /// `ln Z` in nats.
    pub log_z: f64,
    pub mean_energy: f64,
    pub ground_energy: f64,
    /// `max |E|` over all configurations.
    pub h_norm: f64,
    /// Basis index of the first ground configuration met in walk order.
    pub ground_index: u64,
}

/// Enumeration settings: size cap, worker threads and block size.
#[derive(Debug, Clone, Copy)]
pub struct Enumerator {
    cap: usize,
    threads: usize,
    block_bits: u32,
}

impl Default for Enumerator {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP, threads: 1, block_bits: BLOCK_BITS }
    }
}

impl Enumerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.min(62);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    /// Overrides the block size; results are bit-stable for a fixed block size.
    pub fn with_block_bits(mut self, bits: u32) -> Self {
        self.block_bits = bits.clamp(1, 40);
        self
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.cap {
            return Err(Error::EnumerationCap { n, cap: self.cap });
        }
        if n == 0 {
            return Err(invalid("instance has no spins"));
        }
        Ok(())
    }

    fn blocks(&self, n: usize) -> (u32, u64) {
        let bits = self.block_bits.min(n as u32);
        (bits, 1u64 << (n as u32 - bits))
    }

    fn run<T: Send>(&self, jobs: usize, job: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
        if self.threads <= 1 || jobs <= 1 {
            return Ok((0..jobs).map(job).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
        Ok(pool.install(|| (0..jobs).into_par_iter().map(job).collect()))
    }

    pub fn enumerate(&self, spec: &GibbsSpec<'_>) -> Result<PartitionSummary> {
        let inst = spec.instance;
        self.check(inst.n())?;
        let (bits, nblocks) = self.blocks(inst.n());
        let (beta, gamma) = (spec.beta, spec.gamma);
        let parts = self.run(nblocks as usize, |b| {
            let mut acc = Accumulator::new();
            walk_block(inst, (b as u64) << bits, bits, |e, m, idx| {
                acc.push(-beta * e + gamma * m as f64, e, idx);
            });
            acc
        })?;
        let acc = tree_reduce(parts, Accumulator::merge);
        Ok(PartitionSummary {
            log_z: acc.max + acc.sum.ln(),
            mean_energy: acc.esum / acc.sum,
            ground_energy: acc.ground,
            h_norm: acc.h_norm,
            ground_index: acc.ground_index,
        })
    }

    /// Builds the moment-compressed density of states of `instance`, valid
    /// for `0 <= beta <= beta_max`. With `by_magnetization` the states are
    /// further split by total magnetization so biased sums can be evaluated.
    pub fn spectrum(&self, instance: &IsingInstance, beta_max: f64, by_magnetization: bool) -> Result<Spectrum> {
        let n = instance.n();
        self.check(n)?;
        if !(beta_max > 0.0) || !beta_max.is_finite() {
            return Err(invalid("spectrum needs a finite beta_max > 0"));
        }
        let scale = instance.energy_scale() * (1.0 + 1e-9) + 1e-9;
        let width = 2.0 / beta_max;
        let nbins = ((2.0 * scale / width).ceil() as usize).max(1);
        if nbins > MAX_BINS {
            return Err(invalid(format!("spectrum would need {nbins} energy bins; lower beta_max")));
        }
        let layout = Layout {
            lo: -scale,
            width,
            nbins,
            order: SPECTRUM_ORDER,
            sectors: if by_magnetization { n + 1 } else { 1 },
        };
        let (bits, nblocks) = self.blocks(n);
        let groups = (nblocks as usize).min(SPECTRUM_GROUPS);
        let per_group = nblocks as usize / groups;
        let parts = self.run(groups, |g| {
            let mut part = Moments::new(&layout);
            for b in g * per_group..(g + 1) * per_group {
                walk_block(instance, (b as u64) << bits, bits, |e, m, idx| {
                    let sector = if by_magnetization { (n as i64 - m) as usize / 2 } else { 0 };
                    part.push(&layout, sector, e, idx);
                });
            }
            part
        })?;
        let moments = tree_reduce(parts, Moments::merge);
        Ok(Spectrum { n, beta_max, by_magnetization, layout, moments, mixed_energy_terms: MixedTerms::of(instance) })
    }
}

/// Shorthand for [`Enumerator::enumerate`] with default settings.
pub fn enumerate(spec: &GibbsSpec<'_>) -> Result<PartitionSummary> {
    Enumerator::default().enumerate(spec)
}

/// Visits the `2^bits` configurations with Gray indices `start..start + 2^bits`.
/// The callback receives energy, magnetization and basis index.
fn walk_block(inst: &IsingInstance, start: u64, bits: u32, mut visit: impl FnMut(f64, i64, u64)) {
    let n = inst.n();
    let mut index = start ^ (start >> 1);
    let mut s: Vec<i8> = (0..n).map(|k| if index >> k & 1 == 1 { -1 } else { 1 }).collect();
    let mut e = inst.energy_unchecked(&s);
    let mut m: i64 = s.iter().map(|&x| x as i64).sum();
    visit(e, m, index);
    for i in 1..(1u64 << bits) {
        let k = i.trailing_zeros() as usize;
        e += inst.flip_delta(&s, k);
        m -= 2 * s[k] as i64;
        s[k] = -s[k];
        index ^= 1 << k;
        visit(e, m, index);
    }
}

fn tree_reduce<T>(mut items: Vec<T>, merge: impl Fn(T, T) -> T) -> T {
    assert!(!items.is_empty());
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => merge(a, b),
                None => a,
            });
        }
        items = next;
    }
    items.pop().unwrap()
}

/// Streaming log-sum-exp with an energy-weighted companion sum.
#[derive(Debug, Clone, Copy)]
struct Accumulator {
    max: f64,
    sum: f64,
    esum: f64,
    ground: f64,
    ground_index: u64,
    h_norm: f64,
}

impl Accumulator {
    fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0, esum: 0.0, ground: f64::INFINITY, ground_index: 0, h_norm: 0.0 }
    }

    #[inline]
    fn push(&mut self, x: f64, e: f64, index: u64) {
        self.push_weighted(x, e);
        if e < self.ground || (e == self.ground && index < self.ground_index) {
            self.ground = e;
            self.ground_index = index;
        }
        self.h_norm = self.h_norm.max(e.abs());
    }

    #[inline]
    fn push_weighted(&mut self, x: f64, e: f64) {
        if x > self.max {
            let scale = (self.max - x).exp();
            self.sum = self.sum * scale + 1.0;
            self.esum = self.esum * scale + e;
            self.max = x;
        } else {
            let w = (x - self.max).exp();
            self.sum += w;
            self.esum += e * w;
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        let max = a.max.max(b.max);
        let (sa, sb) = ((a.max - max).exp(), (b.max - max).exp());
        let (ground, ground_index) = if b.ground < a.ground || (b.ground == a.ground && b.ground_index < a.ground_index) {
            (b.ground, b.ground_index)
        } else {
            (a.ground, a.ground_index)
        };
        Self {
            max,
            sum: a.sum * sa + b.sum * sb,
            esum: a.esum * sa + b.esum * sb,
            ground,
            ground_index,
            h_norm: a.h_norm.max(b.h_norm),
        }
    }
}

/// Truncation order of the per-bin Taylor expansion. Bins have half-width
/// `1/beta_max`, so the remainder is below `1/21!` relative.
const SPECTRUM_ORDER: usize = 20;

#[derive(Debug, Clone, Copy)]
struct Layout {
    lo: f64,
    width: f64,
    nbins: usize,
    order: usize,
    sectors: usize,
}

impl Layout {
    fn stride(&self) -> usize {
        self.order + 2
    }

    fn center(&self, bin: usize) -> f64 {
        self.lo + (bin as f64 + 0.5) * self.width
    }
}

#[derive(Debug, Clone)]
struct Moments {
    /// `[sector][bin][k]`: sum over states of `(E - c_bin)^k`, `k = 0..=order+1`.
    data: Vec<f64>,
    ground: f64,
    ground_index: u64,
    h_norm: f64,
}

impl Moments {
    fn new(layout: &Layout) -> Self {
        Self {
            data: vec![0.0; layout.sectors * layout.nbins * layout.stride()],
            ground: f64::INFINITY,
            ground_index: 0,
            h_norm: 0.0,
        }
    }

    #[inline]
    fn push(&mut self, layout: &Layout, sector: usize, e: f64, index: u64) {
        let bin = (((e - layout.lo) / layout.width) as usize).min(layout.nbins - 1);
        let d = e - layout.center(bin);
        let base = (sector * layout.nbins + bin) * layout.stride();
        let mut p = 1.0;
        for slot in &mut self.data[base..base + layout.stride()] {
            *slot += p;
            p *= d;
        }
        if e < self.ground || (e == self.ground && index < self.ground_index) {
            self.ground = e;
            self.ground_index = index;
        }
        self.h_norm = self.h_norm.max(e.abs());
    }

    fn merge(mut a: Self, b: Self) -> Self {
        for (x, y) in a.data.iter_mut().zip(&b.data) {
            *x += y;
        }
        if b.ground < a.ground || (b.ground == a.ground && b.ground_index < a.ground_index) {
            a.ground = b.ground;
            a.ground_index = b.ground_index;
        }
        a.h_norm = a.h_norm.max(b.h_norm);
        a
    }
}

/// Coupling and field sums needed for the energy of a product state.
#[derive(Debug, Clone, Copy)]
struct MixedTerms {
    couplings: f64,
    fields: f64,
}

impl MixedTerms {
    fn of(instance: &IsingInstance) -> Self {
        Self {
            couplings: instance.edges().iter().map(|e| e.a).sum(),
            fields: instance.fields().iter().sum(),
        }
    }
}

/// `ln(2 cosh g)` without overflow.
pub fn ln_two_cosh(g: f64) -> f64 {
    let a = g.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// Largest budget (bits) for which the variational bound is defined: `n` for
/// the maximally mixed reference state, `n log2(1/p_min)` for a biased one.
pub fn budget_cap(n: usize, gamma: f64) -> f64 {
    if gamma == 0.0 {
        n as f64
    } else {
        n as f64 * (ln_two_cosh(gamma) + gamma.abs()) / std::f64::consts::LN_2
    }
}

/// Energy of the product state `exp(gamma sum Z) / (2 cosh gamma)^n`.
pub fn mixed_energy(instance: &IsingInstance, gamma: f64) -> f64 {
    MixedTerms::of(instance).energy(gamma)
}

impl MixedTerms {
    fn energy(&self, gamma: f64) -> f64 {
        if gamma == 0.0 {
            return 0.0;
        }
        let t = gamma.tanh();
        -self.couplings * t * t - self.fields * t
    }
}

/// Density of states of an instance compressed to per-bin Taylor moments.
/// Evaluating `ln Z` afterwards costs `O(bins * order)` instead of `O(2^n)`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    beta_max: f64,
    by_magnetization: bool,
    layout: Layout,
    moments: Moments,
    mixed_energy_terms: MixedTerms,
}

/// Logarithmic inverse-temperature grid plus golden-section refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub rel_tol: f64,
}

impl Default for BetaGrid {
    fn default() -> Self {
        Self { min: 1e-3, max: 1e2, points: 400, rel_tol: 1e-6 }
    }
}

impl BetaGrid {
    fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) || self.points < 2 || !(self.rel_tol > 0.0) {
            return Err(invalid("beta grid needs 0 < min < max, at least 2 points and rel_tol > 0"));
        }
        Ok(())
    }

    pub fn betas(&self) -> Vec<f64> {
        let ratio = (self.max / self.min).ln();
        (0..self.points)
            .map(|i| self.min * (ratio * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalBound {
    /// Lower bound on the energy of any state within the entropy budget.
    pub bound: f64,
    /// Maximizing inverse temperature; zero when the `beta -> 0` limit wins.
    pub beta_star: f64,
}

/// Outcome of a crossing-depth search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    /// Smallest depth whose certified lower bound reaches the classical energy.
    Depth(u64),
    /// No finite depth certifies it.
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub beta: f64,
    pub log_z: f64,
    pub mean_energy: f64,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }

    pub fn ground_energy(&self) -> f64 {
        self.moments.ground
    }

    pub fn ground_index(&self) -> u64 {
        self.moments.ground_index
    }

    pub fn h_norm(&self) -> f64 {
        self.moments.h_norm
    }

    /// Energy of the reference product state with bias `gamma`.
    pub fn mixed_energy(&self, gamma: f64) -> f64 {
        self.mixed_energy_terms.energy(gamma)
    }

    /// `ln Z` and mean energy of `exp(-beta H + gamma sum Z)`.
    pub fn evaluate(&self, beta: f64, gamma: f64) -> Result<(f64, f64)> {
        if !(beta >= 0.0) || beta > self.beta_max * (1.0 + 1e-12) {
            return Err(invalid(format!("beta = {beta} outside the spectrum range [0, {}]", self.beta_max)));
        }
        if gamma != 0.0 && !self.by_magnetization {
            return Err(invalid("spectrum was built without magnetization sectors"));
        }
        let layout = &self.layout;
        let order = layout.order;
        let mut coeff = vec![1.0; order + 1];
        for k in 1..=order {
            coeff[k] = coeff[k - 1] * -beta / k as f64;
        }
        let mut acc = Accumulator::new();
        for sector in 0..layout.sectors {
            let field = gamma * (self.n as f64 - 2.0 * sector as f64);
            for bin in 0..layout.nbins {
                let base = (sector * layout.nbins + bin) * layout.stride();
                let m = &self.moments.data[base..base + layout.stride()];
                if m[0] == 0.0 {
                    continue;
                }
                let (mut s, mut t) = (0.0, 0.0);
                for k in 0..=order {
                    s += coeff[k] * m[k];
                    t += coeff[k] * m[k + 1];
                }
                let c = layout.center(bin);
                acc.push_weighted(-beta * c + field + s.ln(), c + t / s);
            }
        }
        Ok((acc.max + acc.sum.ln(), acc.esum / acc.sum))
    }

    pub fn log_z(&self, beta: f64, gamma: f64) -> Result<f64> {
        Ok(self.evaluate(beta, gamma)?.0)
    }

    /// `beta^-1 (-ln Z_{beta,sigma} - budget ln 2)` with
    /// `ln Z_{beta,sigma} = ln Z_{beta,gamma} - n ln(2 cosh gamma)`.
    fn objective(&self, beta: f64, gamma: f64, budget_nats: f64) -> Result<f64> {
        let log_z_sigma = self.log_z(beta, gamma)? - self.n as f64 * ln_two_cosh(gamma);
        Ok((-log_z_sigma - budget_nats) / beta)
    }

    /// Supremum over `beta` of the Gibbs-variational lower bound on the
    /// energy of any state whose relative entropy to the reference product
    /// state is at most `budget` bits.
    pub fn variational_bound(&self, budget: f64, gamma: f64, grid: &BetaGrid) -> Result<VariationalBound> {
        grid.validate()?;
        let cap = budget_cap(self.n, gamma);
        if !(budget >= 0.0) || budget > cap * (1.0 + 1e-12) {
            return Err(invalid(format!("budget {budget} bits outside [0, {cap}]")));
        }
        if grid.max > self.beta_max * (1.0 + 1e-12) {
            return Err(invalid("beta grid exceeds the spectrum range"));
        }
        let nats = budget * std::f64::consts::LN_2;
        let betas = grid.betas();
        let mut values = Vec::with_capacity(betas.len());
        for &b in &betas {
            values.push(self.objective(b, gamma, nats)?);
        }
        let (imax, &vmax) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("grid is non-empty");
        let mut best = VariationalBound { bound: vmax, beta_star: betas[imax] };

        let (mut lo, mut hi) = (betas[imax.saturating_sub(1)], betas[(imax + 1).min(betas.len() - 1)]);
        let f = |b: f64| self.objective(b, gamma, nats);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        let (mut f1, mut f2) = (f(x1)?, f(x2)?);
        while hi - lo > grid.rel_tol * 0.5 * (hi + lo) {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = f(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = f(x2)?;
            }
        }
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.bound {
                best = VariationalBound { bound: v, beta_star: x };
            }
        }
        if budget == 0.0 {
            let limit = self.mixed_energy(gamma);
            if limit > best.bound {
                best = VariationalBound { bound: limit, beta_star: 0.0 };
            }
        }
        Ok(best)
    }

    /// Smallest depth whose entropy budget certifies output energy `>= e_c`.
    pub fn crossing_depth(
        &self,
        noise: &DiscreteNoise,
        e_c: f64,
        include_measurement: bool,
        grid: &BetaGrid,
    ) -> Result<Crossing> {
        let ground = self.ground_energy();
        if !e_c.is_finite() {
            return Err(invalid("classical energy must be finite"));
        }
        // energies tracked incrementally can land a few ulps below the enumerated ground
        if e_c < ground - 1e-12 * ground.abs().max(1.0) {
            return Err(Error::Uncertifiable { e_c, ground });
        }
        let e_c = e_c.max(ground);
        if e_c >= self.mixed_energy(0.0) {
            return Ok(Crossing::Never);
        }
        let reaches = |depth: u64| -> Result<Option<bool>> {
            let budget = entropy_budget(noise, depth as f64, self.n, include_measurement).bits;
            if budget <= 0.0 {
                return Ok(None);
            }
            Ok(Some(self.variational_bound(budget, 0.0, grid)?.bound >= e_c))
        };
        if reaches(0)? == Some(true) {
            return Ok(Crossing::Depth(0));
        }
        let mut lo = 0u64;
        let mut hi = 1u64;
        loop {
            match reaches(hi)? {
                Some(true) => break,
                Some(false) if hi < 1 << 50 => {
                    lo = hi;
                    hi *= 2;
                }
                _ => return Ok(Crossing::Never),
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if reaches(mid)? == Some(true) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Crossing::Depth(hi))
    }

    /// Largest budget (bits) whose bound still reaches `energy`, found by
    /// bisection to `tol` bits. `None` when even a zero budget does not.
    pub fn crossing_budget(&self, energy: f64, grid: &BetaGrid, tol: f64) -> Result<Option<f64>> {
        let reaches = |b: f64| -> Result<bool> { Ok(self.variational_bound(b, 0.0, grid)?.bound >= energy) };
        if !reaches(0.0)? {
            return Ok(None);
        }
        let cap = budget_cap(self.n, 0.0);
        if reaches(cap)? {
            return Ok(Some(cap));
        }
        let (mut lo, mut hi) = (0.0, cap);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if reaches(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(lo))
    }

    /// `(beta, ln Z, <H>)` samples, e.g. for plotting.
    pub fn curve(&self, betas: &[f64], gamma: f64) -> Result<Vec<CurvePoint>> {
        betas
            .iter()
            .map(|&beta| {
                let (log_z, mean_energy) = self.evaluate(beta, gamma)?;
                Ok(CurvePoint { beta, log_z, mean_energy })
            })
            .collect()
    }
}

/// Builds a spectrum sized for `grid` and evaluates the variational bound.
pub fn variational_lower_bound(
    instance: &IsingInstance,
    budget: &EntropyBudget,
    gamma: f64,
    grid: &BetaGrid,
) -> Result<VariationalBound> {
    Enumerator::default()
        .spectrum(instance, grid.max, gamma != 0.0)?
        .variational_bound(budget.bits, gamma, grid)
}

/// Smallest circuit depth from which the noisy device is certified to be no
/// better than the classical energy `e_c`. Measurement noise is excluded.
pub fn crossing_depth(
    instance: &IsingInstance,
    noise: &DiscreteNoise,
    e_c: f64,
    grid: &BetaGrid,
) -> Result<Crossing> {
    Enumerator::default()
        .spectrum(instance, grid.max, false)?
        .crossing_depth(noise, e_c, false, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_random, generate_regular, generate_sk, SpinConfig};
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn k4() -> IsingInstance {
        generate_regular(4, 3, -1.0, 0).unwrap()
    }

    fn brute(inst: &IsingInstance, beta: f64, gamma: f64) -> (f64, f64, f64, f64) {
        let n = inst.n();
        let configs: Vec<(f64, f64)> = (0..1u64 << n)
            .map(|i| {
                let c = SpinConfig::from_index(i, n);
                (inst.energy(&c).unwrap(), c.magnetization() as f64)
            })
            .collect();
        let xs: Vec<f64> = configs.iter().map(|&(e, m)| -beta * e + gamma * m).collect();
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = xs.iter().map(|x| (x - max).exp()).sum();
        let ez: f64 = xs.iter().zip(&configs).map(|(x, c)| (x - max).exp() * c.0).sum();
        let ground = configs.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hn = configs.iter().map(|c| c.0.abs()).fold(0.0, f64::max);
        (max + z.ln(), ez / z, ground, hn)
    }

    #[test]
    fn field_only_closed_form() {
        let inst = IsingInstance::new(3, vec![], vec![1.0; 3]).unwrap();
        let s = enumerate(&GibbsSpec::new(&inst, 1.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(s.log_z, 3.0 * (2.0 * 1f64.cosh()).ln(), max_relative = 1e-14);
        assert!((s.log_z - 3.38078).abs() < 1e-5);
        assert_eq!(s.ground_energy, -3.0);
        assert_eq!(s.h_norm, 3.0);
        assert_eq!(s.ground_index, 0);
    }

    #[test]
    fn k4_summary() {
        let inst = k4();
        let s = enumerate(&GibbsSpec::new(&inst, 0.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(s.log_z, 4.0 * LN_2, max_relative = 1e-15);
        assert!(s.mean_energy.abs() < 1e-15);
        assert_eq!(s.ground_energy, -2.0);
        assert_eq!(s.h_norm, 6.0);
    }

    #[test]
    fn symmetric_mean_vanishes_at_infinite_temperature() {
        let inst = generate_sk(11, 3).unwrap();
        let s = enumerate(&GibbsSpec::new(&inst, 0.0, 0.0).unwrap()).unwrap();
        assert!(s.mean_energy.abs() < 1e-12);
        assert_relative_eq!(s.log_z, 11.0 * LN_2, max_relative = 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = IsingInstance::new(31, vec![], vec![0.0; 31]).unwrap();
        let err = enumerate(&GibbsSpec::new(&inst, 1.0, 0.0).unwrap()).unwrap_err();
        assert!(err.to_string().contains("30"));
        let small = IsingInstance::new(5, vec![], vec![0.0; 5]).unwrap();
        let err = Enumerator::new().with_cap(4).enumerate(&GibbsSpec::new(&small, 1.0, 0.0).unwrap());
        assert!(matches!(err, Err(Error::EnumerationCap { n: 5, cap: 4 })));
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..4 {
            let inst = generate_random(10, 0.4, 1.0, 0.5, seed).unwrap();
            for (beta, gamma) in [(0.0, 0.0), (0.7, 0.0), (2.0, -0.3), (0.3, 1.1)] {
                let s = enumerate(&GibbsSpec::new(&inst, beta, gamma).unwrap()).unwrap();
                let (lz, me, g, hn) = brute(&inst, beta, gamma);
                assert_relative_eq!(s.log_z, lz, max_relative = 1e-12);
                assert_relative_eq!(s.mean_energy, me, epsilon = 1e-11, max_relative = 1e-11);
                assert!((s.ground_energy - g).abs() < 1e-12);
                assert_relative_eq!(s.h_norm, hn, max_relative = 1e-12);
                let gcfg = SpinConfig::from_index(s.ground_index, 10);
                assert_relative_eq!(inst.energy(&gcfg).unwrap(), g, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let inst = generate_sk(12, 9).unwrap();
        let spec = GibbsSpec::new(&inst, 0.8, 0.2).unwrap();
        let base = Enumerator::new().with_block_bits(5).enumerate(&spec).unwrap();
        for threads in [2, 3, 8] {
            let other = Enumerator::new().with_block_bits(5).with_threads(threads).enumerate(&spec).unwrap();
            assert_eq!(base, other);
        }
        let whole = enumerate(&spec).unwrap();
        assert_relative_eq!(whole.log_z, base.log_z, max_relative = 1e-13);
    }

    #[test]
    fn spectrum_matches_enumeration() {
        let inst = generate_random(12, 0.5, 1.0, 0.3, 5).unwrap();
        let spec = Enumerator::new().with_block_bits(6).with_threads(2).spectrum(&inst, 50.0, true).unwrap();
        for (beta, gamma) in [(0.0, 0.0), (1e-3, 0.0), (0.5, 0.4), (3.0, -1.0), (50.0, 0.0), (17.0, 0.05)] {
            let s = enumerate(&GibbsSpec::new(&inst, beta, gamma).unwrap()).unwrap();
            let (lz, me) = spec.evaluate(beta, gamma).unwrap();
            assert_relative_eq!(lz, s.log_z, epsilon = 1e-11, max_relative = 1e-12);
            assert_relative_eq!(me, s.mean_energy, epsilon = 1e-10, max_relative = 1e-10);
        }
        assert!(spec.evaluate(51.0, 0.0).is_err());
        let flat = Enumerator::new().spectrum(&inst, 50.0, false).unwrap();
        assert!(flat.evaluate(1.0, 0.1).is_err());
        assert!((flat.ground_energy() - spec.ground_energy()).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_log_z_is_minus_mean_energy() {
        let inst = generate_regular(14, 3, 1.0, 2).unwrap();
        let h = 1e-5;
        for beta in [0.1, 0.4, 1.0] {
            let lz = |b: f64| enumerate(&GibbsSpec::new(&inst, b, 0.0).unwrap()).unwrap().log_z;
            let fd = (lz(beta + h) - lz(beta - h)) / (2.0 * h);
            let mean = enumerate(&GibbsSpec::new(&inst, beta, 0.0).unwrap()).unwrap().mean_energy;
            assert_relative_eq!(-fd, mean, max_relative = 1e-6);
        }
    }

    #[test]
    fn bound_limits() {
        let inst = k4();
        let grid = BetaGrid::default();
        let zero = EntropyBudget::new(0.0, crate::bounds::Provenance::Exact).unwrap();
        let v = variational_lower_bound(&inst, &zero, 0.0, &grid).unwrap();
        assert_eq!(v.bound, 0.0);
        let full = EntropyBudget::new(4.0, crate::bounds::Provenance::Exact).unwrap();
        let v = variational_lower_bound(&inst, &full, 0.0, &grid).unwrap();
        // -ln(Z)/beta at beta = 100: ground -2 with degeneracy 6
        assert!(v.bound <= -2.0 + 1e-12 && v.bound > -2.0 - 0.02, "{v:?}");
        // the six ground states of K4 sit log2(16/6) ~ 1.415 bits from the
        // maximally mixed state, so any larger budget only certifies -2
        let mid = EntropyBudget::new(1.6, crate::bounds::Provenance::Exact).unwrap();
        let v = variational_lower_bound(&inst, &mid, 0.0, &grid).unwrap();
        assert!(v.bound <= -2.0 && v.bound > -2.0 - 0.002, "{v:?}");
        let low = EntropyBudget::new(1.0, crate::bounds::Provenance::Exact).unwrap();
        let v = variational_lower_bound(&inst, &low, 0.0, &grid).unwrap();
        assert!(v.bound > -2.0 && v.bound < 0.0, "{v:?}");
        let over = EntropyBudget::new(4.5, crate::bounds::Provenance::Exact).unwrap();
        assert!(variational_lower_bound(&inst, &over, 0.0, &grid).is_err());
    }

    #[test]
    fn bound_matches_dense_scan() {
        // the refined supremum must match a brute scan of the objective
        let inst = k4();
        let spectrum = Enumerator::new().spectrum(&inst, 100.0, false).unwrap();
        let v = spectrum.variational_bound(1.0, 0.0, &BetaGrid::default()).unwrap();
        assert!(v.beta_star > 0.01 && v.beta_star < 50.0);
        let mut best = f64::NEG_INFINITY;
        for i in 1..200_000 {
            let beta = i as f64 * 5e-5;
            let (lz, ..) = brute(&inst, beta, 0.0);
            best = best.max((4.0 * LN_2 - lz - LN_2) / beta);
        }
        assert!((v.bound - best).abs() < 1e-8, "{} vs {}", v.bound, best);
    }

    #[test]
    fn bound_is_monotone_in_budget() {
        let inst = generate_sk(10, 1).unwrap();
        let spectrum = Enumerator::new().spectrum(&inst, 100.0, false).unwrap();
        let grid = BetaGrid::default();
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let v = spectrum.variational_bound(i as f64 * 0.5, 0.0, &grid).unwrap().bound;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn biased_bound_respects_product_states() {
        // any product state with bias gamma' has relative entropy computable in
        // closed form; its energy must lie above the bound at that budget
        let inst = generate_random(8, 0.5, 1.0, 0.5, 4).unwrap();
        let spectrum = Enumerator::new().spectrum(&inst, 100.0, true).unwrap();
        let gamma = 0.4;
        for g2 in [0.0, 0.2, 0.4, 0.9, -0.5] {
            let (t1, t2) = (f64::tanh(gamma), f64::tanh(g2));
            let (p, q) = ((1.0 + t2) / 2.0, (1.0 + t1) / 2.0);
            let kl = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).log2() };
            let d = 8.0 * (kl(p, q) + kl(1.0 - p, 1.0 - q));
            let e = mixed_energy(&inst, g2);
            let v = spectrum.variational_bound(d, gamma, &BetaGrid::default()).unwrap();
            assert!(v.bound <= e + 1e-9, "bias {g2}: bound {} above energy {e}", v.bound);
        }
    }

    #[test]
    fn crossing_depth_cases() {
        let inst = k4();
        let grid = BetaGrid::default();
        let noise = DiscreteNoise::new(1.6e-3, 6.2e-3, 0.0, 0.5, 0.5).unwrap();
        assert!(matches!(crossing_depth(&inst, &noise, -2.5, &grid), Err(Error::Uncertifiable { .. })));
        assert_eq!(crossing_depth(&inst, &noise, 0.1, &grid).unwrap(), Crossing::Never);
        let depth = match crossing_depth(&inst, &noise, -1.0, &grid).unwrap() {
            Crossing::Depth(d) => d,
            Crossing::Never => panic!("expected a finite depth"),
        };
        let spectrum = Enumerator::new().spectrum(&inst, grid.max, false).unwrap();
        let at = |d: u64| {
            let b = entropy_budget(&noise, d as f64, 4, false).bits;
            spectrum.variational_bound(b, 0.0, &grid).unwrap().bound
        };
        assert!(at(depth) >= -1.0);
        assert!(depth == 0 || at(depth - 1) < -1.0);
    }

    #[test]
    fn crossing_budget_brackets_energy() {
        let inst = generate_regular(10, 3, -1.0, 7).unwrap();
        let grid = BetaGrid::default();
        let spectrum = Enumerator::new().spectrum(&inst, grid.max, false).unwrap();
        let target = 0.5 * spectrum.ground_energy();
        let b = spectrum.crossing_budget(target, &grid, 1e-6).unwrap().unwrap();
        assert!(spectrum.variational_bound(b, 0.0, &grid).unwrap().bound >= target);
        assert!(spectrum.variational_bound(b + 1e-5, 0.0, &grid).unwrap().bound < target);
        assert_eq!(spectrum.crossing_budget(1.0, &grid, 1e-6).unwrap(), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn summary_invariants(seed in 0u64..1000, beta in 0.0..3.0f64, gamma in -1.0..1.0f64) {
                let inst = generate_random(9, 0.5, 1.0, 0.5, seed).unwrap();
                let s = enumerate(&GibbsSpec::new(&inst, beta, gamma).unwrap()).unwrap();
                prop_assert!(s.h_norm >= s.ground_energy.abs());
                prop_assert!(s.mean_energy >= s.ground_energy - 1e-12);
                prop_assert!(s.mean_energy <= s.h_norm + 1e-12);
                // Z >= e^{-beta E0 + gamma M0} and Z <= 2^n e^{beta ||H|| + |gamma| n}
                prop_assert!(s.log_z <= 9.0 * LN_2 + beta * s.h_norm + gamma.abs() * 9.0 + 1e-12);
                prop_assert!(s.log_z >= -beta * s.h_norm - gamma.abs() * 9.0 - 1e-12);
            }

            #[test]
            fn ground_matches_plain_scan(seed in 0u64..1000) {
                let inst = generate_random(11, 0.4, 1.0, 0.7, seed).unwrap();
                let s = enumerate(&GibbsSpec::new(&inst, 1.0, 0.0).unwrap()).unwrap();
                let mut ground = f64::INFINITY;
                for i in 0..1u64 << 11 {
                    ground = ground.min(inst.energy(&SpinConfig::from_index(i, 11)).unwrap());
                }
                prop_assert!((s.ground_energy - ground).abs() < 1e-12);
            }
        }
    }
}
