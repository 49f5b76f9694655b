//! Classical Ising instances `H_I = -sum_{i<j} a_ij Z_i Z_j - sum_i b_i Z_i`.
//!
//! Spins are `+1`/`-1`; the computational-basis index of a configuration has
//! bit `k` set exactly when spin `k` is `-1` (qubit `k` in `|1>`).

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::rng;
use crate::{Error, Result};

/// Generator family an instance came from. Only the SK tag changes behaviour
/// (it enables the `beta < 1/4` mixing certificate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Generic,
    Regular,
    Sk,
}

impl Family {
    fn is_generic(&self) -> bool {
        *self == Family::Generic
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = Error;

    fn try_from(spins: Vec<i8>) -> Result<Self> {
        Self::new(spins)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(c: SpinConfig) -> Self {
        c.0
    }
}

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("spins must be +1 or -1"));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Configuration for basis index `index` (bit k = (1 - s_k)/2).
    pub fn from_index(index: u64, n: usize) -> Self {
        assert!(n <= 64, "index form supports at most 64 spins");
        Self((0..n).map(|k| if index >> k & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn to_index(&self) -> u64 {
        assert!(self.0.len() <= 64, "index form supports at most 64 spins");
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &s)| if s < 0 { acc | 1 << k } else { acc })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn flip(&mut self, k: usize) {
        self.0[k] = -self.0[k];
    }

    pub fn set(&mut self, k: usize, s: i8) {
        debug_assert!(s == 1 || s == -1);
        self.0[k] = s;
    }

    pub fn magnetization(&self) -> i64 {
        self.0.iter().map(|&s| s as i64).sum()
    }

    /// `0`/`1` string, character k is qubit k.
    pub fn bitstring(&self) -> String {
        self.0.iter().map(|&s| if s > 0 { '0' } else { '1' }).collect()
    }
}

/// Ising problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n: usize,
    edges: Vec<Edge>,
    fields: Vec<f64>,
    family: Family,
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    fields: Vec<f64>,
    #[serde(default, skip_serializing_if = "Family::is_generic")]
    family: Family,
}

impl IsingInstance {
    /// Builds an instance; edges are canonicalised to `i < j` and sorted.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>, fields: Vec<f64>) -> Result<Self> {
        if fields.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: fields.len() });
        }
        if fields.iter().any(|b| !b.is_finite()) {
            return Err(invalid("fields must be finite"));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (i, j, a) in edges {
            if i >= n || j >= n {
                return Err(invalid(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(invalid(format!("self-loop at vertex {i}")));
            }
            if !a.is_finite() {
                return Err(invalid(format!("coupling on ({i}, {j}) is not finite")));
            }
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            canon.push(Edge { i, j, a });
        }
        canon.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = canon.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(invalid(format!("duplicate edge ({}, {})", w[0].i, w[0].j)));
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &canon {
            adjacency[e.i].push((e.j, e.a));
            adjacency[e.j].push((e.i, e.a));
        }
        Ok(Self { n, edges: canon, fields, family: Family::Generic, adjacency })
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn neighbors(&self, k: usize) -> &[(usize, f64)] {
        &self.adjacency[k]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_fields(&self) -> bool {
        self.fields.iter().any(|&b| b != 0.0)
    }

    /// `sum |a_ij| + sum |b_i|`, an upper bound on `|energy|`.
    pub fn energy_scale(&self) -> f64 {
        self.edges.iter().map(|e| e.a.abs()).sum::<f64>()
            + self.fields.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// `sum a_ij^2 + sum b_i^2`, the variance of the energy under uniform spins.
    pub fn coupling_square_sum(&self) -> f64 {
        self.edges.iter().map(|e| e.a * e.a).sum::<f64>()
            + self.fields.iter().map(|b| b * b).sum::<f64>()
    }

    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        if config.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: config.len() });
        }
        Ok(self.energy_unchecked(config.spins()))
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> f64 {
        let mut e = 0.0;
        for edge in &self.edges {
            e -= edge.a * f64::from(s[edge.i] * s[edge.j]);
        }
        for (b, &sk) in self.fields.iter().zip(s) {
            e -= b * f64::from(sk);
        }
        e
    }

    /// `h_k = sum_j a_kj s_j + b_k`.
    pub fn local_field(&self, s: &[i8], k: usize) -> f64 {
        let mut h = self.fields[k];
        for &(j, a) in &self.adjacency[k] {
            h += a * f64::from(s[j]);
        }
        h
    }

    /// `E(s with spin k flipped) - E(s) = 2 s_k h_k`.
    pub fn flip_delta(&self, s: &[i8], k: usize) -> f64 {
        2.0 * f64::from(s[k]) * self.local_field(s, k)
    }

    /// Operator norm of the coupling matrix `A` (zero diagonal).
    ///
    /// Power iteration on `A^2` from a seeded start vector; stops when the
    /// eigen-residual drops below `1e-9` of the current estimate.
    pub fn spectral_norm(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let n = self.n;
        let mut rng = rng::seeded(0x5eed_a11c_e5ed_0001);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        normalize(&mut v);
        let mut av = vec![0.0; n];
        let mut aav = vec![0.0; n];
        let mut mu = 0.0;
        for _ in 0..1_000_000 {
            self.apply_coupling(&v, &mut av);
            self.apply_coupling(&av, &mut aav);
            mu = dot(&v, &aav);
            let residual = aav
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - mu * y).powi(2))
                .sum::<f64>()
                .sqrt();
            let norm = dot(&aav, &aav).sqrt();
            if norm == 0.0 {
                // start vector in the kernel; perturb deterministically
                v.iter_mut().enumerate().for_each(|(k, x)| *x += 1.0 / (k as f64 + 2.0));
                normalize(&mut v);
                continue;
            }
            if residual <= 1e-9 * mu.abs() {
                break;
            }
            v.iter_mut().zip(&aav).for_each(|(x, y)| *x = y / norm);
        }
        mu.max(0.0).sqrt()
    }

    fn apply_coupling(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for e in &self.edges {
            out[e.i] += e.a * x[e.j];
            out[e.j] += e.a * x[e.i];
        }
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            n: self.n,
            edges: self.edges.iter().map(|e| (e.i, e.j, e.a)).collect(),
            fields: self.fields.clone(),
            family: self.family,
        };
        serde_json::to_string(&file).expect("instance serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        Ok(Self::new(file.n, file.edges, file.fields)?.with_family(file.family))
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Uniform random simple `degree`-regular graph with all couplings equal to `sign`.
///
/// Pairing model: `n * degree` half-edges are shuffled and paired; any
/// self-loop or repeated edge rejects the whole pairing and the draw restarts.
pub fn generate_regular(n: usize, degree: usize, sign: f64, seed: u64) -> Result<IsingInstance> {
    if !(n * degree).is_multiple_of(2) {
        return Err(invalid(format!("n * degree = {} must be even", n * degree)));
    }
    if degree >= n {
        return Err(invalid(format!("degree {degree} must be below n = {n}")));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(invalid("sign must be +1 or -1"));
    }
    let mut rng = rng::seeded(seed);
    let mut points: Vec<usize> = (0..n * degree).map(|p| p / degree).collect();
    let max_attempts = 10_000_000usize / (n * degree).max(1) + 100_000;
    'attempt: for _ in 0..max_attempts {
        points.shuffle(&mut rng);
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * degree / 2);
        for pair in points.chunks_exact(2) {
            let (i, j) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if i == j {
                continue 'attempt;
            }
            edges.push((i, j));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let edges = edges.into_iter().map(|(i, j)| (i, j, sign)).collect();
        return Ok(IsingInstance::new(n, edges, vec![0.0; n])?.with_family(Family::Regular));
    }
    Err(invalid(format!(
        "pairing model found no simple {degree}-regular graph on {n} vertices"
    )))
}

/// Sherrington-Kirkpatrick instance: complete graph, `a_ij ~ N(0, 1/n)`, no fields.
pub fn generate_sk(n: usize, seed: u64) -> Result<IsingInstance> {
    if n < 2 {
        return Err(invalid("SK instances need n >= 2"));
    }
    let mut rng = rng::seeded(seed);
    let normal = Normal::new(0.0, (1.0 / n as f64).sqrt()).expect("finite std");
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, normal.sample(&mut rng)));
        }
    }
    Ok(IsingInstance::new(n, edges, vec![0.0; n])?.with_family(Family::Sk))
}

/// Random graph with each edge present with probability `density`, Gaussian
/// couplings of standard deviation `coupling_std` and Gaussian fields of
/// standard deviation `field_std`. Used for oracle cross-checks.
pub fn generate_random(
    n: usize,
    density: f64,
    coupling_std: f64,
    field_std: f64,
    seed: u64,
) -> Result<IsingInstance> {
    if !(0.0..=1.0).contains(&density) {
        return Err(invalid("edge density must lie in [0, 1]"));
    }
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                edges.push((i, j, coupling_std * z));
            }
        }
    }
    let fields = (0..n)
        .map(|_| field_std * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    IsingInstance::new(n, edges, fields)
}
