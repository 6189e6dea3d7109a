//! Anderson model on trees: potential laws, population dynamics for the random
//! `ζ` recursion, inverse moments and scans of the set where `|Im ζ|` stays large.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is in the build graph
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{solve_green, ConeSystem};
use crate::graph::Graph;
use crate::{Error, Result, C64};

/// `|ζ|` above this aborts the population dynamics.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Single-site law `ν` of the potential, supported in `[−A, A]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PotentialLaw {
    /// Uniform on `[−A, A]`.
    Uniform { a: f64 },
    /// Symmetric triangular density on `[−A, A]` with its peak at 0.
    Triangular { a: f64 },
    /// `1` with probability `p`, else `0`. Not Hölder continuous.
    Bernoulli { p: f64 },
    /// Dirac mass at `c`. Not Hölder continuous.
    PointMass { c: f64 },
}

impl PotentialLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Uniform { a } | Self::Triangular { a } => a > 0.0 && a.is_finite(),
            Self::Bernoulli { p } => (0.0..=1.0).contains(&p),
            Self::PointMass { c } => c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid potential law {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Triangular { .. } => "triangular",
            Self::Bernoulli { .. } => "bernoulli",
            Self::PointMass { .. } => "point_mass",
        }
    }

    /// Smallest `A` with support in `[−A, A]`.
    pub fn support_bound(&self) -> f64 {
        match *self {
            Self::Uniform { a } | Self::Triangular { a } => a,
            Self::Bernoulli { p } => {
                if p > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::PointMass { c } => c.abs(),
        }
    }

    /// `(C_ν, b)` with `ν(J) ≤ C_ν |J|^b` for every interval `J`, when such
    /// constants exist.
    pub fn holder(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Uniform { a } => Some((0.5 / a, 1.0)),
            Self::Triangular { a } => Some((1.0 / a, 1.0)),
            Self::Bernoulli { .. } | Self::PointMass { .. } => None,
        }
    }

    /// Whether the law is Hölder continuous with compact support.
    pub fn is_holder(&self) -> bool {
        self.holder().is_some()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { a } => a * (2.0 * rng.gen::<f64>() - 1.0),
            Self::Triangular { a } => a * (rng.gen::<f64>() + rng.gen::<f64>() - 1.0),
            Self::Bernoulli { p } => f64::from(u8::from(rng.gen::<f64>() < p)),
            Self::PointMass { c } => c,
        }
    }

    /// `ν((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a } => ((x + a) / (2.0 * a)).clamp(0.0, 1.0),
            Self::Triangular { a } => {
                if x <= -a {
                    0.0
                } else if x <= 0.0 {
                    (x + a) * (x + a) / (2.0 * a * a)
                } else if x < a {
                    1.0 - (a - x) * (a - x) / (2.0 * a * a)
                } else {
                    1.0
                }
            }
            Self::Bernoulli { p } => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            Self::PointMass { c } => f64::from(u8::from(x >= c)),
        }
    }

    /// `ν((−∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            Self::Bernoulli { p } => {
                if x <= 0.0 {
                    0.0
                } else if x <= 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            Self::PointMass { c } => f64::from(u8::from(x > c)),
            _ => self.cdf(x),
        }
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `law`.
pub fn ks_distance(samples: &[f64], law: &PotentialLaw) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        d = d.max((law.cdf_left(s[i]) - i as f64 / n).abs()).max(((j + 1) as f64 / n - law.cdf(s[i])).abs());
        i = j + 1;
    }
    d
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Largest deviation `ν̂(J) − C_ν|J|^b` over the bins of a histogram of `samples`
/// on `[−A, A]`; non-positive up to sampling noise for Hölder laws.
pub fn holder_excess(samples: &[f64], law: &PotentialLaw, bins: usize) -> Option<f64> {
    let (cn, b) = law.holder()?;
    let a = law.support_bound();
    let width = 2.0 * a / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let k = (((x + a) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let bound = cn * width.powf(b);
    Some(counts.iter().map(|&c| c as f64 / samples.len() as f64 - bound).fold(f64::NEG_INFINITY, f64::max))
}

/// Pools of samples of `ζ_j` for every label, evolved by the random recursion
/// `ζ′_j = 1/(γ − W_j − εw − Σ ζ_children)`, `w ~ ν`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZetaPopulation {
    pub gamma: C64,
    pub epsilon: f64,
    pub law: PotentialLaw,
    /// One pool per label, all of the same size.
    pub pools: Vec<Vec<C64>>,
    pub generations: u64,
    pub seed: u64,
}

impl ZetaPopulation {
    /// Pools filled with the disorder-free solution.
    pub fn start(c: &ConeSystem, law: PotentialLaw, epsilon: f64, gamma: C64, pool_size: usize, seed: u64) -> Result<Self> {
        law.validate()?;
        if pool_size == 0 {
            return Err(Error::InvalidParameter("pool size must be positive".into()));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("disorder strength {epsilon} must be non-negative")));
        }
        let clean = solve_green(c, gamma)?;
        let pools = clean.zeta.iter().map(|&z| vec![z; pool_size]).collect();
        Ok(Self { gamma, epsilon, law, pools, generations: 0, seed })
    }

    pub fn pool_size(&self) -> usize {
        self.pools[0].len()
    }

    /// Runs `n` more generations. Generation `g` draws from ChaCha stream `g` of
    /// the seed, so runs split into several calls reproduce a single long run.
    pub fn advance(&mut self, c: &ConeSystem, n: u64) -> Result<()> {
        if c.label_count() != self.pools.len() {
            return Err(Error::DimensionMismatch { expected: self.pools.len(), got: c.label_count() });
        }
        let size = self.pool_size();
        for _ in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(self.generations);
            let mut next = Vec::with_capacity(self.pools.len());
            for j in 0..c.label_count() {
                let base = self.gamma - c.potential()[j];
                // Each child slot reads the source pool through its own random
                // permutation, so every sample is used equally often.
                let perms: Vec<(usize, Vec<u32>)> = c
                    .row(j)
                    .iter()
                    .flat_map(|&(k, cnt)| core::iter::repeat_n(k, cnt as usize))
                    .map(|k| {
                        let mut p: Vec<u32> = (0..size as u32).collect();
                        p.shuffle(&mut rng);
                        (k, p)
                    })
                    .collect();
                let mut pool = Vec::with_capacity(size);
                for i in 0..size {
                    let s: C64 = perms.iter().map(|(k, p)| self.pools[*k][p[i] as usize]).sum();
                    let w = self.epsilon * self.law.sample(&mut rng);
                    let z = 1.0 / (base - w - s);
                    if !(z.norm() <= DIVERGENCE_BOUND) {
                        return Err(Error::Divergence(z.norm()));
                    }
                    if !(z.im < 0.0) {
                        return Err(Error::ZeroImaginaryPart(format!("sample with Im ζ = {} in label {j}", z.im)));
                    }
                    pool.push(z);
                }
                next.push(pool);
            }
            self.pools = next;
            self.generations += 1;
        }
        Ok(())
    }

    /// `max |ζ − mean|` within the pool of `label`.
    pub fn spread(&self, label: usize) -> f64 {
        let m = self.mean(label);
        self.pools[label].iter().map(|z| (z - m).norm()).fold(0.0, f64::max)
    }

    pub fn mean(&self, label: usize) -> C64 {
        self.pools[label].iter().sum::<C64>() / self.pool_size() as f64
    }

    /// `Im ζ` samples of `label`.
    pub fn imaginary_parts(&self, label: usize) -> Vec<f64> {
        self.pools[label].iter().map(|z| z.im).collect()
    }

    /// Fraction of samples of `label` with `|Im ζ| > delta`.
    pub fn fraction_above(&self, label: usize, delta: f64) -> f64 {
        self.pools[label].iter().filter(|z| z.im.abs() > delta).count() as f64 / self.pool_size() as f64
    }
}

/// Starts from the disorder-free solution and runs `generations` steps.
pub fn zeta_population(
    c: &ConeSystem,
    law: PotentialLaw,
    epsilon: f64,
    gamma: C64,
    pool_size: usize,
    generations: u64,
    seed: u64,
) -> Result<ZetaPopulation> {
    let mut pop = ZetaPopulation::start(c, law, epsilon, gamma, pool_size, seed)?;
    pop.advance(c, generations)?;
    Ok(pop)
}

/// Monte Carlo estimate with a bootstrap 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    /// `|a − b| ≤ h_a + h_b`.
    pub fn agrees_with(&self, other: &Estimate) -> bool {
        (self.value - other.value).abs() <= self.half_width + other.half_width
    }
}

const BOOTSTRAP_ROUNDS: usize = 1000;

fn bootstrap(values: &[f64], seed: u64) -> Estimate {
    let n = values.len();
    let value = values.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let mu = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / (means.len() - 1) as f64;
    Estimate { value, half_width: 1.96 * var.sqrt() }
}

fn moment_terms(pop: &ZetaPopulation, label: usize, s: f64) -> Result<Vec<f64>> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("moment order {s} must be non-negative")));
    }
    let pool = pop.pools.get(label).ok_or_else(|| Error::InvalidParameter(format!("no label {label}")))?;
    if pool.iter().any(|z| z.im == 0.0) {
        return Err(Error::ZeroImaginaryPart(format!("pool of label {label} has a real sample")));
    }
    Ok(pool.iter().map(|z| z.im.abs().powf(-s)).collect())
}

/// `E|Im ζ_label|^{−s}` with a bootstrap half-width.
pub fn inverse_moment(pop: &ZetaPopulation, label: usize, s: f64, seed: u64) -> Result<Estimate> {
    Ok(bootstrap(&moment_terms(pop, label, s)?, seed))
}

/// `E(Σ_{o′∼o} |Im ζ̂_o(o′)|^{−s})` under the root law of `c`. The half-width
/// combines the per-label half-widths linearly.
pub fn inverse_moment_neighbours(c: &ConeSystem, pop: &ZetaPopulation, s: f64, seed: u64) -> Result<Estimate> {
    let mut coef = vec![0.0; c.label_count()];
    for r in c.roots() {
        for &(k, n) in &r.children {
            coef[k] += r.weight * n as f64;
        }
    }
    let mut est = Estimate { value: 0.0, half_width: 0.0 };
    for (k, &w) in coef.iter().enumerate().filter(|(_, w)| **w > 0.0) {
        let e = bootstrap(&moment_terms(pop, k, s)?, seed.wrapping_add(k as u64));
        est.value += w * e.value;
        est.half_width += w * e.half_width;
    }
    Ok(est)
}

/// Independent populations with the same parameters; replica `r` uses seed
/// `seed + r·φ` with `φ` the 64-bit golden-ratio constant.
pub fn replica_populations(
    c: &ConeSystem,
    law: PotentialLaw,
    epsilon: f64,
    gamma: C64,
    pool_size: usize,
    generations: u64,
    seed: u64,
    replicas: usize,
) -> Result<Vec<ZetaPopulation>> {
    if replicas < 2 {
        return Err(Error::InvalidParameter("at least two replicas are needed".into()));
    }
    (0..replicas)
        .map(|r| zeta_population(c, law, epsilon, gamma, pool_size, generations, replica_seed(seed, r)))
        .collect()
}

pub fn replica_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `E|Im ζ_label|^{−s}` averaged over replicas, with the half-width from a
/// bootstrap over replica means.
///
/// Samples inside one pool share ancestors, so the pool as a whole fluctuates
/// around the stationary law; [`inverse_moment`] does not see this, replicas do.
pub fn inverse_moment_replicas(pops: &[ZetaPopulation], label: usize, s: f64, seed: u64) -> Result<Estimate> {
    let means: Vec<f64> = pops
        .iter()
        .map(|p| moment_terms(p, label, s).map(|t| t.iter().sum::<f64>() / t.len() as f64))
        .collect::<Result<_>>()?;
    if means.len() < 2 {
        return Err(Error::InvalidParameter("at least two replicas are needed".into()));
    }
    Ok(bootstrap(&means, seed))
}

/// Population parameters for scans.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoolParams {
    pub pool_size: usize,
    pub generations: u64,
    pub seed: u64,
}

impl Default for PoolParams {
    fn default() -> Self {
        Self { pool_size: 100_000, generations: 200, seed: 0 }
    }
}

/// One `(λ, η, label)` cell of [`sigma_ac_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanCell {
    pub lambda: f64,
    pub eta: f64,
    pub label: usize,
    pub frac_above_delta: f64,
    pub marked: bool,
}

/// Marks `λ` when `P(|Im ζ_j(λ+iη)| > δ) > δ` for every label `j` and every `η`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanReport {
    pub cells: Vec<ScanCell>,
    /// `(λ, marked)` per grid point.
    pub marked: Vec<(f64, bool)>,
}

/// Cells for one `λ`; [`sigma_ac_scan`] runs this over the grid.
pub fn sigma_ac_cells(
    c: &ConeSystem,
    law: PotentialLaw,
    epsilon: f64,
    delta: f64,
    lambda: f64,
    etas: &[f64],
    pool: PoolParams,
) -> Result<Vec<ScanCell>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("δ = {delta} outside (0, 1)")));
    }
    let mut cells = Vec::new();
    for &eta in etas {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!("η = {eta} outside (0, 1)")));
        }
        let pop = zeta_population(c, law, epsilon, C64::new(lambda, eta), pool.pool_size, pool.generations, pool.seed)?;
        for label in 0..c.label_count() {
            let f = pop.fraction_above(label, delta);
            cells.push(ScanCell { lambda, eta, label, frac_above_delta: f, marked: f > delta });
        }
    }
    Ok(cells)
}

pub fn sigma_ac_scan(
    c: &ConeSystem,
    law: PotentialLaw,
    epsilon: f64,
    delta: f64,
    lambdas: &[f64],
    etas: &[f64],
    pool: PoolParams,
) -> Result<ScanReport> {
    let mut cells = Vec::new();
    for &l in lambdas {
        cells.extend(sigma_ac_cells(c, law, epsilon, delta, l, etas, pool)?);
    }
    Ok(assemble_scan(lambdas, cells))
}

/// Per-`λ` verdicts from cells computed elsewhere.
pub fn assemble_scan(lambdas: &[f64], cells: Vec<ScanCell>) -> ScanReport {
    let marked = lambdas
        .iter()
        .map(|&l| (l, cells.iter().filter(|c| c.lambda == l).all(|c| c.marked)))
        .collect();
    ScanReport { cells, marked }
}

/// `G` with i.i.d. potential `ε w_x`, `w_x ~ ν`, drawn from a ChaCha stream seeded by `seed`.
pub fn finite_anderson_attach(g: &Graph, law: PotentialLaw, epsilon: f64, seed: u64) -> Result<Graph> {
    law.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = (0..g.vertex_count()).map(|_| epsilon * law.sample(&mut rng)).collect();
    g.clone().with_potential(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::neighbour_to_cone;
    use crate::generators::random_regular;
    use crate::kernels::regular_tree_zeta;

    fn tree(q: u32) -> ConeSystem {
        ConeSystem::from_dense(&[vec![0, q + 1], vec![0, q]], 0).unwrap()
    }

    #[test]
    fn clean_population_is_the_fixed_point() {
        let gamma = C64::new(0.0, 0.01);
        let law = PotentialLaw::Uniform { a: 1.0 };
        let pop = zeta_population(&tree(2), law, 0.0, gamma, 2000, 100, 3).unwrap();
        let z = regular_tree_zeta(2.0, gamma);
        assert!(pop.spread(1) < 1e-10);
        assert!((pop.mean(1) - z).norm() < 1e-10);
        let pm = zeta_population(&tree(2), PotentialLaw::PointMass { c: 0.0 }, 1e-3, gamma, 2000, 100, 3).unwrap();
        assert_eq!(pm.pools, pop.pools);
    }

    #[test]
    fn weak_disorder_stays_close() {
        let gamma = C64::new(0.0, 0.01);
        let pop = zeta_population(&tree(2), PotentialLaw::Uniform { a: 1.0 }, 1e-3, gamma, 10_000, 150, 5).unwrap();
        let target = -1.0 / 2f64.sqrt();
        assert!((pop.mean(1).im - target).abs() < 0.05 * target.abs());
        assert!(pop.pools.iter().flatten().all(|z| z.im < 0.0));
    }

    #[test]
    fn one_more_generation_barely_moves_the_law() {
        // Pools share ancestors, so single seeds sit above the independent-sample
        // level now and then; the median over seeds does not.
        let c = tree(2);
        let n = 10_000;
        let mut ds: Vec<f64> = (0..7)
            .map(|seed| {
                let pop = zeta_population(&c, PotentialLaw::Uniform { a: 1.0 }, 0.3, C64::new(0.5, 0.5), n, 150, seed).unwrap();
                let mut next = pop.clone();
                next.advance(&c, 1).unwrap();
                ks_two_sample(&pop.imaginary_parts(1), &next.imaginary_parts(1))
            })
            .collect();
        ds.sort_by(f64::total_cmp);
        assert!(ds[3] < 2.0 / (n as f64).sqrt(), "{ds:?}");
    }

    #[test]
    fn replicas_see_pool_level_noise() {
        let c = tree(2);
        let gamma = C64::new(0.0, 0.05);
        let pops = replica_populations(&c, PotentialLaw::Uniform { a: 1.0 }, 0.1, gamma, 2000, 60, 3, 6).unwrap();
        assert_eq!(pops.len(), 6);
        assert_ne!(pops[0], pops[1]);
        let r = inverse_moment_replicas(&pops, 1, 2.0, 0).unwrap();
        let single = inverse_moment(&pops[0], 1, 2.0, 0).unwrap();
        // Scaled to one pool, the spread between replicas exceeds the in-pool bootstrap.
        assert!(r.half_width * 6f64.sqrt() > 1.5 * single.half_width, "{r:?} {single:?}");
        assert!(replica_populations(&c, PotentialLaw::Uniform { a: 1.0 }, 0.1, gamma, 2000, 1, 3, 1).is_err());
    }

    #[test]
    fn split_runs_reproduce_single_run() {
        let c = tree(2);
        let gamma = C64::new(0.4, 0.05);
        let law = PotentialLaw::Triangular { a: 1.0 };
        let one = zeta_population(&c, law, 0.3, gamma, 500, 20, 9).unwrap();
        let mut two = zeta_population(&c, law, 0.3, gamma, 500, 12, 9).unwrap();
        two.advance(&c, 8).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn inverse_moments() {
        let gamma = C64::new(0.0, 1e-9);
        let c = tree(2);
        let pop = zeta_population(&c, PotentialLaw::Uniform { a: 1.0 }, 0.0, gamma, 1000, 5, 1).unwrap();
        let e = inverse_moment(&pop, 1, 2.0, 0).unwrap();
        assert!((e.value - 2.0).abs() < 1e-6 && e.half_width < 1e-9);
        let nb = inverse_moment_neighbours(&c, &pop, 2.0, 0).unwrap();
        assert!((nb.value - 6.0).abs() < 1e-6);
        assert!((inverse_moment(&pop, 1, 0.0, 0).unwrap().value - 1.0).abs() < 1e-15);
        assert!((inverse_moment_neighbours(&c, &pop, 0.0, 0).unwrap().value - 3.0).abs() < 1e-15);
        // Growth in s at small disorder.
        let noisy = zeta_population(&c, PotentialLaw::Uniform { a: 1.0 }, 0.05, C64::new(0.0, 0.01), 5000, 60, 2).unwrap();
        let m: Vec<f64> = [2.0, 4.0, 8.0].iter().map(|&s| inverse_moment(&noisy, 1, s, 1).unwrap().value).collect();
        assert!(m[0] < m[1] && m[1] < m[2] && m[2].is_finite());
    }

    #[test]
    fn scan_marks_the_clean_band() {
        let c = tree(2);
        let lambdas: Vec<f64> = (0..=8).map(|i| -2.0 + 0.5 * i as f64).collect();
        let pool = PoolParams { pool_size: 200, generations: 5, seed: 0 };
        let law = PotentialLaw::Uniform { a: 1.0 };
        let rep = sigma_ac_scan(&c, law, 0.0, 0.1, &lambdas, &[0.1, 0.01, 0.001], pool).unwrap();
        assert!(rep.marked.iter().all(|m| m.1));
        let out = sigma_ac_scan(&c, law, 0.0, 0.1, &[3.5], &[0.01], pool).unwrap();
        assert!(!out.marked[0].1);
        let high = sigma_ac_scan(&c, law, 0.0, 0.999, &lambdas, &[0.01], pool).unwrap();
        assert!(high.marked.iter().all(|m| !m.1));
        assert!(sigma_ac_scan(&c, law, 0.0, 1.0, &lambdas, &[0.01], pool).is_err());
        // A two-colour system runs with per-label pools.
        let bi = neighbour_to_cone(&[vec![0, 3], vec![4, 0]], 0).unwrap();
        let cells = sigma_ac_cells(&bi, law, 0.1, 0.05, 1.5, &[0.05], pool).unwrap();
        assert_eq!(cells.len(), 3);
    }

    #[test]
    fn attached_potentials() {
        let g = random_regular(200, 3, 1).unwrap();
        let law = PotentialLaw::Uniform { a: 1.0 };
        let zero = finite_anderson_attach(&g, law, 0.0, 4).unwrap();
        assert!(zero.potential().unwrap().iter().all(|&w| w == 0.0));
        let small = finite_anderson_attach(&g, law, 0.1, 4).unwrap();
        assert!(small.potential().unwrap().iter().all(|&w| w.abs() <= 0.1));
        let ks: Vec<f64> = [500usize, 2000, 8000]
            .iter()
            .map(|&n| {
                let g = random_regular(n, 3, 2).unwrap();
                let w = finite_anderson_attach(&g, law, 1.0, 7).unwrap();
                ks_distance(w.potential().unwrap(), &law)
            })
            .collect();
        assert!(ks[0] > ks[2], "{ks:?}");
        assert!(ks[2] < 1.63 / (8000f64).sqrt() * 1.5);
        let tri = PotentialLaw::Triangular { a: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s: Vec<f64> = (0..20_000).map(|_| tri.sample(&mut rng)).collect();
        assert!(ks_distance(&s, &tri) < 0.02);
        assert!(holder_excess(&s, &tri, 20).unwrap() < 0.0);
        let b = PotentialLaw::Bernoulli { p: 0.3 };
        assert!(!b.is_holder() && holder_excess(&s, &b, 10).is_none());
        let bs: Vec<f64> = (0..20_000).map(|_| b.sample(&mut rng)).collect();
        assert!(ks_distance(&bs, &b) < 0.02);
    }
}
