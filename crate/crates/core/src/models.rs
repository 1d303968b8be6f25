//! Graph distributions: Erdős–Rényi, modified Erdős–Rényi and the
//! edge-triangle / edge-2-star exponential random graph models.
//!
//! ERGMs have `π(g | θ) ∝ exp(θ1 n_e(g) + θ2 s(g))` with `s` the triangle or
//! 2-star count. Small models (`v <= 6`) are normalized exactly by summing
//! over all `2^E` graphs; larger ones are sampled with a single-edge-flip
//! Metropolis–Hastings chain.

use log::warn;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_probability, Error, Result};
use crate::graph::{pair_count, pair_table, EdgeMarginals, Graph, GraphSample, NeighborRows, VertexPair};
use crate::rng::stream_rng;

/// Largest `v` accepted by [`ergm_enumerate`] (`2^15` graphs).
pub const MAX_ENUMERATION_V: usize = 6;

/// Densities outside `[LOW, 1 - LOW]` are reported as near-degenerate.
pub const DEGENERATE_DENSITY: f64 = 0.02;

/// Second sufficient statistic of an ERGM.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgmStats {
    /// `S(g) = (n_e, n_t)`.
    EdgeTriangle,
    /// `S(g) = (n_e, n_s)`, 2-stars counted once per center and unordered
    /// neighbor pair.
    EdgeTwoStar,
}

impl ErgmStats {
    /// The second statistic of `g`.
    pub fn count(self, g: &Graph) -> usize {
        match self {
            ErgmStats::EdgeTriangle => g.triangle_count(),
            ErgmStats::EdgeTwoStar => g.two_star_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Er {
        p: f64,
    },
    /// Pairs in `modified` are Bernoulli(`p`); the rest Bernoulli(`p0`).
    ModifiedEr {
        p0: f64,
        p: f64,
        modified: Vec<VertexPair>,
    },
    Ergm {
        stats: ErgmStats,
        theta: [f64; 2],
    },
}

/// A graph distribution on `v` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    v: usize,
    kind: ModelKind,
}

impl ModelSpec {
    pub fn er(v: usize, p: f64) -> Result<Self> {
        Self::new(v, ModelKind::Er { p })
    }

    pub fn modified_er(v: usize, p0: f64, p: f64, modified: Vec<VertexPair>) -> Result<Self> {
        Self::new(v, ModelKind::ModifiedEr { p0, p, modified })
    }

    pub fn ergm(v: usize, stats: ErgmStats, theta: [f64; 2]) -> Result<Self> {
        Self::new(v, ModelKind::Ergm { stats, theta })
    }

    pub fn new(v: usize, kind: ModelKind) -> Result<Self> {
        if v < 2 {
            return Err(Error::param(format!("vertex count must be >= 2, got {v}")));
        }
        match &kind {
            ModelKind::Er { p } => check_probability(*p)?,
            ModelKind::ModifiedEr { p0, p, modified } => {
                check_probability(*p0)?;
                check_probability(*p)?;
                for pair in modified {
                    VertexPair::checked(pair.i(), pair.j(), v)?;
                }
            }
            ModelKind::Ergm { theta, .. } => {
                if !theta.iter().all(|t| t.is_finite()) {
                    return Err(Error::param("ERGM parameters must be finite"));
                }
            }
        }
        Ok(Self { v, kind })
    }

    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Exact edge marginals, when they can be computed.
    ///
    /// ERGMs above [`MAX_ENUMERATION_V`] vertices have no exact marginals and
    /// return [`Error::EnumerationRefused`].
    pub fn exact_marginals(&self) -> Result<EdgeMarginals> {
        match &self.kind {
            ModelKind::Er { p } => er_marginals(self.v, *p),
            ModelKind::ModifiedEr { p0, p, modified } => {
                let mut values = vec![*p0; pair_count(self.v)];
                for pair in modified {
                    values[pair.index(self.v)] = *p;
                }
                EdgeMarginals::new(self.v, values)
            }
            ModelKind::Ergm { stats, theta } => {
                Ok(ergm_enumerate(self.v, *stats, *theta)?.marginals())
            }
        }
    }

    /// Draws `n` graphs. `mcmc` is only consulted for ERGMs.
    pub fn sample<R: Rng>(&self, n: usize, mcmc: &McmcConfig, rng: &mut R) -> Result<GraphSample> {
        match &self.kind {
            ModelKind::Er { p } => sample_er(self.v, *p, n, rng),
            ModelKind::ModifiedEr { .. } => sample_modified_er(self, n, rng),
            ModelKind::Ergm { .. } => ergm_mh_sample(self, n, mcmc, rng),
        }
    }
}

/// `π_ij = p` for all pairs.
pub fn er_marginals(v: usize, p: f64) -> Result<EdgeMarginals> {
    EdgeMarginals::constant(v, p)
}

/// `n` i.i.d. Erdős–Rényi graphs.
pub fn sample_er<R: Rng>(v: usize, p: f64, n: usize, rng: &mut R) -> Result<GraphSample> {
    check_probability(p)?;
    check_n(n)?;
    let e = pair_count(v);
    let graphs = (0..n)
        .map(|_| {
            let mut g = Graph::try_empty(v)?;
            for slot in 0..e {
                if rng.random::<f64>() < p {
                    g.set_index(slot, true);
                }
            }
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    GraphSample::new(graphs)
}

/// `n` i.i.d. graphs from a modified Erdős–Rényi spec; the modified pairs are
/// the same for every draw.
pub fn sample_modified_er<R: Rng>(spec: &ModelSpec, n: usize, rng: &mut R) -> Result<GraphSample> {
    let ModelKind::ModifiedEr { p0, p, modified } = &spec.kind else {
        return Err(Error::param("expected a modified Erdős–Rényi spec"));
    };
    check_n(n)?;
    let v = spec.v;
    let mut prob = vec![*p0; pair_count(v)];
    for pair in modified {
        prob[pair.index(v)] = *p;
    }
    let graphs = (0..n)
        .map(|_| {
            let mut g = Graph::empty(v);
            for (slot, &q) in prob.iter().enumerate() {
                if rng.random::<f64>() < q {
                    g.set_index(slot, true);
                }
            }
            g
        })
        .collect();
    GraphSample::new(graphs)
}

/// Uniform random subset of `floor(q E + 1/2)` canonical pairs, sorted.
pub fn select_modified_pairs<R: Rng>(v: usize, q: f64, rng: &mut R) -> Result<Vec<VertexPair>> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param(format!("fraction q = {q} is outside [0, 1]")));
    }
    let e = pair_count(v);
    let k = modified_pair_count(v, q);
    let mut slots = sample_indices(rng, e, k).into_vec();
    slots.sort_unstable();
    Ok(slots.into_iter().map(|s| VertexPair::from_index(s, v)).collect())
}

/// `round_half_up(q E)`.
pub fn modified_pair_count(v: usize, q: f64) -> usize {
    let e = pair_count(v);
    ((q * e as f64 + 0.5).floor() as usize).min(e)
}

/// Unnormalized log-probability `θ · S(g)`.
pub fn ergm_log_weight(g: &Graph, stats: ErgmStats, theta: [f64; 2]) -> f64 {
    theta[0] * g.edge_count() as f64 + theta[1] * stats.count(g) as f64
}

/// An ERGM normalized over all `2^E` graphs of `v <= 6` vertices.
///
/// `probabilities[b]` is the probability of the graph whose slot bitset is
/// `b` (see [`Graph::from_bits`]).
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    v: usize,
    probabilities: Vec<f64>,
    log_partition: f64,
}

impl ExactDistribution {
    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, g: &Graph) -> f64 {
        self.probabilities[g.to_bits() as usize]
    }

    /// `ln z(θ)`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Exact `π_ij`.
    pub fn marginals(&self) -> EdgeMarginals {
        let e = pair_count(self.v);
        let mut acc = vec![0.0f64; e];
        for (bits, &p) in self.probabilities.iter().enumerate() {
            let mut b = bits;
            while b != 0 {
                acc[b.trailing_zeros() as usize] += p;
                b &= b - 1;
            }
        }
        for x in &mut acc {
            *x = x.clamp(0.0, 1.0);
        }
        EdgeMarginals::new(self.v, acc).expect("clamped marginals are probabilities")
    }

    /// Expected edge density `E[n_e] / E`.
    pub fn density(&self) -> f64 {
        self.marginals().density()
    }
}

/// Exact ERGM distribution by full enumeration, normalized with log-sum-exp.
pub fn ergm_enumerate(v: usize, stats: ErgmStats, theta: [f64; 2]) -> Result<ExactDistribution> {
    if v > MAX_ENUMERATION_V {
        return Err(Error::EnumerationRefused {
            v,
            max: MAX_ENUMERATION_V,
        });
    }
    ModelSpec::ergm(v, stats, theta)?;
    let total = 1usize << pair_count(v);
    let log_weights: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|bits| ergm_log_weight(&Graph::from_bits(v, bits as u64), stats, theta))
        .collect();
    let peak = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale: f64 = log_weights.iter().map(|&lw| (lw - peak).exp()).sum();
    let log_partition = peak + scale.ln();
    let probabilities = log_weights
        .iter()
        .map(|&lw| (lw - log_partition).exp())
        .collect();
    Ok(ExactDistribution {
        v,
        probabilities,
        log_partition,
    })
}

/// Chain schedule in sweeps; one sweep is `E` proposed flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub thinning: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: 200,
            thinning: 10,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::param("thinning must be at least one sweep"));
        }
        Ok(())
    }
}

/// Single-edge-flip Metropolis–Hastings chain for an ERGM.
#[derive(Clone, Debug)]
pub struct ErgmChain {
    v: usize,
    stats: ErgmStats,
    theta: [f64; 2],
    pairs: Vec<(u32, u32)>,
    graph: Graph,
    rows: NeighborRows,
    degree: Vec<usize>,
    proposed: u64,
    accepted: u64,
}

impl ErgmChain {
    pub fn new(spec: &ModelSpec, start: Graph) -> Result<Self> {
        let ModelKind::Ergm { stats, theta } = spec.kind else {
            return Err(Error::param("expected an ERGM spec"));
        };
        if start.vertex_count() != spec.v {
            return Err(Error::DimensionMismatch {
                expected: spec.v,
                found: start.vertex_count(),
            });
        }
        Ok(Self {
            v: spec.v,
            stats,
            theta,
            pairs: pair_table(spec.v),
            rows: start.neighbor_rows(),
            degree: start.degrees(),
            graph: start,
            proposed: 0,
            accepted: 0,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Fraction of proposals accepted so far.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Change of `(n_e, s)` if slot `e` were flipped.
    fn delta(&self, e: usize) -> (f64, f64) {
        let (i, j) = self.pairs[e];
        let (i, j) = (i as usize, j as usize);
        let present = self.graph.get_index(e);
        let sign = if present { -1.0 } else { 1.0 };
        let second = match self.stats {
            ErgmStats::EdgeTriangle => self.rows.common(i, j) as f64,
            ErgmStats::EdgeTwoStar => {
                let others = self.degree[i] + self.degree[j];
                if present {
                    (others - 2) as f64
                } else {
                    others as f64
                }
            }
        };
        (sign, sign * second)
    }

    /// One proposal: flip a uniform pair, accept with `min(1, exp(θ · ΔS))`.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> bool {
        let e = rng.random_range(0..self.pairs.len());
        let (d_edges, d_second) = self.delta(e);
        let log_ratio = self.theta[0] * d_edges + self.theta[1] * d_second;
        self.proposed += 1;
        let accept = log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp();
        if accept {
            let (i, j) = self.pairs[e];
            let (i, j) = (i as usize, j as usize);
            let adding = !self.graph.get_index(e);
            self.graph.flip_index(e);
            self.rows.toggle(i, j);
            if adding {
                self.degree[i] += 1;
                self.degree[j] += 1;
            } else {
                self.degree[i] -= 1;
                self.degree[j] -= 1;
            }
            self.accepted += 1;
        }
        accept
    }

    pub fn sweep<R: Rng>(&mut self, rng: &mut R) {
        for _ in 0..self.pairs.len() {
            self.step(rng);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.v
    }
}

/// `n` retained draws from one ERGM chain.
///
/// The chain starts from a uniform random graph, runs `burn_in` sweeps, then
/// keeps the current graph after every `thinning` sweeps.
pub fn ergm_mh_sample<R: Rng>(
    spec: &ModelSpec,
    n: usize,
    mcmc: &McmcConfig,
    rng: &mut R,
) -> Result<GraphSample> {
    mcmc.validate()?;
    check_n(n)?;
    let start = sample_er(spec.v, 0.5, 1, rng)?.into_graphs().remove(0);
    let mut chain = ErgmChain::new(spec, start)?;
    for _ in 0..mcmc.burn_in {
        chain.sweep(rng);
    }
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..mcmc.thinning {
            chain.sweep(rng);
        }
        draws.push(chain.graph().clone());
    }
    GraphSample::new(draws)
}

/// Mean edge density at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityPoint {
    pub theta: [f64; 2],
    pub density: f64,
    /// Exact density from enumeration, for `v <= 6`.
    pub exact_density: Option<f64>,
    /// Density within [`DEGENERATE_DENSITY`] of 0 or 1.
    pub degenerate: bool,
}

/// Edge density of the ERGM at every point of `grid`, `n` MCMC draws each.
///
/// Grid point `k` runs on generator stream `k` of `seed`.
pub fn edge_density_sweep(
    v: usize,
    stats: ErgmStats,
    grid: &[[f64; 2]],
    n: usize,
    mcmc: &McmcConfig,
    seed: u64,
) -> Result<Vec<DensityPoint>> {
    if grid.is_empty() {
        return Err(Error::param("parameter grid is empty"));
    }
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(k, &theta)| {
            let spec = ModelSpec::ergm(v, stats, theta)?;
            let mut rng = stream_rng(seed, k as u64);
            let sample = ergm_mh_sample(&spec, n, mcmc, &mut rng)?;
            let e = pair_count(v) as f64;
            let density =
                sample.iter().map(|g| g.edge_count() as f64 / e).sum::<f64>() / n as f64;
            let exact_density = if v <= MAX_ENUMERATION_V {
                Some(ergm_enumerate(v, stats, theta)?.density())
            } else {
                None
            };
            let degenerate = !(DEGENERATE_DENSITY..=1.0 - DEGENERATE_DENSITY).contains(&density);
            Ok(DensityPoint {
                theta,
                density,
                exact_density,
                degenerate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for p in points.iter().filter(|p| p.degenerate) {
        warn!(
            "near-degenerate ERGM at theta = ({}, {}): density {:.4}",
            p.theta[0], p.theta[1], p.density
        );
    }
    Ok(points)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("sample size must be at least 1"));
    }
    Ok(())
}

/// `exp(x) / (1 + exp(x))`.
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
