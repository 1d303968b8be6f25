//! Inference with the W statistic.
//!
//! One-sample tests compare W against the empirical `1 - α` quantile of its
//! null distribution, simulated from the null model. Two-sample tests use a
//! permutation p-value. The per-edge exact binomial test with Bonferroni
//! correction is provided as a baseline.
//!
//! Every replication and permutation round runs on its own generator stream
//! (see [`crate::rng`]), so results do not depend on the rayon pool size.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{check_probability, Error, Result};
use crate::graph::{EdgeMarginals, GraphSample};
use crate::models::{McmcConfig, ModelSpec};
use crate::rng::{block_stream, stream_rng};
use crate::statistic::{w_one_sample, w_one_sample_counts, w_two_sample, w_two_sample_counts, WValue};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_PERMUTATIONS: usize = 1000;
pub const DEFAULT_QUANTILE_REPLICATIONS: usize = 10_000;
pub const DEFAULT_POWER_REPLICATIONS: usize = 2000;
pub const MIN_REPLICATIONS: usize = 100;

/// Where the null's edge marginals came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MarginalsSource {
    /// Closed form or exact enumeration.
    Exact,
    /// Supplied by the caller, with a free-form description.
    Supplied(String),
}

/// A null model together with its edge marginals.
#[derive(Clone, Debug)]
pub struct NullHypothesis {
    spec: ModelSpec,
    marginals: EdgeMarginals,
    source: MarginalsSource,
}

impl NullHypothesis {
    /// Null with exact marginals. ERGMs too large to enumerate are refused
    /// with a configuration error; use [`NullHypothesis::with_marginals`].
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let marginals = spec.exact_marginals().map_err(|err| match err {
            Error::EnumerationRefused { v, max } => Error::Configuration(format!(
                "ERGM null on {v} vertices has no exact marginals (enumeration stops at {max}); \
                 supply a marginals estimate"
            )),
            other => other,
        })?;
        Ok(Self {
            spec,
            marginals,
            source: MarginalsSource::Exact,
        })
    }

    pub fn with_marginals(
        spec: ModelSpec,
        marginals: EdgeMarginals,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        marginals.check_v(spec.vertex_count())?;
        Ok(Self {
            spec,
            marginals,
            source: MarginalsSource::Supplied(provenance.into()),
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn marginals(&self) -> &EdgeMarginals {
        &self.marginals
    }

    pub fn source(&self) -> &MarginalsSource {
        &self.source
    }
}

/// Monte Carlo settings shared by the simulation-based procedures.
#[derive(Clone, Copy, Debug)]
pub struct MonteCarlo {
    pub replications: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
}

impl MonteCarlo {
    pub fn new(replications: usize, seed: u64) -> Self {
        Self {
            replications,
            seed,
            mcmc: McmcConfig::default(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::param(format!(
                "need at least {MIN_REPLICATIONS} replications, got {}",
                self.replications
            )));
        }
        self.mcmc.validate()
    }
}

/// What the statistic was compared against.
#[derive(Clone, Copy, Debug)]
pub enum Reference {
    CriticalValue(WValue),
    PValue(f64),
}

#[derive(Clone, Debug)]
pub struct TestResult {
    pub statistic: WValue,
    pub alpha: f64,
    pub reference: Reference,
    pub reject: bool,
    pub replications: usize,
    pub seed: u64,
    /// Provenance of caller-supplied null marginals, if any.
    pub marginals_source: Option<String>,
}

impl TestResult {
    pub fn p_value(&self) -> Option<f64> {
        match self.reference {
            Reference::PValue(p) => Some(p),
            Reference::CriticalValue(_) => None,
        }
    }

    pub fn critical_value(&self) -> Option<WValue> {
        match self.reference {
            Reference::CriticalValue(q) => Some(q),
            Reference::PValue(_) => None,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha = {alpha} is outside (0, 1)")))
    }
}

/// `R` draws of the one-sample W under the null, in replication order.
///
/// Replication `r` uses stream `block_stream(block, r)`.
pub fn null_w_values(
    null: &NullHypothesis,
    n: usize,
    mc: &MonteCarlo,
    block: u32,
) -> Result<Vec<WValue>> {
    mc.check()?;
    simulate_w(null.spec(), null.marginals(), n, mc, block)
}

fn simulate_w(
    model: &ModelSpec,
    marginals: &EdgeMarginals,
    n: usize,
    mc: &MonteCarlo,
    block: u32,
) -> Result<Vec<WValue>> {
    (0..mc.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(mc.seed, block_stream(block, r as u32));
            let s = model.sample(n, &mc.mcmc, &mut rng)?;
            Ok(w_one_sample_counts(&s.edge_counts(), n, marginals))
        })
        .collect()
}

/// Order statistic `ceil((1 - α) R)` (1-based) of the simulated values.
pub fn empirical_quantile(values: &[WValue], alpha: f64) -> Result<WValue> {
    check_alpha(alpha)?;
    if values.is_empty() {
        return Err(Error::param("no simulated values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.compare(b));
    let r = sorted.len();
    // (1 - α) R is often an integer that floating point lands just above.
    let rank = (((1.0 - alpha) * r as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(r) - 1])
}

/// Critical value `q_{1-α}` of the one-sample W for samples of size `n`.
pub fn null_quantile_mc(
    null: &NullHypothesis,
    n: usize,
    alpha: f64,
    mc: &MonteCarlo,
) -> Result<WValue> {
    check_alpha(alpha)?;
    empirical_quantile(&null_w_values(null, n, mc, 0)?, alpha)
}

/// One-sample test: reject when `W > q_{1-α}`.
pub fn one_sample_test(
    s: &GraphSample,
    null: &NullHypothesis,
    alpha: f64,
    mc: &MonteCarlo,
) -> Result<TestResult> {
    let statistic = w_one_sample(s, null.marginals())?;
    let critical = null_quantile_mc(null, s.len(), alpha, mc)?;
    Ok(TestResult {
        reject: statistic.compare(&critical).is_gt(),
        statistic,
        alpha,
        reference: Reference::CriticalValue(critical),
        replications: mc.replications,
        seed: mc.seed,
        marginals_source: match null.source() {
            MarginalsSource::Exact => None,
            MarginalsSource::Supplied(p) => Some(p.clone()),
        },
    })
}

/// How permuted statistics equal to the observed one are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieRule {
    /// `W_perm >= W_obs`.
    #[default]
    Inclusive,
    /// `W_perm > W_obs`.
    Strict,
}

#[derive(Clone, Copy, Debug)]
pub struct PermutationConfig {
    pub permutations: usize,
    pub seed: u64,
    pub alpha: f64,
    pub ties: TieRule,
    /// Report `(1 + count) / (1 + R)` instead of `count / R`.
    pub add_one: bool,
}

impl PermutationConfig {
    pub fn new(permutations: usize, seed: u64) -> Self {
        Self {
            permutations,
            seed,
            alpha: DEFAULT_ALPHA,
            ties: TieRule::default(),
            add_one: false,
        }
    }
}

/// Per-pair membership bitsets over a pooled sample: bit `k` of column `e`
/// is set when pooled graph `k` contains pair `e`.
struct EdgeColumns {
    words: usize,
    bits: Vec<u64>,
}

impl EdgeColumns {
    fn new(pooled: &[&crate::graph::Graph], e: usize) -> Self {
        let words = pooled.len().div_ceil(64);
        let mut bits = vec![0u64; e * words];
        for (k, g) in pooled.iter().enumerate() {
            for slot in g.edge_indices() {
                bits[slot * words + k / 64] |= 1u64 << (k % 64);
            }
        }
        Self { words, bits }
    }

    fn counts_into(&self, mask: &[u64], out: &mut [u32]) {
        for (slot, c) in out.iter_mut().enumerate() {
            let col = &self.bits[slot * self.words..(slot + 1) * self.words];
            *c = col.iter().zip(mask).map(|(a, b)| (a & b).count_ones()).sum();
        }
    }
}

/// Two-sample permutation test.
///
/// Each round shuffles the pooled `n + m` graphs and splits them into
/// pseudo-samples of sizes `n` and `m`. The p-value is the fraction of rounds
/// whose W reaches the observed one (see [`TieRule`]).
pub fn two_sample_permutation_test(
    s: &GraphSample,
    t: &GraphSample,
    cfg: &PermutationConfig,
) -> Result<TestResult> {
    check_alpha(cfg.alpha)?;
    if cfg.permutations < MIN_REPLICATIONS {
        return Err(Error::param(format!(
            "need at least {MIN_REPLICATIONS} permutations, got {}",
            cfg.permutations
        )));
    }
    let observed = w_two_sample(s, t)?;
    let (n, m) = (s.len(), t.len());
    let e = s.pair_count();
    let pooled: Vec<_> = s.iter().chain(t.iter()).collect();
    let columns = EdgeColumns::new(&pooled, e);
    let total: Vec<u32> = {
        let mut k = s.edge_counts();
        for (a, b) in k.iter_mut().zip(t.edge_counts()) {
            *a += b;
        }
        k
    };

    let hits: usize = (0..cfg.permutations)
        .into_par_iter()
        .map_init(
            || (vec![0u32; e], vec![0u32; e], (0..n + m).collect::<Vec<usize>>()),
            |(first, second, order), r| {
                let mut rng = stream_rng(cfg.seed, r as u64);
                order.sort_unstable();
                order.shuffle(&mut rng);
                let mut mask = vec![0u64; columns.words];
                for &k in &order[..n] {
                    mask[k / 64] |= 1u64 << (k % 64);
                }
                columns.counts_into(&mask, first);
                for ((b, &a), &tot) in second.iter_mut().zip(first.iter()).zip(&total) {
                    *b = tot - a;
                }
                let w = w_two_sample_counts(first, n, second, m);
                let ord = w.compare(&observed);
                usize::from(match cfg.ties {
                    TieRule::Inclusive => ord.is_ge(),
                    TieRule::Strict => ord.is_gt(),
                })
            },
        )
        .sum();

    let p_value = if cfg.add_one {
        (1 + hits) as f64 / (1 + cfg.permutations) as f64
    } else {
        hits as f64 / cfg.permutations as f64
    };
    Ok(TestResult {
        statistic: observed,
        alpha: cfg.alpha,
        reference: Reference::PValue(p_value),
        reject: p_value <= cfg.alpha,
        replications: cfg.permutations,
        seed: cfg.seed,
        marginals_source: None,
    })
}

/// Binomial(n, p0) probability masses for `0..=n`.
fn binomial_pmf(n: u64, p0: f64) -> Vec<f64> {
    if p0 == 0.0 || p0 == 1.0 {
        let mut pmf = vec![0.0; n as usize + 1];
        pmf[if p0 == 0.0 { 0 } else { n as usize }] = 1.0;
        return pmf;
    }
    let (lp, lq) = (p0.ln(), (1.0 - p0).ln());
    let mut ln_fact = vec![0.0f64; n as usize + 1];
    for i in 1..=n as usize {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    (0..=n as usize)
        .map(|k| {
            let ln_choose = ln_fact[n as usize] - ln_fact[k] - ln_fact[n as usize - k];
            (ln_choose + k as f64 * lp + (n as usize - k) as f64 * lq).exp()
        })
        .collect()
}

/// Relative slack when matching probabilities of equal-likelihood outcomes.
const PMF_TIE_SLACK: f64 = 1.0 + 1e-7;

fn min_likelihood_pvalues(pmf: &[f64]) -> Vec<f64> {
    // Normalizing by the computed total keeps "every outcome" at exactly 1.
    let total: f64 = pmf.iter().sum();
    pmf.iter()
        .map(|&pk| {
            let cut = pk * PMF_TIE_SLACK;
            (pmf.iter().filter(|&&pi| pi <= cut).sum::<f64>() / total).min(1.0)
        })
        .collect()
}

/// Exact two-sided binomial p-value (minimum-likelihood method): the total
/// Binomial(n, p0) mass of outcomes no more likely than `k`.
pub fn binom_two_sided_pvalue(k: u64, n: u64, p0: f64) -> Result<f64> {
    check_probability(p0)?;
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds n = {n}")));
    }
    Ok(min_likelihood_pvalues(&binomial_pmf(n, p0))[k as usize])
}

/// Outcome of the per-edge Bonferroni baseline.
#[derive(Clone, Debug)]
pub struct BonferroniResult {
    /// Per-pair exact two-sided p-values, slot order.
    pub p_values: Vec<f64>,
    pub alpha: f64,
    /// `alpha / E`.
    pub threshold: f64,
    pub reject: bool,
}

impl BonferroniResult {
    pub fn min_p_value(&self) -> f64 {
        self.p_values.iter().copied().fold(1.0, f64::min)
    }
}

/// Per-pair p-value tables keyed by the null probability.
struct BinomialTables {
    n: u64,
    tables: Vec<(u64, Vec<f64>)>,
}

impl BinomialTables {
    fn new(n: usize, marginals: &EdgeMarginals) -> Self {
        let mut tables: Vec<(u64, Vec<f64>)> = Vec::new();
        for &p in marginals.values() {
            if !tables.iter().any(|(bits, _)| *bits == p.to_bits()) {
                tables.push((p.to_bits(), min_likelihood_pvalues(&binomial_pmf(n as u64, p))));
            }
        }
        Self { n: n as u64, tables }
    }

    fn p_value(&self, k: u32, p: f64) -> f64 {
        debug_assert!(u64::from(k) <= self.n);
        let bits = p.to_bits();
        let table = &self
            .tables
            .iter()
            .find(|(b, _)| *b == bits)
            .expect("table built for every marginal")
            .1;
        table[k as usize]
    }
}

fn bonferroni_from_counts(
    counts: &[u32],
    marginals: &EdgeMarginals,
    tables: &BinomialTables,
    alpha: f64,
) -> BonferroniResult {
    let threshold = alpha / counts.len() as f64;
    let p_values: Vec<f64> = counts
        .iter()
        .zip(marginals.values())
        .map(|(&k, &p)| tables.p_value(k, p))
        .collect();
    let reject = p_values.iter().any(|&p| p <= threshold);
    BonferroniResult {
        p_values,
        alpha,
        threshold,
        reject,
    }
}

/// Exact binomial test per pair; reject globally iff some p-value is at most
/// `alpha / E`.
pub fn bonferroni_edge_test(
    s: &GraphSample,
    null_marginals: &EdgeMarginals,
    alpha: f64,
) -> Result<BonferroniResult> {
    check_alpha(alpha)?;
    null_marginals.check_v(s.vertex_count())?;
    let tables = BinomialTables::new(s.len(), null_marginals);
    Ok(bonferroni_from_counts(&s.edge_counts(), null_marginals, &tables, alpha))
}

/// Power at one alternative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerPoint {
    pub parameter: f64,
    /// Rejection rate of the W test.
    pub power: f64,
    /// Rejection rate of the Bonferroni baseline, when requested.
    pub power_bonferroni: Option<f64>,
    pub replications: usize,
}

impl PowerPoint {
    /// Binomial standard error of `power`.
    pub fn standard_error(&self) -> f64 {
        (self.power * (1.0 - self.power) / self.replications as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PowerConfig {
    /// Sample size per replication.
    pub n: usize,
    pub alpha: f64,
    /// Replications per alternative (`M`).
    pub replications: usize,
    /// Replications for the null quantile.
    pub quantile_replications: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
    pub bonferroni: bool,
}

/// One-sample power curve.
///
/// The critical value is simulated once (stream block 0); alternative `k`
/// then draws `M` samples on block `k + 1` and records how often W exceeds
/// it, optionally alongside the Bonferroni baseline on the same samples.
pub fn power_curve(
    null: &NullHypothesis,
    alternatives: &[(f64, ModelSpec)],
    cfg: &PowerConfig,
) -> Result<Vec<PowerPoint>> {
    check_alpha(cfg.alpha)?;
    if cfg.replications < MIN_REPLICATIONS {
        return Err(Error::param(format!(
            "need at least {MIN_REPLICATIONS} replications per point, got {}",
            cfg.replications
        )));
    }
    let v = null.spec().vertex_count();
    if let Some((_, alt)) = alternatives.iter().find(|(_, a)| a.vertex_count() != v) {
        return Err(Error::DimensionMismatch {
            expected: v,
            found: alt.vertex_count(),
        });
    }
    let quantile_mc = MonteCarlo {
        replications: cfg.quantile_replications,
        seed: cfg.seed,
        mcmc: cfg.mcmc,
    };
    let critical = null_quantile_mc(null, cfg.n, cfg.alpha, &quantile_mc)?;
    let tables = cfg
        .bonferroni
        .then(|| BinomialTables::new(cfg.n, null.marginals()));

    alternatives
        .iter()
        .enumerate()
        .map(|(k, (parameter, alt))| {
            let block = k as u32 + 1;
            let outcomes: Vec<(bool, bool)> = (0..cfg.replications)
                .into_par_iter()
                .map(|r| {
                    let mut rng = stream_rng(cfg.seed, block_stream(block, r as u32));
                    let s = alt.sample(cfg.n, &cfg.mcmc, &mut rng)?;
                    let counts = s.edge_counts();
                    let w = w_one_sample_counts(&counts, cfg.n, null.marginals());
                    let bc = tables.as_ref().is_some_and(|t| {
                        bonferroni_from_counts(&counts, null.marginals(), t, cfg.alpha).reject
                    });
                    Ok((w.compare(&critical).is_gt(), bc))
                })
                .collect::<Result<_>>()?;
            let rate = |f: fn(&(bool, bool)) -> bool| {
                outcomes.iter().filter(|o| f(o)).count() as f64 / cfg.replications as f64
            };
            Ok(PowerPoint {
                parameter: *parameter,
                power: rate(|o| o.0),
                power_bonferroni: cfg.bonferroni.then(|| rate(|o| o.1)),
                replications: cfg.replications,
            })
        })
        .collect()
}
