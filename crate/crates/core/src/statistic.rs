//! The W statistics.
//!
//! The one-sample statistic is the largest gap, over all graphs `g`, between
//! the mean distance from `g` to the sample and the expected distance from `g`
//! to a draw of the null distribution. It reduces to the 1-norm between the
//! sample's mean graph and the null's edge marginals, so it costs
//! `O(v^2 n)`. The two-sample statistic is the same with the second sample's
//! mean graph in place of the null marginals.
//!
//! Values are carried as exact ratios whenever the inputs allow it: the
//! two-sample statistic is always `num / (n m)`, and the one-sample statistic
//! is `num / (n d)` when the null marginals share a denominator `d`.
//! Permutation and Monte Carlo tests compare these values for ties, which
//! float summation order would otherwise break.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::{pair_count, EdgeMarginals, Graph, GraphSample};

/// Largest `v` accepted by the exhaustive maximizers (`2^10` graphs).
pub const MAX_BRUTE_FORCE_V: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    OneSample,
    TwoSample,
}

/// A nonnegative rational `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn cmp_exact(self, other: Ratio) -> Option<Ordering> {
        let lhs = self.num.checked_mul(other.den)?;
        let rhs = other.num.checked_mul(self.den)?;
        Some(lhs.cmp(&rhs))
    }
}

/// A W statistic together with the sample sizes that produced it.
#[derive(Clone, Copy, Debug)]
pub struct WValue {
    kind: SampleKind,
    n: usize,
    m: Option<usize>,
    value: f64,
    exact: Option<Ratio>,
}

impl WValue {
    fn exact(kind: SampleKind, n: usize, m: Option<usize>, ratio: Ratio) -> Self {
        Self {
            kind,
            n,
            m,
            value: ratio.to_f64(),
            exact: Some(ratio),
        }
    }

    fn approx(kind: SampleKind, n: usize, m: Option<usize>, value: f64) -> Self {
        Self {
            kind,
            n,
            m,
            value,
            exact: None,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn ratio(&self) -> Option<Ratio> {
        self.exact
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    /// `(n, m)`; `m` is `None` for one-sample values.
    pub fn sample_sizes(&self) -> (usize, Option<usize>) {
        (self.n, self.m)
    }

    /// Exact comparison when both sides are exact, float comparison otherwise.
    pub fn compare(&self, other: &WValue) -> Ordering {
        if let (Some(a), Some(b)) = (self.exact, other.exact) {
            if let Some(ord) = a.cmp_exact(b) {
                return ord;
            }
        }
        self.value.total_cmp(&other.value)
    }
}

impl PartialEq for WValue {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl PartialOrd for WValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.compare(other))
    }
}

/// The signed discrepancy `w(g)` at one graph.
#[derive(Clone, Copy, Debug)]
pub struct Discrepancy {
    pub value: f64,
    /// `(num, den)` with `w(g) = num / den`, when exact.
    pub exact: Option<(i128, u128)>,
}

impl Discrepancy {
    /// `|w(g)|` as a statistic-compatible value.
    fn magnitude(&self, kind: SampleKind, n: usize, m: Option<usize>) -> WValue {
        match self.exact {
            Some((num, den)) => WValue::exact(
                kind,
                n,
                m,
                Ratio {
                    num: num.unsigned_abs(),
                    den,
                },
            ),
            None => WValue::approx(kind, n, m, self.value.abs()),
        }
    }
}

/// Mean Hamming distance from `g` to the members of `s`.
pub fn mean_distance(s: &GraphSample, g: &Graph) -> Result<f64> {
    check_v(s.vertex_count(), g.vertex_count())?;
    let total: usize = s
        .iter()
        .map(|h| g.hamming_distance(h))
        .sum::<Result<usize>>()?;
    Ok(total as f64 / s.len() as f64)
}

/// One-sample W: `sum_ij |ḡ_ij - π'_ij|`.
pub fn w_one_sample(s: &GraphSample, null: &EdgeMarginals) -> Result<WValue> {
    null.check_v(s.vertex_count())?;
    Ok(w_one_sample_counts(&s.edge_counts(), s.len(), null))
}

/// One-sample W from per-pair edge counts of a sample of size `n`.
pub fn w_one_sample_counts(counts: &[u32], n: usize, null: &EdgeMarginals) -> WValue {
    debug_assert_eq!(counts.len(), null.values().len());
    match null.exact() {
        Some(exact) => {
            let den = u128::from(exact.den);
            let n128 = n as u128;
            let num = counts
                .iter()
                .zip(&exact.num)
                .map(|(&k, &a)| (u128::from(k) * den).abs_diff(n128 * u128::from(a)))
                .sum();
            WValue::exact(SampleKind::OneSample, n, None, Ratio { num, den: n128 * den })
        }
        None => {
            let nf = n as f64;
            let value = counts
                .iter()
                .zip(null.values())
                .map(|(&k, &p)| (f64::from(k) / nf - p).abs())
                .sum();
            WValue::approx(SampleKind::OneSample, n, None, value)
        }
    }
}

/// Two-sample W: `sum_ij |ḡ_ij - ḡ'_ij|`, exact over `n m`.
pub fn w_two_sample(s: &GraphSample, t: &GraphSample) -> Result<WValue> {
    check_v(s.vertex_count(), t.vertex_count())?;
    Ok(w_two_sample_counts(
        &s.edge_counts(),
        s.len(),
        &t.edge_counts(),
        t.len(),
    ))
}

/// Two-sample W from per-pair edge counts.
pub fn w_two_sample_counts(k: &[u32], n: usize, l: &[u32], m: usize) -> WValue {
    debug_assert_eq!(k.len(), l.len());
    let (n64, m64) = (n as u64, m as u64);
    let num: u64 = k
        .iter()
        .zip(l)
        .map(|(&a, &b)| (m64 * u64::from(a)).abs_diff(n64 * u64::from(b)))
        .sum();
    WValue::exact(
        SampleKind::TwoSample,
        n,
        Some(m),
        Ratio {
            num: u128::from(num),
            den: u128::from(n64 * m64),
        },
    )
}

/// `w(g) = sum_ij (2 g_ij - 1)(π'_ij - ḡ_ij)`.
pub fn discrepancy(s: &GraphSample, null: &EdgeMarginals, g: &Graph) -> Result<Discrepancy> {
    check_v(s.vertex_count(), g.vertex_count())?;
    null.check_v(s.vertex_count())?;
    let counts = s.edge_counts();
    let n = s.len();
    let sign = |e: usize| if g.get_index(e) { 1i128 } else { -1 };
    Ok(match null.exact() {
        Some(exact) => {
            let den = i128::from(exact.den);
            let num = (0..counts.len())
                .map(|e| {
                    sign(e) * (n as i128 * i128::from(exact.num[e]) - den * i128::from(counts[e]))
                })
                .sum::<i128>();
            let d = (n as u128) * u128::from(exact.den);
            Discrepancy {
                value: num as f64 / d as f64,
                exact: Some((num, d)),
            }
        }
        None => {
            let value = (0..counts.len())
                .map(|e| sign(e) as f64 * (null.values()[e] - f64::from(counts[e]) / n as f64))
                .sum();
            Discrepancy { value, exact: None }
        }
    })
}

/// Two-sample `w(g) = D̄_s(g) - D̄_t(g) = sum_ij (2 g_ij - 1)(ḡ'_ij - ḡ_ij)`.
pub fn two_sample_discrepancy(s: &GraphSample, t: &GraphSample, g: &Graph) -> Result<Discrepancy> {
    check_v(s.vertex_count(), t.vertex_count())?;
    check_v(s.vertex_count(), g.vertex_count())?;
    let (k, l) = (s.edge_counts(), t.edge_counts());
    let (n, m) = (s.len() as i128, t.len() as i128);
    let num = (0..k.len())
        .map(|e| {
            let sign = if g.get_index(e) { 1 } else { -1 };
            sign * (n * i128::from(l[e]) - m * i128::from(k[e]))
        })
        .sum::<i128>();
    let den = (n * m) as u128;
    Ok(Discrepancy {
        value: num as f64 / den as f64,
        exact: Some((num, den)),
    })
}

/// The maximizers `(g*, g**)` of `w` and `-w`.
///
/// `g*_ij = 1` iff `ḡ_ij <= π'_ij`; `g**_ij = 1` iff `ḡ_ij >= π'_ij`.
pub fn argmax_graphs(s: &GraphSample, null: &EdgeMarginals) -> Result<(Graph, Graph)> {
    let v = s.vertex_count();
    null.check_v(v)?;
    let counts = s.edge_counts();
    let n = s.len() as u128;
    let mut lower = Graph::empty(v);
    let mut upper = Graph::empty(v);
    for (e, &k) in counts.iter().enumerate() {
        let ord = match null.exact() {
            Some(exact) => {
                (u128::from(k) * u128::from(exact.den)).cmp(&(n * u128::from(exact.num[e])))
            }
            None => (f64::from(k) / n as f64).total_cmp(&null.values()[e]),
        };
        lower.set_index(e, ord != Ordering::Greater);
        upper.set_index(e, ord != Ordering::Less);
    }
    Ok((lower, upper))
}

/// `|w(g)|` as a one-sample value; handy next to [`argmax_graphs`].
pub fn discrepancy_magnitude(s: &GraphSample, null: &EdgeMarginals, g: &Graph) -> Result<WValue> {
    Ok(discrepancy(s, null, g)?.magnitude(SampleKind::OneSample, s.len(), None))
}

/// One-sample W by maximizing over every graph on `v <= 5` vertices.
///
/// Evaluates `|D̄(g) - π'D(g, ·)|` directly: mean distances are kept per
/// sample member and updated along a Gray-code walk over `2^E` graphs, and
/// `π'D(g, ·)` uses the per-edge expansion `sum_ij (g - 2 g π' + π')`.
/// Returns the maximum and the first maximizer met on the walk.
pub fn w_brute_force(s: &GraphSample, null: &EdgeMarginals) -> Result<(WValue, Graph)> {
    let v = s.vertex_count();
    null.check_v(v)?;
    check_enumerable(v)?;
    let n = s.len();
    let e = pair_count(v);

    match null.exact() {
        Some(exact) => {
            let d = i128::from(exact.den);
            let a: Vec<i128> = exact.num.iter().map(|&x| i128::from(x)).collect();
            let expected_distance = |g: &Graph| -> i128 {
                (0..e)
                    .map(|ij| {
                        let gij = i128::from(g.get_index(ij));
                        d * gij - 2 * gij * a[ij] + a[ij]
                    })
                    .sum()
            };
            let (best, graph) = gray_code_max(s, e, |g, total| {
                d * total as i128 - n as i128 * expected_distance(g)
            });
            let ratio = Ratio {
                num: best.unsigned_abs(),
                den: n as u128 * exact.den as u128,
            };
            Ok((WValue::exact(SampleKind::OneSample, n, None, ratio), graph))
        }
        None => {
            let p = null.values();
            let expected_distance = |g: &Graph| -> f64 {
                (0..e)
                    .map(|ij| {
                        let gij = f64::from(u8::from(g.get_index(ij)));
                        gij - 2.0 * gij * p[ij] + p[ij]
                    })
                    .sum()
            };
            let mut best = -1.0f64;
            let mut arg = Graph::empty(v);
            walk_gray_code(s, e, |g, total| {
                let w = (total as f64 / n as f64 - expected_distance(g)).abs();
                if w > best {
                    best = w;
                    arg = g.clone();
                }
            });
            Ok((WValue::approx(SampleKind::OneSample, n, None, best), arg))
        }
    }
}

/// Two-sample W by maximizing `|D̄_s(g) - D̄_t(g)|` over every graph on `v <= 5`.
pub fn w_brute_force_two_sample(s: &GraphSample, t: &GraphSample) -> Result<(WValue, Graph)> {
    let v = s.vertex_count();
    check_v(v, t.vertex_count())?;
    check_enumerable(v)?;
    let (n, m) = (s.len(), t.len());
    let e = pair_count(v);
    let both: Vec<Graph> = s.iter().chain(t.iter()).cloned().collect();
    let pooled = GraphSample::new(both)?;
    let mut dist: Vec<i128> = pooled.iter().map(|h| h.edge_count() as i128).collect();
    let mut g = Graph::empty(v);
    let score = |dist: &[i128]| -> i128 {
        let ds: i128 = dist[..n].iter().sum();
        let dt: i128 = dist[n..].iter().sum();
        m as i128 * ds - n as i128 * dt
    };
    let mut best = score(&dist).abs();
    let mut arg = g.clone();
    for step in 1u64..(1u64 << e) {
        let bit = step.trailing_zeros() as usize;
        g.flip_index(bit);
        let now = g.get_index(bit);
        for (dk, h) in dist.iter_mut().zip(pooled.iter()) {
            *dk += if h.get_index(bit) == now { -1 } else { 1 };
        }
        let w = score(&dist).abs();
        if w > best {
            best = w;
            arg = g.clone();
        }
    }
    let ratio = Ratio {
        num: best as u128,
        den: (n * m) as u128,
    };
    Ok((WValue::exact(SampleKind::TwoSample, n, Some(m), ratio), arg))
}

/// Walks all graphs in Gray-code order, handing each one with the summed
/// distance to the sample members.
fn walk_gray_code(s: &GraphSample, e: usize, mut visit: impl FnMut(&Graph, usize)) {
    let mut g = Graph::empty(s.vertex_count());
    let mut dist: Vec<usize> = s.iter().map(Graph::edge_count).collect();
    let mut total: usize = dist.iter().sum();
    visit(&g, total);
    for step in 1u64..(1u64 << e) {
        let bit = step.trailing_zeros() as usize;
        g.flip_index(bit);
        let now = g.get_index(bit);
        for (dk, h) in dist.iter_mut().zip(s.iter()) {
            if h.get_index(bit) == now {
                *dk -= 1;
                total -= 1;
            } else {
                *dk += 1;
                total += 1;
            }
        }
        visit(&g, total);
    }
}

fn gray_code_max(
    s: &GraphSample,
    e: usize,
    mut scaled_w: impl FnMut(&Graph, usize) -> i128,
) -> (i128, Graph) {
    let mut best: Option<(i128, Graph)> = None;
    walk_gray_code(s, e, |g, total| {
        let w = scaled_w(g, total).abs();
        if best.as_ref().is_none_or(|(b, _)| w > *b) {
            best = Some((w, g.clone()));
        }
    });
    best.expect("the walk visits at least one graph")
}

fn check_enumerable(v: usize) -> Result<()> {
    if v > MAX_BRUTE_FORCE_V {
        return Err(Error::EnumerationRefused {
            v,
            max: MAX_BRUTE_FORCE_V,
        });
    }
    Ok(())
}

fn check_v(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
