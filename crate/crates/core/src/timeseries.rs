//! Graphs from multichannel time series.
//!
//! Channels are correlated (Spearman) inside sliding windows. For each
//! channel pair the series of window correlations gets its own thresholds
//! from its quartiles: window `t` has the edge when
//! `ρ_t >= max(c, q3)` or `ρ_t <= min(-c, q1)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_table, Graph, GraphSample, VertexPair};

pub const DEFAULT_WIDTH_MS: f64 = 333.0;
pub const DEFAULT_STEP_MS: f64 = 16.66;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Samples in time-major order: one row per instant, one column per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
    sampling_rate: f64,
}

impl ChannelMatrix {
    /// Builds a matrix from per-channel columns.
    pub fn from_columns(labels: Vec<String>, columns: Vec<Vec<f64>>, sampling_rate: f64) -> Result<Self> {
        if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
            return Err(Error::param(format!("sampling rate must be positive, got {sampling_rate}")));
        }
        if labels.len() != columns.len() {
            return Err(Error::param("one label per channel required"));
        }
        if columns.len() < 2 {
            return Err(Error::param("need at least two channels"));
        }
        let len = columns[0].len();
        if columns.iter().any(|c| c.len() != len) {
            return Err(Error::param("channels differ in length"));
        }
        if columns.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::param("channel values must be finite"));
        }
        Ok(Self {
            labels,
            columns,
            sampling_rate,
        })
    }

    /// Builds a matrix from time-major rows.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>], sampling_rate: f64) -> Result<Self> {
        let c = labels.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != c) {
            return Err(Error::param(format!("row {bad} has {} values, expected {c}", rows[bad].len())));
        }
        let columns = (0..c).map(|ch| rows.iter().map(|r| r[ch]).collect()).collect();
        Self::from_columns(labels, columns, sampling_rate)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn channel_count(&self) -> usize {
        self.columns.len()
    }

    pub fn samples_per_channel(&self) -> usize {
        self.columns[0].len()
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.columns[c]
    }
}

/// Window width and start spacing, in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    pub width_ms: f64,
    pub step_ms: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            width_ms: DEFAULT_WIDTH_MS,
            step_ms: DEFAULT_STEP_MS,
        }
    }
}

impl WindowSpec {
    /// Half-open sample ranges `[start, end)` of every window fitting in
    /// `len` samples.
    ///
    /// Window `k` spans `[k step, k step + width]` milliseconds; both ends
    /// are rounded to the nearest sample independently.
    pub fn windows(&self, len: usize, sampling_rate: f64) -> Result<Vec<(usize, usize)>> {
        if !(self.width_ms > 0.0 && self.step_ms > 0.0) {
            return Err(Error::param("window width and step must be positive"));
        }
        let per_ms = sampling_rate / 1000.0;
        let to_sample = |ms: f64| (ms * per_ms).round() as usize;
        if to_sample(self.width_ms) < 2 {
            return Err(Error::param("window must span at least two samples"));
        }
        let mut out = Vec::new();
        for k in 0.. {
            let start_ms = k as f64 * self.step_ms;
            let (start, end) = (to_sample(start_ms), to_sample(start_ms + self.width_ms));
            if end > len {
                break;
            }
            out.push((start, end));
        }
        if out.is_empty() {
            return Err(Error::param(format!(
                "window of {} ms is longer than the {len}-sample series",
                self.width_ms
            )));
        }
        Ok(out)
    }
}

/// Ranks starting at 1; tied values share their mean rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // Positions i..j (0-based) share rank mean((i+1)..=j).
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman correlation: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::param("sequences differ in length"));
    }
    if x.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            found: x.len(),
        });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Window correlations for every channel pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    channels: usize,
    windows: Vec<(usize, usize)>,
    /// `series[pair slot][window]`.
    series: Vec<Vec<f64>>,
    /// Windows per pair where a channel was constant and `ρ` was set to 0.
    undefined: Vec<usize>,
}

impl CorrelationSeries {
    /// Wraps precomputed series, one per canonical pair of `channels`.
    pub fn from_series(channels: usize, series: Vec<Vec<f64>>) -> Result<Self> {
        if series.len() != pair_count(channels) {
            return Err(Error::param(format!(
                "expected {} pair series for {channels} channels, got {}",
                pair_count(channels),
                series.len()
            )));
        }
        let len = series.first().map_or(0, Vec::len);
        if series.iter().any(|s| s.len() != len) {
            return Err(Error::param("pair series differ in length"));
        }
        if series.iter().flatten().any(|r| !(-1.0..=1.0).contains(r)) {
            return Err(Error::param("correlations must lie in [-1, 1]"));
        }
        Ok(Self {
            channels,
            windows: Vec::new(),
            undefined: vec![0; series.len()],
            series,
        })
    }

    pub fn channel_count(&self) -> usize {
        self.channels
    }

    pub fn window_count(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }

    /// Sample ranges of the windows (empty for [`CorrelationSeries::from_series`]).
    pub fn windows(&self) -> &[(usize, usize)] {
        &self.windows
    }

    pub fn pair_series(&self, p: VertexPair) -> &[f64] {
        &self.series[p.index(self.channels)]
    }

    pub fn series(&self) -> &[Vec<f64>] {
        &self.series
    }

    /// Per-pair count of windows with an undefined correlation.
    pub fn undefined_counts(&self) -> &[usize] {
        &self.undefined
    }

    pub fn total_undefined(&self) -> usize {
        self.undefined.iter().sum()
    }
}

/// Spearman correlation of every channel pair inside every window.
///
/// A window where either channel is constant has no defined correlation; it
/// gets `ρ = 0` and is counted in [`CorrelationSeries::undefined_counts`].
pub fn correlation_series(m: &ChannelMatrix, w: &WindowSpec) -> Result<CorrelationSeries> {
    let windows = w.windows(m.samples_per_channel(), m.sampling_rate())?;
    let c = m.channel_count();
    let pairs = pair_table(c);
    let per_window: Vec<Vec<Option<f64>>> = windows
        .par_iter()
        .map(|&(start, end)| {
            let ranks: Vec<Vec<f64>> = (0..c)
                .map(|ch| average_ranks(&m.channel(ch)[start..end]))
                .collect();
            pairs
                .iter()
                .map(|&(i, j)| pearson(&ranks[i as usize], &ranks[j as usize]).ok())
                .collect()
        })
        .collect();

    let mut series = vec![Vec::with_capacity(windows.len()); pairs.len()];
    let mut undefined = vec![0; pairs.len()];
    for row in per_window {
        for (slot, rho) in row.into_iter().enumerate() {
            series[slot].push(rho.unwrap_or_else(|| {
                undefined[slot] += 1;
                0.0
            }));
        }
    }
    Ok(CorrelationSeries {
        channels: c,
        windows,
        series,
        undefined,
    })
}

/// Linear-interpolation quantile at position `1 + (len - 1) prob` of the
/// sorted values.
fn interpolated_quantile(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// First and third quartiles of a correlation series.
pub fn pair_quartiles(series: &[f64]) -> Result<(f64, f64)> {
    if series.len() < 4 {
        return Err(Error::SeriesTooShort {
            needed: 4,
            found: series.len(),
        });
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((interpolated_quantile(&sorted, 0.25), interpolated_quantile(&sorted, 0.75)))
}

/// The constant `c` of the edge rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSpec {
    pub c: f64,
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        Self { c: DEFAULT_THRESHOLD }
    }
}

impl ThresholdSpec {
    pub fn new(c: f64) -> Result<Self> {
        if c > 0.0 && c < 1.0 {
            Ok(Self { c })
        } else {
            Err(Error::param(format!("threshold c = {c} is outside (0, 1)")))
        }
    }

    /// Whether correlation `rho` gives an edge for quartiles `(q1, q3)`.
    #[inline]
    pub fn is_edge(&self, rho: f64, q1: f64, q3: f64) -> bool {
        rho >= self.c.max(q3) || rho <= (-self.c).min(q1)
    }
}

/// One graph per window; pair thresholds come from that pair's quartiles.
pub fn build_graphs(cs: &CorrelationSeries, th: &ThresholdSpec) -> Result<GraphSample> {
    ThresholdSpec::new(th.c)?;
    let windows = cs.window_count();
    let mut graphs = vec![Graph::try_empty(cs.channels)?; windows];
    for (slot, series) in cs.series.iter().enumerate() {
        let (q1, q3) = pair_quartiles(series)?;
        for (t, &rho) in series.iter().enumerate() {
            if th.is_edge(rho, q1, q3) {
                graphs[t].set_index(slot, true);
            }
        }
    }
    GraphSample::new(graphs)
}

/// A pair selected into a summary graph with its frequency in the sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFrequency {
    pub pair: VertexPair,
    pub count: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryGraph {
    pub graph: Graph,
    /// Selected pairs, most frequent first; ties in lexicographic order.
    pub edges: Vec<EdgeFrequency>,
}

/// The `k` most frequent pairs of a sample.
pub fn summary_graph(s: &GraphSample, k: usize) -> Result<SummaryGraph> {
    let v = s.vertex_count();
    let e = pair_count(v);
    if k > e {
        return Err(Error::param(format!("k = {k} exceeds the {e} available pairs")));
    }
    let counts = s.edge_counts();
    let mut order: Vec<usize> = (0..e).collect();
    // Stable sort keeps slot (lexicographic) order among equal counts.
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]));
    let n = s.len() as f64;
    let mut graph = Graph::empty(v);
    let edges = order[..k]
        .iter()
        .map(|&slot| {
            graph.set_index(slot, true);
            EdgeFrequency {
                pair: VertexPair::from_index(slot, v),
                count: counts[slot] as usize,
                frequency: f64::from(counts[slot]) / n,
            }
        })
        .collect();
    Ok(SummaryGraph { graph, edges })
}
