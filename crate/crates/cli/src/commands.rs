use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{Context, Result};
use graphw_core::format::{
    read_channel_csv, read_graph_sample, read_marginals, write_edge_table, write_graph_sample, Base,
};
use graphw_core::models::{edge_density_sweep, select_modified_pairs, ErgmStats, McmcConfig};
use graphw_core::rng::stream_rng;
use graphw_core::testing::{
    one_sample_test, power_curve, two_sample_permutation_test, MonteCarlo, NullHypothesis,
    PermutationConfig, PowerConfig, Reference, TestResult, TieRule,
};
use graphw_core::timeseries::{
    build_graphs, correlation_series, summary_graph, ThresholdSpec, WindowSpec,
};
use graphw_core::{GraphSample, ModelSpec, VertexPair};

use crate::args::{
    BuildArgs, DensityArgs, McmcArgs, ModelName, NullName, PowerArgs, SampleArgs, StatsName,
    SummaryArgs, TestArgs,
};
use crate::output::Sink;

/// Random stream reserved for choosing modified pairs; simulation streams
/// count up from zero.
const SELECTION_STREAM: u64 = u64::MAX;

/// Bad flag combination; exits with the usage code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn need<T>(value: Option<T>, flag: &str, context: &str) -> Result<T> {
    value.ok_or_else(|| UsageError(format!("{context} requires {flag}")).into())
}

fn base(b: u8) -> Base {
    if b == 1 {
        Base::One
    } else {
        Base::Zero
    }
}

fn mcmc(m: &McmcArgs) -> McmcConfig {
    McmcConfig {
        burn_in: m.burn_in,
        thinning: m.thinning,
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn read_sample(path: &Path) -> Result<GraphSample> {
    read_graph_sample(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn manifest_comments(sink: &Sink) -> Vec<String> {
    sink.manifest_reference()
        .map(|m| format!("manifest={m}"))
        .into_iter()
        .collect()
}

/// CSV body with an optional leading `# manifest=` line.
fn csv_body(sink: &Sink, header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut body = Vec::new();
    for c in manifest_comments(sink) {
        writeln!(body, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(&mut body);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    drop(w);
    Ok(body)
}

fn stats(model: ModelName) -> Option<ErgmStats> {
    match model {
        ModelName::ErgmTriangle => Some(ErgmStats::EdgeTriangle),
        ModelName::Ergm2star => Some(ErgmStats::EdgeTwoStar),
        ModelName::Er | ModelName::ModifiedEr => None,
    }
}

fn modified_pairs(v: usize, q: f64, seed: u64) -> Result<Vec<VertexPair>> {
    Ok(select_modified_pairs(v, q, &mut stream_rng(seed, SELECTION_STREAM))?)
}

fn pair_list(pairs: &[VertexPair], b: Base) -> String {
    let o = b.offset();
    pairs
        .iter()
        .map(|p| format!("{}-{}", p.i() + o, p.j() + o))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn sample(a: &SampleArgs, seed: u64, sink: &Sink) -> Result<()> {
    let b = base(a.base);
    let mut comments = manifest_comments(sink);
    let spec = match a.model {
        ModelName::Er => ModelSpec::er(a.v, need(a.p, "--p", "--model er")?)?,
        ModelName::ModifiedEr => {
            let p = need(a.p, "--p", "--model modified-er")?;
            let q = need(a.q, "--q", "--model modified-er")?;
            let pairs = modified_pairs(a.v, q, seed)?;
            comments.push(format!("modified pairs: {}", pair_list(&pairs, b)));
            ModelSpec::modified_er(a.v, a.p0, p, pairs)?
        }
        ModelName::ErgmTriangle | ModelName::Ergm2star => {
            let t1 = need(a.theta1, "--theta1", "an ERGM")?;
            let t2 = need(a.theta2, "--theta2", "an ERGM")?;
            ModelSpec::ergm(a.v, stats(a.model).unwrap(), [t1, t2])?
        }
    };
    let s = spec.sample(a.n, &mcmc(&a.mcmc), &mut stream_rng(seed, 0))?;
    let mut body = Vec::new();
    write_graph_sample(&mut body, &s, b, &comments)?;
    sink.write(&body)?;
    let edges: usize = s.edge_counts().iter().map(|&k| k as usize).sum();
    writeln!(
        sink.human(),
        "sampled {} graphs on {} vertices ({} edges in total)",
        s.len(),
        a.v,
        edges
    )?;
    Ok(())
}

fn null_spec(
    null: NullName,
    v: usize,
    p: Option<f64>,
    theta: (Option<f64>, Option<f64>),
    flags: (&str, &str, &str),
) -> Result<ModelSpec> {
    Ok(match null {
        NullName::Er => ModelSpec::er(v, need(p, flags.0, "an ER null")?)?,
        NullName::ErgmTriangle | NullName::Ergm2star => {
            let stats = if null == NullName::ErgmTriangle {
                ErgmStats::EdgeTriangle
            } else {
                ErgmStats::EdgeTwoStar
            };
            let t1 = need(theta.0, flags.1, "an ERGM null")?;
            let t2 = need(theta.1, flags.2, "an ERGM null")?;
            ModelSpec::ergm(v, stats, [t1, t2])?
        }
    })
}

fn null_hypothesis(spec: ModelSpec, marginals: Option<&Path>, b: u8) -> Result<NullHypothesis> {
    Ok(match marginals {
        Some(path) => {
            let m = read_marginals(open(path)?, spec.vertex_count(), base(b))
                .with_context(|| format!("reading {}", path.display()))?;
            NullHypothesis::with_marginals(spec, m, path.display().to_string())?
        }
        None => NullHypothesis::new(spec).context("use --null-marginals for this null")?,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|x| x.to_string()).unwrap_or_default()
}

pub fn test(a: &TestArgs, seed: u64, sink: &Sink) -> Result<()> {
    let s = read_sample(&a.sample)?;
    let (result, m) = match &a.sample2 {
        Some(path) => {
            let t = read_sample(path)?;
            let cfg = PermutationConfig {
                permutations: a.permutations,
                seed,
                alpha: a.alpha,
                ties: if a.strict_ties {
                    TieRule::Strict
                } else {
                    TieRule::Inclusive
                },
                add_one: a.add_one,
            };
            (two_sample_permutation_test(&s, &t, &cfg)?, Some(t.len()))
        }
        None => {
            let null = need(a.null, "--null (or --sample2)", "the one-sample test")?;
            let spec = null_spec(null, s.vertex_count(), a.p, (a.theta1, a.theta2), ("--p", "--theta1", "--theta2"))?;
            let h0 = null_hypothesis(spec, a.null_marginals.as_deref(), a.base)?;
            let mc = MonteCarlo {
                replications: a.replications,
                seed,
                mcmc: mcmc(&a.mcmc),
            };
            (one_sample_test(&s, &h0, a.alpha, &mc)?, None)
        }
    };
    report_test(&result, &s, m, sink)
}

fn report_test(r: &TestResult, s: &GraphSample, m: Option<usize>, sink: &Sink) -> Result<()> {
    // Nothing else uses stdout here: the CSV row only goes to `--out`.
    let mut h = std::io::stdout().lock();
    let w = r.statistic.value();
    match m {
        Some(m) => writeln!(h, "two-sample permutation W test (n = {}, m = {m}, v = {})", s.len(), s.vertex_count())?,
        None => writeln!(h, "one-sample W test (n = {}, v = {})", s.len(), s.vertex_count())?,
    }
    writeln!(h, "  W = {w}")?;
    match r.reference {
        Reference::CriticalValue(q) => writeln!(
            h,
            "  critical value = {} (empirical {} quantile of {} null replications)",
            q.value(),
            1.0 - r.alpha,
            r.replications
        )?,
        Reference::PValue(p) => writeln!(h, "  p-value = {p} ({} permutations)", r.replications)?,
    }
    if let Some(src) = &r.marginals_source {
        writeln!(h, "  null marginals from {src}")?;
    }
    writeln!(
        h,
        "  {} H0 at alpha = {}",
        if r.reject { "reject" } else { "do not reject" },
        r.alpha
    )?;

    if sink.has_out() {
        let row = vec![
            if m.is_some() { "two-sample" } else { "one-sample" }.to_string(),
            s.len().to_string(),
            m.map(|m| m.to_string()).unwrap_or_default(),
            s.vertex_count().to_string(),
            w.to_string(),
            r.alpha.to_string(),
            opt(r.critical_value().map(|q| q.value())),
            opt(r.p_value()),
            r.reject.to_string(),
            r.replications.to_string(),
            r.seed.to_string(),
        ];
        let header = [
            "test", "n", "m", "v", "w", "alpha", "critical_value", "p_value", "reject",
            "replications", "seed",
        ];
        sink.write(&csv_body(sink, &header, vec![row])?)?;
    }
    Ok(())
}

pub fn power(a: &PowerArgs, seed: u64, sink: &Sink) -> Result<()> {
    let null = null_spec(a.null, a.v, Some(a.p0), (a.theta1, a.null_theta2), ("--p0", "--theta1", "--null-theta2"))?;
    let h0 = null_hypothesis(null, a.null_marginals.as_deref(), a.base)?;
    let modified = match a.model {
        ModelName::ModifiedEr => modified_pairs(a.v, need(a.q, "--q", "--model modified-er")?, seed)?,
        _ => Vec::new(),
    };
    let alternatives = a
        .grid
        .iter()
        .map(|&x| {
            let spec = match a.model {
                ModelName::Er => ModelSpec::er(a.v, x)?,
                ModelName::ModifiedEr => ModelSpec::modified_er(a.v, a.p0, x, modified.clone())?,
                ModelName::ErgmTriangle | ModelName::Ergm2star => {
                    let t1 = need(a.theta1, "--theta1", "an ERGM alternative")?;
                    ModelSpec::ergm(a.v, stats(a.model).unwrap(), [t1, x])?
                }
            };
            Ok((x, spec))
        })
        .collect::<Result<Vec<_>>>()?;
    let cfg = PowerConfig {
        n: a.n,
        alpha: a.alpha,
        replications: a.replications,
        quantile_replications: a.quantile_replications,
        seed,
        mcmc: mcmc(&a.mcmc),
        bonferroni: a.baseline.is_some(),
    };
    let points = power_curve(&h0, &alternatives, &cfg)?;

    let mut h = sink.human();
    if !modified.is_empty() {
        writeln!(h, "modified pairs: {}", pair_list(&modified, base(a.base)))?;
    }
    writeln!(h, "{:>10} {:>9} {:>9}", "param", "power_w", "power_bc")?;
    for p in &points {
        let bc = p.power_bonferroni.map(|b| format!("{b:.4}")).unwrap_or_else(|| "-".into());
        writeln!(h, "{:>10} {:>9.4} {:>9}", p.parameter, p.power, bc)?;
    }
    let rows = points
        .iter()
        .map(|p| {
            vec![
                p.parameter.to_string(),
                p.power.to_string(),
                opt(p.power_bonferroni),
                p.replications.to_string(),
            ]
        })
        .collect();
    sink.write(&csv_body(sink, &["param", "power_w", "power_bc", "replications"], rows)?)
}

pub fn density_sweep(a: &DensityArgs, seed: u64, sink: &Sink) -> Result<()> {
    let stats = match a.stats {
        StatsName::Triangle => ErgmStats::EdgeTriangle,
        StatsName::TwoStar => ErgmStats::EdgeTwoStar,
    };
    let grid: Vec<[f64; 2]> = a.grid.iter().map(|&t2| [a.theta1, t2]).collect();
    let points = edge_density_sweep(a.v, stats, &grid, a.n, &mcmc(&a.mcmc), seed)?;
    let mut h = sink.human();
    for p in &points {
        writeln!(
            h,
            "θ = ({}, {}): density {:.4}{}",
            p.theta[0],
            p.theta[1],
            p.density,
            if p.degenerate { " (degenerate)" } else { "" }
        )?;
    }
    let rows = points
        .iter()
        .map(|p| {
            vec![
                p.theta[0].to_string(),
                p.theta[1].to_string(),
                p.density.to_string(),
                opt(p.exact_density),
                p.degenerate.to_string(),
            ]
        })
        .collect();
    let header = ["theta1", "theta2", "density", "exact_density", "degenerate"];
    sink.write(&csv_body(sink, &header, rows)?)
}

pub fn build(a: &BuildArgs, sink: &Sink) -> Result<()> {
    let matrix = read_channel_csv(open(&a.input)?, a.sampling_rate)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let spec = WindowSpec {
        width_ms: a.width_ms,
        step_ms: a.step_ms,
    };
    let cs = correlation_series(&matrix, &spec)?;
    let graphs = build_graphs(&cs, &ThresholdSpec::new(a.c)?)?;
    let b = base(a.base);

    let mut comments = manifest_comments(sink);
    let labels: Vec<String> = matrix
        .labels()
        .iter()
        .enumerate()
        .map(|(k, l)| format!("{}={l}", k + b.offset()))
        .collect();
    comments.push(format!("channels: {}", labels.join(" ")));
    let mut body = Vec::new();
    write_graph_sample(&mut body, &graphs, b, &comments)?;
    sink.write(&body)?;

    let mut h = sink.human();
    let edges: usize = graphs.edge_counts().iter().map(|&k| k as usize).sum();
    writeln!(h, "channels: {}", matrix.channel_count())?;
    writeln!(h, "samples per channel: {}", matrix.samples_per_channel())?;
    writeln!(h, "windows: {}", cs.window_count())?;
    writeln!(h, "undefined correlations (constant window): {}", cs.total_undefined())?;
    writeln!(
        h,
        "mean edges per graph: {:.3}",
        edges as f64 / graphs.len() as f64
    )?;
    Ok(())
}

pub fn summary(a: &SummaryArgs, sink: &Sink) -> Result<()> {
    let s = read_sample(&a.sample)?;
    let summary = summary_graph(&s, a.k)?;
    let mut body = Vec::new();
    for c in manifest_comments(sink) {
        writeln!(body, "# {c}")?;
    }
    write_edge_table(&mut body, &summary.edges, base(a.base))?;
    sink.write(&body)?;
    writeln!(
        sink.human(),
        "kept {} of {} pairs from {} graphs",
        summary.edges.len(),
        s.pair_count(),
        s.len()
    )?;
    Ok(())
}
