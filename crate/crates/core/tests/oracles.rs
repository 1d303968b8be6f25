//! Operation examples checked against independent oracles.

use graphw_core::graph::{pair_count, EdgeMarginals, Graph, GraphSample};
use graphw_core::models::{
    edge_density_sweep, ergm_enumerate, ergm_log_weight, ergm_mh_sample, logistic, sample_er,
    sample_modified_er, select_modified_pairs, ErgmStats, McmcConfig, ModelSpec,
};
use graphw_core::rng::stream_rng;
use graphw_core::statistic::{mean_distance, w_brute_force, w_one_sample};
use graphw_core::testing::{
    empirical_quantile, null_w_values, MonteCarlo, NullHypothesis,
};
use graphw_core::timeseries::{pair_quartiles, spearman, summary_graph};
use rand::Rng;

fn random_graph(v: usize, rng: &mut impl Rng) -> Graph {
    let mut g = Graph::empty(v);
    for e in 0..pair_count(v) {
        g.set_index(e, rng.random::<bool>());
    }
    g
}

fn random_sample(v: usize, n: usize, rng: &mut impl Rng) -> GraphSample {
    GraphSample::new((0..n).map(|_| random_graph(v, rng)).collect()).unwrap()
}

/// Adjacency matrix of `g`, read through the public pair lookup.
fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let v = g.vertex_count();
    (0..v)
        .map(|i| (0..v).map(|j| i != j && g.has_edge(i, j)).collect())
        .collect()
}

fn triple_enumeration(g: &Graph) -> (usize, usize, usize) {
    let a = adjacency(g);
    let v = a.len();
    let edges = a
        .iter()
        .enumerate()
        .map(|(i, row)| row[i + 1..].iter().filter(|&&x| x).count())
        .sum();
    let mut triangles = 0;
    let mut two_stars = 0;
    for i in 0..v {
        for j in (i + 1)..v {
            for k in (j + 1)..v {
                let (ij, jk, ik) = (a[i][j], a[j][k], a[i][k]);
                triangles += usize::from(ij && jk && ik);
                // Each triple holds three possible centers.
                two_stars += usize::from(ij && ik) + usize::from(ij && jk) + usize::from(ik && jk);
            }
        }
    }
    (edges, triangles, two_stars)
}

#[test]
fn structure_counts_match_triple_enumeration() {
    let mut rng = stream_rng(100, 0);
    for _ in 0..50 {
        let g = random_graph(7, &mut rng);
        let (e, t, s) = triple_enumeration(&g);
        assert_eq!(g.edge_count(), e);
        assert_eq!(g.triangle_count(), t);
        assert_eq!(g.two_star_count(), s);
        let deg: usize = g.degrees().iter().map(|d| d * d.saturating_sub(1) / 2).sum();
        assert_eq!(g.two_star_count(), deg);
    }
}

#[test]
fn mean_graph_matches_per_edge_counting() {
    let mut rng = stream_rng(101, 0);
    let s = random_sample(5, 20, &mut rng);
    let m = s.mean_graph();
    for i in 0..5 {
        for j in (i + 1)..5 {
            let count = s.iter().filter(|g| adjacency(g)[i][j]).count();
            let p = graphw_core::VertexPair::new(i, j).unwrap();
            assert_eq!(m.get(p), count as f64 / 20.0);
        }
    }
}

#[test]
fn mean_distance_matches_direct_loop() {
    let mut rng = stream_rng(102, 0);
    let s = random_sample(5, 10, &mut rng);
    let g = random_graph(5, &mut rng);
    let ag = adjacency(&g);
    let mut total = 0usize;
    for h in s.iter() {
        let ah = adjacency(h);
        for i in 0..5 {
            for j in (i + 1)..5 {
                total += usize::from(ag[i][j] != ah[i][j]);
            }
        }
    }
    assert_eq!(mean_distance(&s, &g).unwrap(), total as f64 / 10.0);
}

#[test]
fn one_sample_matches_brute_force_on_random_instances() {
    let mut rng = stream_rng(103, 0);
    for _ in 0..200 {
        let s = random_sample(4, rng.random_range(1..=10), &mut rng);
        let den = rng.random_range(1..=20u64);
        let num = (0..6).map(|_| rng.random_range(0..=den)).collect();
        let null = EdgeMarginals::from_rational(4, num, den).unwrap();
        let closed = w_one_sample(&s, &null).unwrap();
        let (brute, _) = w_brute_force(&s, &null).unwrap();
        assert_eq!(closed.ratio(), brute.ratio());
    }
}

#[test]
fn log_weight_matches_counting_oracles() {
    let mut rng = stream_rng(104, 0);
    for _ in 0..20 {
        let g = random_graph(5, &mut rng);
        let (e, t, s) = triple_enumeration(&g);
        let theta = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let tri = theta[0] * e as f64 + theta[1] * t as f64;
        let star = theta[0] * e as f64 + theta[1] * s as f64;
        assert_eq!(ergm_log_weight(&g, ErgmStats::EdgeTriangle, theta), tri);
        assert_eq!(ergm_log_weight(&g, ErgmStats::EdgeTwoStar, theta), star);
    }
}

#[test]
fn er_frequencies_concentrate() {
    let s = sample_er(10, 0.5, 10_000, &mut stream_rng(105, 0)).unwrap();
    let sigma = (0.25f64 / 10_000.0).sqrt();
    assert!((3.0 * sigma - 0.015).abs() < 1e-12);
    // The 3 sigma band is per edge; over 45 edges a few excursions are expected.
    let z: Vec<f64> = s.mean_graph().values().iter().map(|f| (f - 0.5).abs() / sigma).collect();
    assert!(z.iter().filter(|&&z| z >= 3.0).count() <= 2, "{z:?}");
    assert!(z.iter().all(|&z| z < 4.0), "{z:?}");
}

#[test]
fn modified_er_frequencies_concentrate() {
    let mut rng = stream_rng(106, 0);
    let pairs = select_modified_pairs(10, 0.25, &mut rng).unwrap();
    assert_eq!(pairs.len(), 11);
    let spec = ModelSpec::modified_er(10, 0.5, 0.8, pairs.clone()).unwrap();
    let n = 5000.0f64;
    let s = sample_modified_er(&spec, n as usize, &mut rng).unwrap();
    let m = s.mean_graph();
    let mut outside = 0;
    for slot in 0..45 {
        let modified = pairs.iter().any(|p| p.index(10) == slot);
        let p = if modified { 0.8 } else { 0.5 };
        let z = (m.values()[slot] - p).abs() / (p * (1.0 - p) / n).sqrt();
        assert!(z < 4.0, "slot {slot}: {}", m.values()[slot]);
        outside += usize::from(z >= 3.0);
    }
    assert!(outside <= 2);
}

#[test]
fn modified_er_extremes_reduce_to_er() {
    let empty = ModelSpec::modified_er(6, 0.3, 0.9, vec![]).unwrap();
    let all = ModelSpec::modified_er(6, 0.3, 0.9, graphw_core::graph::pairs(6).collect()).unwrap();
    assert_eq!(empty.exact_marginals().unwrap().values(), &[0.3; 15][..]);
    assert_eq!(all.exact_marginals().unwrap().values(), &[0.9; 15][..]);
}

#[test]
fn enumeration_with_zero_triangle_weight_is_logistic() {
    for theta1 in [-2.0, -1.0, 0.3, 1.7] {
        let d = ergm_enumerate(5, ErgmStats::EdgeTriangle, [theta1, 0.0]).unwrap();
        for &m in d.marginals().values() {
            assert!((m - logistic(theta1)).abs() < 1e-12);
        }
        let total: f64 = d.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn enumeration_survives_large_positive_theta() {
    let d = ergm_enumerate(6, ErgmStats::EdgeTriangle, [5.0, 40.0]).unwrap();
    let total: f64 = d.probabilities().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(d.probability(&Graph::complete(6)) > 0.999);
}

#[test]
fn negative_parameters_favor_the_empty_graph() {
    let d = ergm_enumerate(5, ErgmStats::EdgeTriangle, [-0.5, -0.7]).unwrap();
    let mut ranked: Vec<(usize, f64)> = d.probabilities().iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    assert!(ranked[..2].iter().any(|&(bits, _)| bits == 0));
}

#[test]
fn sampler_at_zero_theta_is_uniform() {
    let spec = ModelSpec::ergm(6, ErgmStats::EdgeTriangle, [0.0, 0.0]).unwrap();
    let s = ergm_mh_sample(&spec, 4000, &McmcConfig::default(), &mut stream_rng(107, 0)).unwrap();
    let band = 4.0 * (0.25f64 / 4000.0).sqrt();
    for &f in s.mean_graph().values() {
        assert!((f - 0.5).abs() < band);
    }
}

#[test]
fn sampler_density_matches_logistic_when_decoupled() {
    let spec = ModelSpec::ergm(8, ErgmStats::EdgeTriangle, [-1.0, 0.0]).unwrap();
    let n = 4000;
    let s = ergm_mh_sample(&spec, n, &McmcConfig::default(), &mut stream_rng(108, 0)).unwrap();
    let e = pair_count(8) as f64;
    let density: f64 = s.iter().map(|g| g.edge_count() as f64 / e).sum::<f64>() / n as f64;
    let p = logistic(-1.0);
    assert!((p - 0.2689).abs() < 1e-4);
    let sigma = (p * (1.0 - p) / (n as f64 * e)).sqrt();
    assert!((density - p).abs() < 3.0 * sigma, "density {density}");
}

#[test]
fn density_sweep_tracks_enumeration_and_is_monotone() {
    let grid: Vec<[f64; 2]> = (0..6).map(|k| [-1.0, -0.5 + 0.3 * k as f64]).collect();
    let pts = edge_density_sweep(5, ErgmStats::EdgeTriangle, &grid, 4000, &McmcConfig::default(), 109).unwrap();
    for p in &pts {
        let exact = p.exact_density.unwrap();
        assert!((p.density - exact).abs() < 0.01, "{p:?}");
    }
    for w in pts.windows(2) {
        assert!(w[1].exact_density.unwrap() >= w[0].exact_density.unwrap());
        assert!(w[1].density >= w[0].density - 0.01);
    }
    let flat = edge_density_sweep(6, ErgmStats::EdgeTwoStar, &[[0.7, 0.0]], 3000, &McmcConfig::default(), 1).unwrap();
    assert!((flat[0].density - logistic(0.7)).abs() < 0.01);
}

#[test]
fn density_sweep_flags_degenerate_points() {
    let pts = edge_density_sweep(6, ErgmStats::EdgeTriangle, &[[-6.0, 0.0], [0.0, 0.0]], 500, &McmcConfig::default(), 2).unwrap();
    assert!(pts[0].degenerate);
    assert!(!pts[1].degenerate);
}

/// All 64 equally likely samples of two ER(1/2) graphs on three vertices.
#[test]
fn null_distribution_matches_exhaustive_enumeration_at_v3_n2() {
    let half = EdgeMarginals::constant(3, 0.5).unwrap();
    // Exact law of 2 W (integer valued: sum of |count - 1| over pairs).
    let mut exact = [0usize; 4];
    for a in 0..8u64 {
        for b in 0..8u64 {
            let s = GraphSample::new(vec![Graph::from_bits(3, a), Graph::from_bits(3, b)]).unwrap();
            let twice = (w_one_sample(&s, &half).unwrap().value() * 2.0) as usize;
            exact[twice] += 1;
        }
    }
    assert_eq!(exact, [8, 24, 24, 8]);

    let null = NullHypothesis::new(ModelSpec::er(3, 0.5).unwrap()).unwrap();
    let r = 40_000;
    let draws = null_w_values(&null, 2, &MonteCarlo::new(r, 110), 0).unwrap();
    let mut seen = [0usize; 4];
    for w in &draws {
        seen[(w.value() * 2.0) as usize] += 1;
    }
    for k in 0..4 {
        let p = exact[k] as f64 / 64.0;
        let f = seen[k] as f64 / r as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / r as f64).sqrt(), "W = {}: {f} vs {p}", k as f64 / 2.0);
    }
    // P(2W <= 2) = 56/64 > 0.95 > 32/64, so the 0.95 quantile is W = 1.5.
    assert_eq!(empirical_quantile(&draws, 0.05).unwrap().value(), 1.5);
}

#[test]
fn spearman_matches_rank_pearson_oracle() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = [1.0, 3.0, 2.0, 5.0, 4.0];
    // No ties: 1 - 6 sum d^2 / (n (n^2 - 1)) with sum d^2 = 4.
    let oracle = 1.0 - 6.0 * 4.0 / (5.0 * 24.0);
    assert!((spearman(&x, &y).unwrap() - oracle).abs() < 1e-12);
    assert!((oracle - 0.8f64).abs() < 1e-15);
}

#[test]
fn quartiles_match_sort_and_interpolate() {
    let mut rng = stream_rng(111, 0);
    let series: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut sorted = series.clone();
    sorted.sort_by(f64::total_cmp);
    // Positions 1 + 9 p: 3.25 and 7.75 (1-based).
    let q1 = sorted[2] + 0.25 * (sorted[3] - sorted[2]);
    let q3 = sorted[6] + 0.75 * (sorted[7] - sorted[6]);
    let (a, b) = pair_quartiles(&series).unwrap();
    assert!((a - q1).abs() < 1e-12 && (b - q3).abs() < 1e-12);
}

#[test]
fn summary_graph_matches_sort_oracle() {
    let mut rng = stream_rng(112, 0);
    let s = random_sample(6, 25, &mut rng);
    let counts = s.edge_counts();
    let mut order: Vec<(u32, usize)> = counts.iter().enumerate().map(|(e, &c)| (c, e)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let summary = summary_graph(&s, 7).unwrap();
    let chosen: Vec<usize> = summary.edges.iter().map(|e| e.pair.index(6)).collect();
    let expected: Vec<usize> = order[..7].iter().map(|&(_, e)| e).collect();
    assert_eq!(chosen, expected);
    assert_eq!(summary.graph.edge_count(), 7);
}

#[test]
fn covariance_of_er_is_near_independent() {
    let s = sample_er(5, 0.5, 20_000, &mut stream_rng(113, 0)).unwrap();
    let cov = s.edge_covariance().unwrap();
    for a in 0..10 {
        for b in 0..10 {
            let expected = if a == b { 0.25 } else { 0.0 };
            assert!((cov.get(a, b) - expected).abs() < 0.01);
            assert_eq!(cov.get(a, b), cov.get(b, a));
        }
    }
}
