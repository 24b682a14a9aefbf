use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use ssl_cc::classifiers::{
    argmax, empirical_label_distribution, kl_penalty, lr_train_label_reg, LabelRegConfig, LabelRegProblem,
};
use ssl_cc::eval::{accuracy, cross_validate_hyperparams, sample_known, CvChoice, Grids, Method};
use ssl_cc::eval::cv::CvOptions;
use ssl_cc::ssl::{attr_only, no_ssl, ssl_learn};
use ssl_cc::synth::{generate, SyntheticParams};
use ssl_cc::{ClassifierKind, ClassifierSpec, DataGraph, SslVariant};

fn with_density(graph: &DataGraph, truth: &[usize], density: f64, seed: u64) -> DataGraph {
    let known_nodes = sample_known(graph.node_count(), density, seed).unwrap();
    let mut known = vec![None; graph.node_count()];
    for i in known_nodes {
        known[i] = Some(truth[i]);
    }
    graph.with_known(known).unwrap()
}

/// Two components: known nodes only link to known nodes, unknown only to
/// unknown, so every relational feature seen while training is final.
fn split_graph(seed: u64) -> (DataGraph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 60;
    let truth: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let noise = Normal::new(0.0, 1.0).unwrap();
    let attrs = Array2::from_shape_fn((n, 3), |(i, j)| {
        let mean = if j % 2 == truth[i] { 1.0 } else { 0.0 };
        mean + noise.sample(&mut rng)
    });
    let mut edges = Vec::new();
    for block in [0..20usize, 20..n] {
        let nodes: Vec<usize> = block.collect();
        for &i in &nodes {
            for _ in 0..2 {
                let same = rng.random_bool(0.8);
                let pool: Vec<usize> = nodes.iter().copied().filter(|&j| j != i && (truth[j] == truth[i]) == same).collect();
                edges.push((i, pool[rng.random_range(0..pool.len())]));
            }
        }
    }
    let known = (0..n).map(|i| (i < 20).then_some(truth[i])).collect();
    (DataGraph::new(attrs, &edges, vec!["a".into(), "b".into()], known).unwrap(), truth)
}

#[test]
fn no_ssl_coincides_with_known_onepass_when_known_links_are_closed() {
    for seed in 0..3 {
        let (g, _) = split_graph(seed);
        for kind in [ClassifierKind::Lr, ClassifierKind::LrLr, ClassifierKind::LrNb] {
            let spec = ClassifierSpec::new(kind, 1.0, 1.0);
            let a = no_ssl(&g, &spec).unwrap().state;
            let b = ssl_learn(&g, SslVariant::KNOWN_ONEPASS, &spec).unwrap().state;
            assert_eq!(a, b, "seed {seed}, {kind}");
        }
    }
}

#[test]
fn no_ssl_beats_attr_only_on_homophilous_graph() {
    let ds = generate(&SyntheticParams { nodes: 400, homophily: 0.9, attr_noise: 2.0, links_per_node: 3, seed: 21, ..Default::default() })
        .unwrap();
    let spec = ClassifierSpec::new(ClassifierKind::LrNb, 1.0, 1.0);
    let (mut sum_no, mut sum_attr) = (0.0, 0.0);
    for trial in 0..10 {
        let g = with_density(&ds.graph, &ds.truth, 0.1, 100 + trial);
        let test = g.unknown_nodes();
        sum_no += accuracy(&no_ssl(&g, &spec).unwrap().state, &ds.truth, &test).unwrap();
        sum_attr += accuracy(&attr_only(&g, 1.0).unwrap(), &ds.truth, &test).unwrap();
    }
    assert!(sum_no >= sum_attr, "NO-SSL {:.3} vs ATTR-ONLY {:.3}", sum_no / 10.0, sum_attr / 10.0);
}

/// A 1-D instance whose few known labels put the boundary far to one side,
/// so an unregularized model labels most of the balanced pool as class 0.
fn skewed_problem() -> (Array2<f64>, Vec<usize>, Array2<f64>) {
    let known = Array2::from_shape_vec((6, 1), vec![-2.0, -1.0, 0.0, 1.0, 3.0, 3.5]).unwrap();
    let labels = vec![0, 0, 0, 0, 1, 1];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let pool = Array2::from_shape_fn((80, 1), |(i, _)| if i % 2 == 0 { -0.5 } else { 1.0 } + noise.sample(&mut rng));
    (known, labels, pool)
}

fn train_with_lambda(known: ArrayView2<f64>, labels: &[usize], pool: ArrayView2<f64>, lambda: f64) -> ssl_cc::classifiers::LrModel {
    let kb = Array2::ones((known.nrows(), 2));
    let pb = Array2::ones((pool.nrows(), 2));
    let cfg = LabelRegConfig::new(vec![0.5, 0.5], labels.len()).unwrap().with_lambda(lambda);
    let problem = LabelRegProblem {
        known_features: known,
        known_labels: labels,
        known_beta: kb.view(),
        unlabeled_features: pool,
        unlabeled_beta: pb.view(),
    };
    lr_train_label_reg(problem, &cfg, 2, 1.0).unwrap()
}

#[test]
fn larger_lambda_never_increases_kl() {
    let (known, labels, pool) = skewed_problem();
    let ones = Array2::ones((pool.nrows(), 2));
    let mut last = f64::INFINITY;
    for lambda in [0.0, 6.0, 600.0] {
        let m = train_with_lambda(known.view(), &labels, pool.view(), lambda);
        let kl = kl_penalty(&[0.5, 0.5], &empirical_label_distribution(&m, pool.view(), ones.view()).unwrap());
        assert!(kl <= last + 1e-9, "lambda {lambda}: {kl} > {last}");
        last = kl;
    }
}

#[test]
fn default_lambda_pulls_hard_labels_toward_target() {
    let (known, labels, pool) = skewed_problem();
    let hard_kl = |lambda: f64| {
        let m = train_with_lambda(known.view(), &labels, pool.view(), lambda);
        let mut counts = [0.0; 2];
        for r in pool.rows() {
            counts[argmax(&m.predict_proba(r).unwrap())] += 1.0;
        }
        let n = pool.nrows() as f64;
        (counts[0] / n, kl_penalty(&[0.5, 0.5], &[counts[0] / n, counts[1] / n]))
    };
    let (frac0, kl0) = hard_kl(0.0);
    assert!(frac0 > 0.9, "instance is not skewed enough: {frac0}");
    let (_, kl_reg) = hard_kl(10.0 * labels.len() as f64);
    assert!(kl_reg < kl0, "{kl_reg} vs {kl0}");
}

/// The first attribute is the label buried under a large shared nuisance
/// term that the second attribute measures almost exactly. Only a weakly
/// penalized model can afford the large opposing weights that cancel it.
fn nuisance_graph(seed: u64) -> (DataGraph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 120;
    let truth: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut attrs = Array2::zeros((n, 2));
    for i in 0..n {
        let z = 3.0 * normal.sample(&mut rng);
        attrs[[i, 0]] = 0.2 * truth[i] as f64 + z;
        attrs[[i, 1]] = z + 0.01 * normal.sample(&mut rng);
    }
    // a ring; the attribute-only classifier never looks at it
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    (DataGraph::new(attrs, &edges, vec!["a".into(), "b".into()], vec![None; n]).unwrap(), truth)
}

#[test]
fn cv_prefers_weak_penalty_on_clean_data() {
    let grids = Grids { sigma_sq: vec![0.1, 1.0, 10.0, 100.0], alpha: vec![1.0] };
    let (mut largest, mut smallest) = (0, 0);
    let mut picks = Vec::new();
    for seed in 0..20 {
        let (g, truth) = nuisance_graph(500 + seed);
        let g = with_density(&g, &truth, 0.3, seed);
        let CvChoice { sigma_sq, .. } =
            cross_validate_hyperparams(&g, Method::AttrOnly, ClassifierKind::Lr, &grids, CvOptions::default(), seed)
                .unwrap();
        picks.push(sigma_sq);
        largest += usize::from(sigma_sq == 100.0);
        smallest += usize::from(sigma_sq == 0.1);
    }
    assert!(largest > smallest, "largest {largest}, smallest {smallest}: {picks:?}");
}
