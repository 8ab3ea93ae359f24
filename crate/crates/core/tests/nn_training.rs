mod common;

use rand::Rng;
use shapley_relu::data::{linearly_separable, Batcher};
use shapley_relu::nn::{
    accuracy, cross_entropy, grad_check, load_checkpoint, save_checkpoint, softmax_into,
    Activation, DenseLayer, GradCheckConfig, GradSeed, InitScheme, Matrix, Network, OptimizerKind,
    OptimizerState,
};
use shapley_relu::rng;
use shapley_relu::shapley::{sa_gradient, NeuronView};

fn random_matrix(g: &mut rng::Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| g.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

fn random_net(sizes: &[usize], hidden: Activation, head: Activation, seed: u64) -> Network {
    let mut net = Network::mlp(sizes, hidden, head).unwrap();
    net.init_params(InitScheme::GlorotUniform, seed);
    let mut g = rng::seeded(seed ^ 0xb1a5);
    for layer in net.layers_mut() {
        layer
            .bias
            .iter_mut()
            .for_each(|b| *b = g.gen_range(-0.5..0.5));
    }
    net
}

#[test]
fn sa_network_passes_gradient_check() {
    for seed in 0..5 {
        let net = random_net(&[8, 16, 16, 4], Activation::Sa, Activation::Softmax, seed);
        let mut g = rng::seeded(seed);
        let x = random_matrix(&mut g, 5, 8);
        let labels: Vec<usize> = (0..5).map(|i| i % 4).collect();
        let report = grad_check(
            &net,
            &x,
            &labels,
            &GradCheckConfig {
                samples: 400,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.passed, "seed {seed}: max {}", report.max_rel_error);
        assert_eq!(report.shaplu_max_deviation, None);
    }
}

#[test]
fn relu_and_identity_heads_pass_gradient_check() {
    let net = random_net(&[8, 16, 3], Activation::Relu, Activation::Identity, 3);
    let x = random_matrix(&mut rng::seeded(4), 6, 8);
    let report = grad_check(&net, &x, &[0; 6], &GradCheckConfig::default()).unwrap();
    assert!(report.passed, "{}", report.max_rel_error);
}

#[test]
fn shaplu_deviation_is_reported_not_gated() {
    let net = random_net(&[8, 16, 4], Activation::ShapLu, Activation::Softmax, 2);
    let x = random_matrix(&mut rng::seeded(5), 4, 8);
    let report = grad_check(&net, &x, &[0, 1, 2, 3], &GradCheckConfig::default()).unwrap();
    let dev = report.shaplu_max_deviation.unwrap();
    assert!(
        dev > 1e-4,
        "ShapLU gradient should differ from the ReLU forward: {dev}"
    );
    assert!(report.passed);
    assert!(report.checks.iter().any(|c| !c.via_shaplu));
}

#[test]
fn shaplu_forward_equals_relu_forward() {
    let relu = random_net(&[8, 16, 16, 4], Activation::Relu, Activation::Softmax, 7);
    let shaplu = relu.with_hidden_activation(Activation::ShapLu);
    let x = random_matrix(&mut rng::seeded(1), 20, 8);
    assert_eq!(relu.predict(&x).unwrap(), shaplu.predict(&x).unwrap());
}

#[test]
fn dead_layer_gradient_vanishes_only_for_relu() {
    // every pre-activation ≤ -1, with one large product per neuron
    let w = vec![3.0, -0.5, 0.2, -2.0, 0.1, 0.4];
    let b = vec![-6.0, -4.0];
    let x = Matrix::row_vector(&[1.0, 2.0, -1.0]);
    let norm = |act: Activation| {
        let layer = DenseLayer::new(3, 2, w.clone(), b.clone(), act).unwrap();
        let mut net = Network::new(vec![layer]).unwrap();
        let pre = net.forward(&x).unwrap();
        if act == Activation::Relu {
            assert!(net.last_trace().unwrap().layers[0]
                .pre
                .as_slice()
                .iter()
                .all(|&s| s <= -1.0));
            assert!(pre.as_slice().iter().all(|&y| y == 0.0));
        }
        let g = net.backward(&Matrix::row_vector(&[1.0, 1.0])).unwrap();
        g.layers[0]
            .weights
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    };
    assert_eq!(norm(Activation::Relu), 0.0);
    assert!(norm(Activation::ShapLu) > 0.0);
    assert!(norm(Activation::Sa) > 0.0);
}

#[test]
fn sa_layer_matches_single_neuron_gradient() {
    let w = [1.0, 2.0, 3.0];
    let x = [-1.0, 2.0, -1.0];
    let layer = DenseLayer::new(3, 1, w.to_vec(), vec![-1.0], Activation::Sa).unwrap();
    let mut net = Network::new(vec![layer]).unwrap();
    net.forward(&Matrix::row_vector(&x)).unwrap();
    let g = net.backward(&Matrix::row_vector(&[1.0])).unwrap();
    let nv = NeuronView::from_weights(&w, &x, -1.0).unwrap();
    let single = sa_gradient(&nv, &w, &x).unwrap();
    for k in 0..3 {
        assert!((g.layers[0].weights[k] - single.d_w[k]).abs() < 1e-14);
        assert!((g.input.as_ref().unwrap().get(0, k) - single.d_x[k]).abs() < 1e-14);
    }
    assert!((g.layers[0].bias[0] - single.d_b).abs() < 1e-14);
}

#[test]
fn softmax_rows_sum_to_one() {
    let mut g = rng::seeded(0);
    for _ in 0..200 {
        let n = g.gen_range(1..20);
        let logits: Vec<f64> = (0..n).map(|_| g.gen_range(-800.0..800.0)).collect();
        let mut out = vec![0.0; n];
        softmax_into(&logits, &mut out);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(out.iter().all(|p| p.is_finite() && *p >= 0.0));
    }
}

#[test]
fn glorot_draws_have_expected_moments() {
    let mut net = Network::mlp(&[300, 200], Activation::Relu, Activation::Identity).unwrap();
    net.init_params(InitScheme::GlorotUniform, 42);
    let w = &net.layers()[0].weights;
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let limit = (6.0f64 / 500.0).sqrt();
    assert!(mean.abs() < 4.0 * limit / (3.0 * n).sqrt());
    assert!((var / (limit * limit / 3.0) - 1.0).abs() < 0.02);
    assert!(w.iter().all(|v| v.abs() < limit));
}

fn train_toy(hidden: Activation) -> f64 {
    let data = linearly_separable(200, 5);
    let mut net = Network::mlp(&[2, 16, 2], hidden, Activation::Softmax).unwrap();
    net.init_params(InitScheme::GlorotUniform, 1);
    let mut opt = OptimizerState::new(OptimizerKind::sgd(0.1), &net);
    let batcher = Batcher::new(10, 2, true).unwrap();
    for epoch in 0..50 {
        for batch in batcher.epoch(&data, epoch) {
            let probs = net.forward(&batch.inputs).unwrap();
            let (_, grad) = cross_entropy(&probs, &batch.labels).unwrap();
            let grads = net.backward_logits(&grad).unwrap();
            opt.step(&mut net, &grads).unwrap();
        }
    }
    accuracy(&net.predict(&data.images).unwrap(), &data.labels)
}

#[test]
fn toy_problem_is_learned_by_every_backend() {
    for act in [Activation::Relu, Activation::Sa, Activation::ShapLu] {
        let acc = train_toy(act);
        assert!(acc >= 0.95, "{act}: {acc}");
    }
}

#[test]
fn trained_network_survives_checkpoint() {
    let net = random_net(&[5, 7, 3], Activation::Sa, Activation::Softmax, 8);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("n.shpg");
    save_checkpoint(&net, &p).unwrap();
    let back = load_checkpoint(&p).unwrap();
    let x = random_matrix(&mut rng::seeded(2), 4, 5);
    assert_eq!(net.predict(&x).unwrap(), back.predict(&x).unwrap());
    assert_eq!(back.layers()[1].activation, Activation::Softmax);
}

#[test]
fn logits_seed_equals_output_seed_through_softmax() {
    let net = random_net(&[4, 6, 3], Activation::Sa, Activation::Softmax, 1);
    let x = random_matrix(&mut rng::seeded(3), 3, 4);
    let labels = [0, 2, 1];
    let trace = net.trace(&x).unwrap();
    let (_, dlogits) = cross_entropy(trace.output(), &labels).unwrap();
    let via_logits = net
        .backward_trace(&trace, &dlogits, GradSeed::Logits, true)
        .unwrap();
    // dL/dp = -1/(B p_label) on the label entry
    let mut dprobs = Matrix::zeros(3, 3);
    for (b, &l) in labels.iter().enumerate() {
        dprobs.row_mut(b)[l] = -1.0 / (3.0 * trace.output().get(b, l));
    }
    let via_output = net
        .backward_trace(&trace, &dprobs, GradSeed::Output, true)
        .unwrap();
    for (a, b) in via_logits.layers.iter().zip(&via_output.layers) {
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
