#![allow(clippy::needless_range_loop)]

mod common;

use proptest::prelude::*;
use shapley_relu::nn::relative_error;
use shapley_relu::rng;
use shapley_relu::shapley::{
    approx_shapley, approx_stats, exact_shapley, gate_profile, mc_shapley, sa_gradient, sa_value,
    shapley_gradient, BiasMode, NeuronView, SIGMA_FLOOR,
};

fn neuron(max_n: usize) -> impl Strategy<Value = NeuronView> {
    (prop::collection::vec(-5.0f64..5.0, 1..=max_n), -3.0f64..3.0)
        .prop_map(|(p, b)| NeuronView::new(p, b).unwrap())
}

fn mode() -> impl Strategy<Value = BiasMode> {
    prop_oneof![Just(BiasMode::Anchored), Just(BiasMode::Shared)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn exact_is_efficient(nv in neuron(8), mode in mode()) {
        let r = exact_shapley(&nv, mode).unwrap();
        prop_assert!((r.total() + r.baseline - nv.relu()).abs() < 1e-12);
    }

    #[test]
    fn exact_is_symmetric_under_permutation(nv in neuron(8), shift in 0usize..8) {
        let n = nv.n();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let permuted = NeuronView::new(perm.iter().map(|&i| nv.products()[i]).collect(), nv.bias()).unwrap();
        let a = exact_shapley(&nv, BiasMode::Anchored).unwrap();
        let b = exact_shapley(&permuted, BiasMode::Anchored).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((b.alpha[k] - a.alpha[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn null_player_gets_zero(mut p in prop::collection::vec(-5.0f64..5.0, 2..=8), k in 0usize..8, mode in mode()) {
        let k = k % p.len();
        p[k] = 0.0;
        let r = exact_shapley(&NeuronView::new(p, 0.0).unwrap(), mode).unwrap();
        prop_assert_eq!(r.alpha[k], 0.0);
    }

    #[test]
    fn equal_products_get_equal_values(v in -5.0f64..5.0, n in 2usize..8, b in -3.0f64..3.0) {
        let r = exact_shapley(&NeuronView::new(vec![v; n], b).unwrap(), BiasMode::Anchored).unwrap();
        for a in &r.alpha {
            prop_assert!((a - r.alpha[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn approx_sums_to_sa(nv in neuron(20)) {
        prop_assert!((approx_shapley(&nv).total() - sa_value(&nv)).abs() < 1e-12);
    }

    #[test]
    fn approx_sums_to_sa_near_degenerate(scale in prop_oneof![Just(0.0), Just(1e-15), Just(1e-13), Just(1e-11)], n in 1usize..6, b in -1.0f64..1.0) {
        let nv = NeuronView::new(vec![scale; n], b).unwrap();
        prop_assert!((approx_shapley(&nv).total() - sa_value(&nv)).abs() < 1e-12);
    }

    #[test]
    fn sa_gradient_matches_finite_differences(
        w in prop::collection::vec(-2.0f64..2.0, 1..=8),
        x in prop::collection::vec(-2.0f64..2.0, 8),
        b in -2.0f64..2.0,
    ) {
        let x = &x[..w.len()];
        let nv = NeuronView::from_weights(&w, x, b).unwrap();
        prop_assume!(approx_stats(&nv).sigma > 10.0 * SIGMA_FLOOR);
        let g = sa_gradient(&nv, &w, x).unwrap();
        let h = 1e-6;
        let value = |w: &[f64], x: &[f64], b: f64| sa_value(&NeuronView::from_weights(w, x, b).unwrap());
        for k in 0..w.len() {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[k] += h;
            xm[k] -= h;
            let num = (value(&w, &xp, b) - value(&w, &xm, b)) / (2.0 * h);
            prop_assert!(relative_error(g.d_x[k], num, 1e-2) <= 1e-5, "d_x[{}] {} vs {}", k, g.d_x[k], num);
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[k] += h;
            wm[k] -= h;
            let num = (value(&wp, x, b) - value(&wm, x, b)) / (2.0 * h);
            prop_assert!(relative_error(g.d_w[k], num, 1e-2) <= 1e-5, "d_w[{}] {} vs {}", k, g.d_w[k], num);
        }
        let num = (value(&w, x, b + h) - value(&w, x, b - h)) / (2.0 * h);
        prop_assert!(relative_error(g.d_b, num, 1e-2) <= 1e-5);
    }

    #[test]
    fn correction_only_touches_input_and_weight_terms(
        w in prop::collection::vec(-2.0f64..2.0, 1..=8),
        x in prop::collection::vec(-2.0f64..2.0, 8),
        b in -2.0f64..2.0,
    ) {
        let x = &x[..w.len()];
        let nv = NeuronView::from_weights(&w, x, b).unwrap();
        let plain = shapley_gradient(&nv, &w, x, false).unwrap();
        let full = shapley_gradient(&nv, &w, x, true).unwrap();
        prop_assert_eq!(plain.d_b, full.d_b);
        prop_assert!((sa_gradient(&nv, &w, x).unwrap().d_b - full.d_b).abs() <= 1e-12 * full.d_b.abs().max(1.0));
    }

    #[test]
    fn gate_is_continuous_along_a_sweep(nv in neuron(6), k in 0usize..6) {
        let k = k % nv.n();
        let others: f64 = nv.products().iter().enumerate().filter(|(i, _)| *i != k).map(|(_, p)| p * p).sum();
        prop_assume!(others > 1e-2);
        let grid: Vec<f64> = (0..=10_000).map(|i| -5.0 + i as f64 * 1e-3).collect();
        let gates = gate_profile(&nv, k, &grid).unwrap();
        for pair in gates.windows(2) {
            prop_assert!((pair[1] - pair[0]).abs() < 1e-2);
        }
    }
}

#[test]
fn mc_agrees_with_exact_on_random_neurons() {
    let mut g = rng::seeded(11);
    let (mut inside, mut total) = (0, 0);
    for i in 0..100 {
        let nv = common::random_neuron(&mut g, 6, 5.0, 3.0);
        let exact = exact_shapley(&nv, BiasMode::Anchored).unwrap();
        let mc = mc_shapley(&nv, BiasMode::Anchored, 20_000, i).unwrap();
        let se = mc.stderr.unwrap();
        for k in 0..nv.n() {
            total += 1;
            if (mc.alpha[k] - exact.alpha[k]).abs() <= 4.0 * se[k] + 1e-12 {
                inside += 1;
            }
        }
    }
    assert!(inside as f64 >= 0.99 * total as f64, "{inside}/{total}");
}

#[test]
fn mc_stderr_shrinks_with_paths() {
    let nv = NeuronView::new(vec![-1.0, 4.0, -3.0, 0.5, 2.0], -1.0).unwrap();
    let se = |paths| {
        mc_shapley(&nv, BiasMode::Anchored, paths, 3)
            .unwrap()
            .stderr
            .unwrap()[1]
    };
    let (a, b) = (se(1_000), se(16_000));
    let ratio = a / b;
    assert!((2.0..8.0).contains(&ratio), "{a} {b}");
}
