use super::neuron::{BiasMode, NeuronView, N_MAX_EXACT};
use super::{Method, ShapleyResult};
use crate::error::{Error, Result};

/// Player limit of [`exact_game`].
pub const GAME_MAX_PLAYERS: usize = 16;

/// Exact Shapley values of a ReLU neuron's inputs.
///
/// Averages each input's marginal contribution over all `n!` orderings. The
/// average is evaluated coalition by coalition: a coalition `S` not holding
/// `k` is followed by `k` in exactly `|S|! (n - |S| - 1)!` orderings, so the
/// work is `n · 2^n` instead of `n · n!`.
pub fn exact_shapley(nv: &NeuronView, mode: BiasMode) -> Result<ShapleyResult> {
    let n = nv.n();
    if n > N_MAX_EXACT {
        return Err(Error::TooManyInputs {
            n,
            max: N_MAX_EXACT,
        });
    }
    let products = nv.products();
    let bias = nv.bias();

    // sums[mask] = Σ_{i ∈ mask} p_i
    let full = 1usize << n;
    let mut sums = vec![0.0; full];
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + products[low];
    }
    let value = |mask: usize| {
        let size = mask.count_ones() as usize;
        (sums[mask] + mode.coalition_bias(bias, size, n)).max(0.0)
    };

    let alpha = exact_game(n, value)?;

    Ok(ShapleyResult {
        alpha,
        method: Method::Exact,
        stderr: None,
        baseline: mode.baseline(bias),
    })
}

/// Exact Shapley values of an `n`-player game given its characteristic
/// function over coalition bitmasks (bit `k` set when player `k` joins).
pub fn exact_game(n: usize, value: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
    if n > GAME_MAX_PLAYERS {
        return Err(Error::TooManyInputs {
            n,
            max: GAME_MAX_PLAYERS,
        });
    }
    let full = 1usize << n;
    // weight[s] = s! (n - s - 1)! / n!
    let weights: Vec<f64> = (0..n)
        .map(|s| {
            let mut w = 1.0 / n as f64;
            // 1 / C(n-1, s)
            for j in 0..s {
                w *= (j + 1) as f64 / (n - 1 - j) as f64;
            }
            w
        })
        .collect();
    let values: Vec<f64> = (0..full).map(value).collect();
    let mut alpha = vec![0.0; n];
    for mask in 0..full {
        let size = mask.count_ones() as usize;
        if size == n {
            continue;
        }
        let w = weights[size];
        for (k, a) in alpha.iter_mut().enumerate() {
            let bit = 1 << k;
            if mask & bit == 0 {
                *a += w * (values[mask | bit] - values[mask]);
            }
        }
    }
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_one() {
        let nv = NeuronView::new(vec![-1.0, 4.0, -3.0], -1.0).unwrap();
        let r = exact_shapley(&nv, BiasMode::Anchored).unwrap();
        let want = [-1.0 / 6.0, 4.0 / 3.0, -7.0 / 6.0];
        for (a, w) in r.alpha.iter().zip(want) {
            assert!((a - w).abs() < 1e-12, "{:?}", r.alpha);
        }
        assert_eq!(r.baseline, 0.0);
        assert_eq!(r.method, Method::Exact);
    }

    #[test]
    fn single_input_and_null_players() {
        for mode in [BiasMode::Anchored, BiasMode::Shared] {
            let r = exact_shapley(&NeuronView::new(vec![2.0], 0.0).unwrap(), mode).unwrap();
            assert_eq!(r.alpha, vec![2.0]);
            let r = exact_shapley(&NeuronView::new(vec![0.0; 3], 0.0).unwrap(), mode).unwrap();
            assert_eq!(r.alpha, vec![0.0; 3]);
        }
    }

    #[test]
    fn positive_bias_splits_the_modes() {
        let nv = NeuronView::new(vec![1.0, -0.5], 2.0).unwrap();
        let a = exact_shapley(&nv, BiasMode::Anchored).unwrap();
        let s = exact_shapley(&nv, BiasMode::Shared).unwrap();
        assert_eq!(a.baseline, 2.0);
        assert_eq!(s.baseline, 0.0);
        assert!((a.alpha.iter().sum::<f64>() - 0.5).abs() < 1e-12);
        assert!((s.alpha.iter().sum::<f64>() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_neurons() {
        let nv = NeuronView::new(vec![1.0; N_MAX_EXACT + 1], 0.0).unwrap();
        assert!(matches!(
            exact_shapley(&nv, BiasMode::Anchored),
            Err(Error::TooManyInputs { .. })
        ));
        let nv = NeuronView::new(vec![1.0; N_MAX_EXACT], -3.0).unwrap();
        let r = exact_shapley(&nv, BiasMode::Anchored).unwrap();
        assert!((r.alpha.iter().sum::<f64>() - 7.0).abs() < 1e-12);
    }
}
