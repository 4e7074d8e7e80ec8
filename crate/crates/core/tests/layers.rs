mod common;

use avel::edrnet::ops::{conv1d_same, conv1d_transpose, conv1d_valid, softmax_rows};
use avel::edrnet::{max_layers, positional_encoding, Affine};
use common::{max_abs_diff, positional, same_conv, to_mat, transpose_conv, valid_conv};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_affine(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Affine {
    Affine {
        weight: Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0)),
        bias: Array1::from_shape_fn(cols, |_| rng.random_range(-1.0..1.0)),
    }
}

fn random_x(len: usize, ch: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((len, ch), |_| rng.random_range(-2.0..2.0))
}

proptest! {
    #[test]
    fn valid_conv_matches_loops(k in 1usize..6, extra in 0usize..8, cin in 1usize..6, cout in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_x(k + extra, cin, &mut rng);
        let layer = random_affine(k * cin, cout, &mut rng);
        let y = conv1d_valid(x.view(), &layer, k);
        prop_assert_eq!(y.dim(), (extra + 1, cout));
        prop_assert!(max_abs_diff(&valid_conv(&to_mat(&x), &layer, k), &y) < 1e-12);
    }

    #[test]
    fn transpose_conv_matches_loops(k in 1usize..6, len in 1usize..8, cin in 1usize..6, cout in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_x(len, cin, &mut rng);
        let layer = Affine { bias: random_affine(1, cout, &mut rng).bias, ..random_affine(cin, k * cout, &mut rng) };
        let y = conv1d_transpose(x.view(), &layer, k);
        prop_assert_eq!(y.dim(), (len + k - 1, cout));
        prop_assert!(max_abs_diff(&transpose_conv(&to_mat(&x), &layer, k), &y) < 1e-12);
    }

    #[test]
    fn same_conv_matches_loops(k in 1usize..6, len in 1usize..12, cin in 1usize..6, cout in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_x(len, cin, &mut rng);
        let layer = random_affine(k * cin, cout, &mut rng);
        let y = conv1d_same(x.view(), &layer, k);
        prop_assert_eq!(y.dim(), (len, cout));
        prop_assert!(max_abs_diff(&same_conv(&to_mat(&x), &layer, k), &y) < 1e-12);
    }

    #[test]
    fn softmax_rows_are_distributions(seed in any::<u64>(), scale in 0.1f64..500.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let logits = random_x(7, 5, &mut rng) * scale;
        let p = softmax_rows(logits.view());
        for row in p.rows() {
            prop_assert!(row.iter().all(|v| v.is_finite() && *v >= 0.0));
            prop_assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn positional_encoding_matches_definition() {
    for (n, d) in [(10, 8), (10, 12), (7, 5), (1, 1)] {
        assert!(
            max_abs_diff(&positional(n, d), &positional_encoding(n, d)) < 1e-15,
            "n={n} d={d}"
        );
    }
    let pe = positional_encoding(10, 4);
    assert!((pe[[0, 0]] - 1f64.sin()).abs() < 1e-15);
    assert!((pe[[0, 1]] - 1f64.cos()).abs() < 1e-15);
}

#[test]
fn layer_limit_follows_receptive_field() {
    for k in 2..=10 {
        let l = max_layers(k, 10).unwrap();
        assert!(l * (k - 1) <= 9 && (l + 1) * (k - 1) > 9, "k={k} L={l}");
    }
    assert!(max_layers(1, 10).is_err());
    assert!(max_layers(11, 10).is_err());
}
