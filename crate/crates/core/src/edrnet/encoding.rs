use ndarray::Array2;

/// Sinusoidal encoding for steps `t = 1..=n`: column `2m` is
/// `sin(ω_m t)` and column `2m + 1` is `cos(ω_m t)` with
/// `ω_m = 10^(-8m / width)`.
pub fn positional_encoding(n: usize, width: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, width), |(row, i)| {
        let t = (row + 1) as f64;
        let m = (i / 2) as f64;
        let omega = 10f64.powf(-8.0 * m / width as f64);
        if i % 2 == 0 {
            (omega * t).sin()
        } else {
            (omega * t).cos()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_pair_is_sin_cos_of_t() {
        for width in [2, 3, 8, 128] {
            let pe = positional_encoding(10, width);
            for row in 0..10 {
                let t = (row + 1) as f64;
                assert_eq!(pe[[row, 0]], t.sin());
                assert_eq!(pe[[row, 1]], t.cos());
            }
        }
    }

    #[test]
    fn sin_one() {
        let pe = positional_encoding(1, 2);
        assert!((pe[[0, 0]] - 0.841_470_984_807_896_5).abs() < 1e-15);
    }

    #[test]
    fn high_frequency_index_columns_are_flat() {
        let width = 512;
        let pe = positional_encoding(10, width);
        for i in (width - 8..width).step_by(2) {
            let omega = 10f64.powf(-8.0 * (i / 2) as f64 / width as f64);
            for row in 0..10 {
                assert!(pe[[row, i]].abs() <= omega * 10.0);
                assert!((pe[[row, i + 1]] - 1.0).abs() <= (omega * 10.0).powi(2));
            }
        }
    }
}
