/// Ternary decision: `+1` above `tau`, `-1` below `-tau`, `0` (reject) in
/// between, boundary values included.
pub fn classify(values: &[f64], tau: f64) -> Vec<i8> {
    values
        .iter()
        .map(|&v| {
            if v > tau {
                1
            } else if v < -tau {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Fraction of zero decisions.
pub fn rejection_rate(decisions: &[i8]) -> f64 {
    if decisions.is_empty() {
        return 0.0;
    }
    decisions.iter().filter(|&&d| d == 0).count() as f64 / decisions.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_threshold_is_sign() {
        assert_eq!(classify(&[0.3, -1e-300, 0.0, -0.0], 0.0), vec![1, -1, 0, 0]);
    }

    #[test]
    fn threshold_example() {
        assert_eq!(classify(&[0.5, -0.02, 0.02], 0.1), vec![1, 0, 0]);
        assert_eq!(classify(&[0.1, -0.1], 0.1), vec![0, 0]);
    }

    proptest! {
        #[test]
        fn rejections_grow_with_tau(
            vals in proptest::collection::vec(-2.0f64..2.0, 1..50),
            t1 in 0.0f64..2.0,
            dt in 0.0f64..1.0,
        ) {
            let a = rejection_rate(&classify(&vals, t1));
            let b = rejection_rate(&classify(&vals, t1 + dt));
            prop_assert!(a <= b);
        }

        #[test]
        fn scale_covariant(
            vals in proptest::collection::vec(-2.0f64..2.0, 1..50),
            tau in 0.0f64..1.0,
            k in -4i32..5,
        ) {
            // powers of two scale without rounding
            let c = 2f64.powi(k);
            let scaled: Vec<f64> = vals.iter().map(|v| v * c).collect();
            prop_assert_eq!(classify(&scaled, c * tau), classify(&vals, tau));
        }

        #[test]
        fn idempotent(vals in proptest::collection::vec(-2.0f64..2.0, 1..50), tau in 0.0f64..1.0) {
            let d = classify(&vals, tau);
            let as_values: Vec<f64> = d.iter().map(|&v| f64::from(v)).collect();
            prop_assert_eq!(classify(&as_values, tau.min(0.5)), d);
        }
    }
}
