use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Flips exactly `round(p·K)` labels, chosen uniformly without replacement.
///
/// The positions come from a seeded permutation, so for a fixed seed the
/// flipped set at a lower rate is a subset of the set at a higher rate.
pub fn inject_label_noise(labels: &[i8], p: f64, seed: u64) -> Result<Vec<i8>> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::InvalidParameter(format!("noise rate must be in [0, 0.5), got {p}")));
    }
    let flips = (p * labels.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = labels.to_vec();
    for &i in &order[..flips] {
        out[i] = -out[i];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_identity() {
        let y = vec![1, -1, 1, 1];
        assert_eq!(inject_label_noise(&y, 0.0, 3).unwrap(), y);
    }

    #[test]
    fn exact_flip_count() {
        let y = vec![1; 10];
        let a = inject_label_noise(&y, 0.2, 17).unwrap();
        assert_eq!(a.iter().filter(|&&v| v == -1).count(), 2);
        assert_eq!(a, inject_label_noise(&y, 0.2, 17).unwrap());
    }

    #[test]
    fn double_application_restores() {
        let y: Vec<i8> = (0..25).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let once = inject_label_noise(&y, 0.3, 8).unwrap();
        assert_eq!(inject_label_noise(&once, 0.3, 8).unwrap(), y);
    }

    #[test]
    fn flips_are_nested_across_rates() {
        let y = vec![1; 40];
        let low = inject_label_noise(&y, 0.1, 5).unwrap();
        let high = inject_label_noise(&y, 0.2, 5).unwrap();
        assert!(low.iter().zip(&high).all(|(l, h)| *l == 1 || *h == -1));
    }

    #[test]
    fn rate_out_of_range() {
        assert!(inject_label_noise(&[1, -1], 0.5, 0).is_err());
        assert!(inject_label_noise(&[1, -1], -0.1, 0).is_err());
    }
}
