use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::FeatureSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    Blobs,
    Crescents,
}

impl std::str::FromStr for SynthKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blobs" => Ok(SynthKind::Blobs),
            "crescents" | "moons" | "banana" => Ok(SynthKind::Crescents),
            _ => Err(Error::InvalidParameter(format!("unknown synthetic dataset `{s}`"))),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 samples, got {n}")));
    }
    Ok(())
}

fn normal(std: f64) -> Result<Normal<f64>> {
    if !(std.is_finite() && std >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise level must be non-negative, got {std}")));
    }
    Normal::new(0.0, std).map_err(|e| Error::InvalidParameter(format!("noise level: {e}")))
}

/// Two isotropic Gaussian blobs in 2-D centred at `(±separation/2, 0)`.
/// The first `n/2` samples are class -1.
pub fn two_blobs(n: usize, separation: f64, std: f64, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = normal(std)?;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y: i8 = if i < n / 2 { -1 } else { 1 };
        let cx = f64::from(y) * separation / 2.0;
        rows.push(vec![cx + noise.sample(&mut rng), noise.sample(&mut rng)]);
        labels.push(y);
    }
    Dataset::new(FeatureSet::unweighted(rows, 1.0)?, labels)
}

/// Two interleaved half circles with Gaussian jitter. The upper crescent is
/// class -1, the lower one class +1.
pub fn crescents(n: usize, noise_std: f64, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = normal(noise_std)?;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let t = rng.gen_range(0.0..PI);
        let (x, y, label) = if i < n / 2 {
            (t.cos(), t.sin(), -1)
        } else {
            (1.0 - t.cos(), 0.5 - t.sin(), 1)
        };
        rows.push(vec![x + noise.sample(&mut rng), y + noise.sample(&mut rng)]);
        labels.push(label);
    }
    Dataset::new(FeatureSet::unweighted(rows, 1.0)?, labels)
}

pub fn generate(kind: SynthKind, n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    match kind {
        SynthKind::Blobs => two_blobs(n, 3.0, noise, seed),
        SynthKind::Crescents => crescents(n, noise, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_deterministic() {
        let a = crescents(300, 0.1, 4).unwrap();
        assert_eq!(a.labels.iter().filter(|&&y| y == 1).count(), 150);
        assert_eq!(a, crescents(300, 0.1, 4).unwrap());
        assert_ne!(a, crescents(300, 0.1, 5).unwrap());
    }

    #[test]
    fn blobs_are_separated() {
        let d = two_blobs(100, 10.0, 0.5, 1).unwrap();
        for i in 0..d.len() {
            let x = d.features.row(i)[0];
            assert_eq!(x > 0.0, d.labels[i] == 1);
        }
    }

    #[test]
    fn too_small_rejected() {
        assert!(crescents(3, 0.1, 0).is_err());
        assert!(two_blobs(10, 1.0, -1.0, 0).is_err());
    }
}
