use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::sim::seeded_rng;

pub const DEFAULT_INNER_RADIUS: f64 = 0.5;
pub const DEFAULT_OUTER_RADIUS: f64 = 1.0;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.05;

/// Two concentric noisy rings around the origin. Points alternate inner,
/// outer, inner, ...; inner points carry label 1.
pub fn make_circles(
    n: usize,
    inner_radius: f64,
    outer_radius: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
        return Err(Error::config(format!(
            "need 0 < inner < outer radius, got {inner_radius} and {outer_radius}"
        )));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::config(format!("noise sigma must be >= 0, got {noise_sigma}")));
    }
    if n == 0 {
        return Err(Error::config("circles needs n >= 1"));
    }
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::config(e.to_string()))?;
    let mut rng = seeded_rng(seed);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let inner = i % 2 == 0;
        let r = if inner { inner_radius } else { outer_radius };
        let phi = rng.random_range(0.0..TAU);
        let (dx, dy) = if noise_sigma > 0.0 {
            (noise.sample(&mut rng), noise.sample(&mut rng))
        } else {
            (0.0, 0.0)
        };
        features.push(vec![r * phi.cos() + dx, r * phi.sin() + dy]);
        labels.push(u8::from(inner));
    }
    LabeledDataset::new(features, labels)
}
