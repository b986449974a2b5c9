//! Classical `[4, h, 1]` dense network (tanh hidden layer, sigmoid output)
//! trained with the same loss, optimizer and report as the circuits.
//!
//! Parameters live in one flat vector: `w1` (`h x 4`, row-major), `b1` (`h`),
//! `w2` (`h`), `b2`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::seeded_rng;
use crate::training::{bce_grad, bce_loss, optimize, Objective, TrainConfig, TrainReport, DEFAULT_CLAMP_EPSILON};

pub const INPUT_DIM: usize = 4;
pub const DEFAULT_INIT_HALF_WIDTH: f64 = 0.5;

pub fn param_count(hidden: usize) -> usize {
    6 * hidden + 1
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub hidden: usize,
    pub params: Vec<f64>,
}

impl Mlp {
    pub fn new(hidden: usize, params: Vec<f64>) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::config("hidden layer needs at least one unit"));
        }
        if params.len() != param_count(hidden) {
            return Err(Error::config(format!(
                "{} parameters for hidden size {hidden}, expected {}",
                params.len(),
                param_count(hidden)
            )));
        }
        Ok(Mlp { hidden, params })
    }

    pub fn zeros(hidden: usize) -> Result<Self> {
        Mlp::new(hidden, vec![0.0; param_count(hidden)])
    }

    /// Uniform draws from `[-0.5, 0.5]`.
    pub fn init(hidden: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let params = (0..param_count(hidden))
            .map(|_| rng.random_range(-DEFAULT_INIT_HALF_WIDTH..=DEFAULT_INIT_HALF_WIDTH))
            .collect();
        Mlp::new(hidden, params)
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        check_input(x)?;
        Ok(forward_parts(self.hidden, &self.params, x).1)
    }
}

fn check_input(x: &[f64]) -> Result<()> {
    if x.len() != INPUT_DIM {
        return Err(Error::config(format!("mlp input has {} features, expected {INPUT_DIM}", x.len())));
    }
    Ok(())
}

/// Hidden activations and output probability.
fn forward_parts(h: usize, p: &[f64], x: &[f64]) -> (Vec<f64>, f64) {
    let (w1, rest) = p.split_at(h * INPUT_DIM);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(h);
    let a: Vec<f64> = (0..h)
        .map(|i| {
            let row = &w1[i * INPUT_DIM..(i + 1) * INPUT_DIM];
            (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[i]).tanh()
        })
        .collect();
    let z = a.iter().zip(w2).map(|(ai, wi)| ai * wi).sum::<f64>() + b2[0];
    (a, sigmoid(z))
}

/// BCE loss of one example and its gradient by backpropagation.
pub fn example_loss_and_grad(h: usize, params: &[f64], x: &[f64], y: u8) -> (f64, Vec<f64>) {
    let (a, p) = forward_parts(h, params, x);
    let loss = bce_loss(p, y, DEFAULT_CLAMP_EPSILON);
    // d loss / d logit; equals p - y away from the clamp
    let dz = bce_grad(p, y, DEFAULT_CLAMP_EPSILON) * p * (1.0 - p);
    let w2 = &params[h * INPUT_DIM + h..h * INPUT_DIM + 2 * h];
    let mut g = vec![0.0; params.len()];
    for i in 0..h {
        let da = dz * w2[i] * (1.0 - a[i] * a[i]);
        for j in 0..INPUT_DIM {
            g[i * INPUT_DIM + j] = da * x[j];
        }
        g[h * INPUT_DIM + i] = da;
        g[h * INPUT_DIM + h + i] = dz * a[i];
    }
    g[h * INPUT_DIM + 2 * h] = dz;
    (loss, g)
}

pub struct MlpObjective<'a> {
    pub hidden: usize,
    pub features: &'a [Vec<f64>],
    pub labels: &'a [u8],
}

impl<'a> MlpObjective<'a> {
    pub fn new(hidden: usize, features: &'a [Vec<f64>], labels: &'a [u8]) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::config("hidden layer needs at least one unit"));
        }
        if features.len() != labels.len() {
            return Err(Error::config("features and labels differ in length"));
        }
        for x in features {
            check_input(x)?;
        }
        Ok(MlpObjective {
            hidden,
            features,
            labels,
        })
    }

    pub fn accuracy(&self, params: &[f64]) -> f64 {
        let correct = self
            .features
            .iter()
            .zip(self.labels)
            .filter(|(x, &y)| u8::from(forward_parts(self.hidden, params, x).1 >= 0.5) == y)
            .count();
        correct as f64 / self.features.len().max(1) as f64
    }
}

impl Objective for MlpObjective<'_> {
    fn n_params(&self) -> usize {
        param_count(self.hidden)
    }

    fn n_examples(&self) -> usize {
        self.features.len()
    }

    fn loss_and_grad(&self, theta: &[f64], batch: &[usize], _rng: &mut ChaCha8Rng) -> Result<(f64, Vec<f64>)> {
        let mut total = 0.0;
        let mut grad = vec![0.0; theta.len()];
        for &i in batch {
            let (l, g) = example_loss_and_grad(self.hidden, theta, &self.features[i], self.labels[i]);
            total += l;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        Ok((total / n, grad))
    }

    fn metrics(&self, theta: &[f64]) -> Result<(f64, Option<f64>)> {
        let total: f64 = self
            .features
            .iter()
            .zip(self.labels)
            .map(|(x, &y)| bce_loss(forward_parts(self.hidden, theta, x).1, y, DEFAULT_CLAMP_EPSILON))
            .sum();
        let n = self.features.len() as f64;
        Ok((total / n, Some(self.accuracy(theta))))
    }
}

/// Trains from `Mlp::init(hidden, config.rng_seed)`.
pub fn train_mlp(hidden: usize, features: &[Vec<f64>], labels: &[u8], config: &TrainConfig) -> Result<TrainReport> {
    let mlp = Mlp::init(hidden, config.rng_seed)?;
    train_mlp_from(&mlp, features, labels, config)
}

pub fn train_mlp_from(mlp: &Mlp, features: &[Vec<f64>], labels: &[u8], config: &TrainConfig) -> Result<TrainReport> {
    let objective = MlpObjective::new(mlp.hidden, features, labels)?;
    optimize(&objective, mlp.params.clone(), config)
}
