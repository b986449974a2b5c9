use serde::{Deserialize, Serialize};

use crate::encoding::{decode_expectations, AZIMUTH_EPS};
use crate::error::{Error, Result};
use crate::sim::Basis;

pub const DEFAULT_CLAMP_EPSILON: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    BinaryCrossEntropy,
    MeanSquaredDistance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub clamp_epsilon: f64,
}

impl LossSpec {
    pub fn bce() -> Self {
        LossSpec {
            kind: LossKind::BinaryCrossEntropy,
            clamp_epsilon: DEFAULT_CLAMP_EPSILON,
        }
    }

    pub fn mean_squared_distance() -> Self {
        LossSpec {
            kind: LossKind::MeanSquaredDistance,
            clamp_epsilon: DEFAULT_CLAMP_EPSILON,
        }
    }

    /// Bases measured on the readout qubit, in the order the loss expects
    /// their expectation values.
    pub fn probes(&self) -> &'static [Basis] {
        match self.kind {
            LossKind::BinaryCrossEntropy => &[Basis::Z],
            LossKind::MeanSquaredDistance => &[Basis::Z, Basis::X, Basis::Y],
        }
    }

    /// Loss for one example and its derivative with respect to each probe
    /// expectation.
    pub fn evaluate(&self, expectations: &[f64], target: &Target) -> Result<(f64, Vec<f64>)> {
        if expectations.len() != self.probes().len() {
            return Err(Error::config(format!(
                "{} expectations for {} probes",
                expectations.len(),
                self.probes().len()
            )));
        }
        match (self.kind, target) {
            (LossKind::BinaryCrossEntropy, Target::Label(y)) => {
                let p = (1.0 - expectations[0]) / 2.0;
                let loss = bce_loss(p, *y, self.clamp_epsilon);
                // dp/d<Z> = -1/2
                let d = -0.5 * bce_grad(p, *y, self.clamp_epsilon);
                Ok((loss, vec![d]))
            }
            (LossKind::MeanSquaredDistance, Target::Points(points)) => {
                let (z, x, y) = (expectations[0], expectations[1], expectations[2]);
                let decoded = decode_expectations(z, x, y);
                let g = [decoded.x1, decoded.x2];
                let loss = generative_loss(g, points)?;
                let mean = mean_point(points);
                let dl = [2.0 * (g[0] - mean[0]), 2.0 * (g[1] - mean[1])];
                // x1 = (1 - <Z>)/2, x2 = (1 - <X>/r)/2 with r = |(<X>, <Y>)|
                let r = x.hypot(y);
                let (dx2_dx, dx2_dy) = if r < AZIMUTH_EPS {
                    (0.0, 0.0)
                } else {
                    let r3 = r * r * r;
                    (-y * y / (2.0 * r3), x * y / (2.0 * r3))
                };
                Ok((loss, vec![-0.5 * dl[0], dl[1] * dx2_dx, dl[1] * dx2_dy]))
            }
            (kind, _) => Err(Error::config(format!("target does not match {kind:?} loss"))),
        }
    }
}

/// What an example is scored against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Label(u8),
    Points(Vec<[f64; 2]>),
}

/// Binary cross-entropy with `p` clamped to `[eps, 1 - eps]`.
pub fn bce_loss(p: f64, y: u8, eps: f64) -> f64 {
    let p = p.clamp(eps, 1.0 - eps);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// `d bce / dp`; zero where the clamp is active.
pub fn bce_grad(p: f64, y: u8, eps: f64) -> f64 {
    if p <= eps || p >= 1.0 - eps {
        return 0.0;
    }
    let y = f64::from(y);
    (p - y) / (p * (1.0 - p))
}

fn mean_point(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
    [sx / n, sy / n]
}

/// Mean squared Euclidean distance from `decoded` to every point.
pub fn generative_loss(decoded: [f64; 2], dataset: &[[f64; 2]]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::config("generative loss needs at least one data point"));
    }
    let total: f64 = dataset
        .iter()
        .map(|p| (decoded[0] - p[0]).powi(2) + (decoded[1] - p[1]).powi(2))
        .sum();
    Ok(total / dataset.len() as f64)
}
