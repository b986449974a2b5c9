use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("learning rate must be positive"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        if !(self.eps >= 0.0) {
            return Err(Error::config("adam eps must be non-negative"));
        }
        Ok(())
    }
}

/// First and second raw moment estimates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Moments {
    pub fn zeros(n: usize) -> Self {
        Moments {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// One bias-corrected Adam update at step `t` (1-based).
pub fn adam_step(
    theta: &[f64],
    grad: &[f64],
    moments: &Moments,
    t: u64,
    cfg: &AdamConfig,
) -> Result<(Vec<f64>, Moments)> {
    if t == 0 {
        return Err(Error::config("adam step counter starts at 1"));
    }
    let n = theta.len();
    if grad.len() != n || moments.m.len() != n || moments.v.len() != n {
        return Err(Error::config("adam vectors differ in length"));
    }
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);

    let mut next = Moments::zeros(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let m = cfg.beta1 * moments.m[i] + (1.0 - cfg.beta1) * grad[i];
        let v = cfg.beta2 * moments.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        let m_hat = m / c1;
        let v_hat = v / c2;
        out.push(theta[i] - cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps));
        next.m[i] = m;
        next.v[i] = v;
    }
    Ok((out, next))
}
