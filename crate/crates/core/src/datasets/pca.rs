//! Linear PCA by deflated power iteration on the sample covariance.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::seeded_rng;

/// Stop when `‖Cv − λv‖ <= RESIDUAL_TOL * trace(C)`.
const RESIDUAL_TOL: f64 = 1e-13;
const MAX_ITERS: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub k: usize,
    pub mean: Vec<f64>,
    /// `k` orthonormal rows; each row's largest-magnitude entry is positive.
    pub components: Vec<Vec<f64>>,
    /// Covariance eigenvalue of each component, non-increasing.
    pub eigenvalues: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let d = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Sample covariance (divisor `n - 1`) as a dense row-major `d x d` matrix.
pub fn covariance(features: &[Vec<f64>], mean: &[f64]) -> Vec<f64> {
    let d = mean.len();
    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for row in features {
        for (c, (x, m)) in centered.iter_mut().zip(row.iter().zip(mean)) {
            *c = x - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            let out = &mut cov[i * d..(i + 1) * d];
            for j in i..d {
                out[j] += ci * centered[j];
            }
        }
    }
    let denom = (features.len() - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    cov
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let d = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(&m[i * d..(i + 1) * d], v);
    }
}

/// Dominant eigenpair of the symmetric PSD matrix `m`, searched in the
/// orthogonal complement of `found`.
fn dominant_eigenpair(m: &[f64], d: usize, found: &[Vec<f64>], seed: u64) -> (f64, Vec<f64>) {
    let trace: f64 = (0..d).map(|i| m[i * d + i]).sum();
    let tol = RESIDUAL_TOL * trace.abs().max(f64::MIN_POSITIVE);
    let mut rng = seeded_rng(seed);
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    orthogonalize(&mut v, found);
    normalize(&mut v);
    let mut w = vec![0.0; d];
    let mut lambda = 0.0;
    for _ in 0..MAX_ITERS {
        mat_vec(m, &v, &mut w);
        orthogonalize(&mut w, found);
        lambda = dot(&v, &w);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            break;
        }
        if normalize(&mut w) == 0.0 {
            // v lies in the null space of what is left
            lambda = 0.0;
            break;
        }
        std::mem::swap(&mut v, &mut w);
    }
    orthogonalize(&mut v, found);
    normalize(&mut v);
    (lambda.max(0.0), v)
}

pub fn pca_fit(features: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let n = features.len();
    let d = features.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::config("pca needs k >= 1"));
    }
    if k > d {
        return Err(Error::config(format!("k = {k} exceeds dimensionality {d}")));
    }
    if n <= k {
        return Err(Error::config(format!("pca with k = {k} needs more than {k} samples, got {n}")));
    }
    if features.iter().any(|r| r.len() != d) {
        return Err(Error::config("feature rows differ in length"));
    }
    if features.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite feature value".into()));
    }

    let mut mean = vec![0.0; d];
    for row in features {
        mean.iter_mut().zip(row).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = covariance(features, &mean);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for c in 0..k {
        let (lambda, mut v) = dominant_eigenpair(&cov, d, &components, c as u64);
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] -= lambda * v[i] * v[j];
            }
        }
        fix_sign(&mut v);
        components.push(v);
        eigenvalues.push(lambda);
    }
    Ok(PcaModel {
        k,
        mean,
        components,
        eigenvalues,
    })
}

impl PcaModel {
    pub fn n_dims(&self) -> usize {
        self.mean.len()
    }

    /// `components · (x − mean)`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_dims() {
            return Err(Error::config(format!(
                "{}-dim input for a {}-dim pca",
                x.len(),
                self.n_dims()
            )));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.components.iter().map(|c| dot(c, &centered)).collect())
    }

    /// `componentsᵀ · z + mean` without clipping.
    pub fn inverse_unclipped(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.k {
            return Err(Error::config(format!("{}-dim code for k = {}", z.len(), self.k)));
        }
        let mut out = self.mean.clone();
        for (c, zi) in self.components.iter().zip(z) {
            out.iter_mut().zip(c).for_each(|(o, ci)| *o += zi * ci);
        }
        Ok(out)
    }

    /// Reconstruction clipped to the pixel range `[0, 1]`.
    pub fn inverse(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.inverse_unclipped(z)?;
        out.iter_mut().for_each(|x| *x = x.clamp(0.0, 1.0));
        Ok(out)
    }
}
