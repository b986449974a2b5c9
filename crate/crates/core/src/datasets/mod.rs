//! Data ingestion and preprocessing: the circles generator, MNIST IDX files,
//! PCA and min/max normalization.

mod circles;
mod idx;
mod pca;

pub use circles::{make_circles, DEFAULT_INNER_RADIUS, DEFAULT_NOISE_SIGMA, DEFAULT_OUTER_RADIUS};
pub use idx::{
    encode_idx_images, encode_idx_labels, parse_idx_images, parse_idx_labels, read_idx_images,
    read_idx_labels, write_idx_images, write_idx_labels, IdxImages, IMAGES_MAGIC, LABELS_MAGIC,
};
pub use pca::{covariance, pca_fit, PcaModel};

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::seeded_rng;

/// Margin that keeps normalized features away from 0 and 1.
pub const NORM_EPSILON: f64 = 1e-3;

/// Per-dimension affine map of `[min, max]` onto `[ε, 1 − ε]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub epsilon: f64,
}

impl Normalization {
    pub fn fit(features: &[Vec<f64>]) -> Result<Self> {
        let first = features.first().ok_or_else(|| Error::config("cannot normalize an empty dataset"))?;
        let mut min = first.clone();
        let mut max = first.clone();
        for row in features {
            if row.len() != min.len() {
                return Err(Error::config("feature rows differ in length"));
            }
            for (j, &x) in row.iter().enumerate() {
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
            }
        }
        if let Some(j) = (0..min.len()).find(|&j| !(max[j] > min[j])) {
            return Err(Error::config(format!("dimension {j} is constant and cannot be normalized")));
        }
        Ok(Normalization {
            min,
            max,
            epsilon: NORM_EPSILON,
        })
    }

    pub fn n_dims(&self) -> usize {
        self.min.len()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_dims() {
            return Err(Error::config(format!(
                "{}-dim row for a {}-dim normalization",
                x.len(),
                self.n_dims()
            )));
        }
        Ok(())
    }

    /// Maps `x`, clamping values outside the fitted range to the margins.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let span = 1.0 - 2.0 * self.epsilon;
        Ok(x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let t = (v - self.min[j]) / (self.max[j] - self.min[j]);
                (self.epsilon + span * t).clamp(self.epsilon, 1.0 - self.epsilon)
            })
            .collect())
    }

    pub fn invert(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        let span = 1.0 - 2.0 * self.epsilon;
        Ok(y.iter()
            .enumerate()
            .map(|(j, &v)| self.min[j] + (v - self.epsilon) / span * (self.max[j] - self.min[j]))
            .collect())
    }
}

/// Feature rows with binary labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    /// Set once the features have been normalized.
    pub normalization: Option<Normalization>,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::config(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::config("labels must be 0 or 1"));
        }
        if let Some(first) = features.first() {
            if features.iter().any(|r| r.len() != first.len()) {
                return Err(Error::config("feature rows differ in length"));
            }
        }
        Ok(LabeledDataset {
            features,
            labels,
            normalization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_dims(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn points(&self) -> Result<Vec<[f64; 2]>> {
        if self.n_dims() != 2 {
            return Err(Error::config(format!("expected 2-dim features, got {}", self.n_dims())));
        }
        Ok(self.features.iter().map(|r| [r[0], r[1]]).collect())
    }

    fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            normalization: self.normalization.clone(),
        }
    }

    /// Seeded shuffle, then the first `n - round(n * test_fraction)` rows
    /// train and the rest are held out.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::config(format!("test fraction {test_fraction} outside [0, 1)")));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut seeded_rng(seed));
        let n_test = (self.len() as f64 * test_fraction).round() as usize;
        let n_train = self.len() - n_test;
        Ok((self.subset(&idx[..n_train]), self.subset(&idx[n_train..])))
    }

    /// Projects every row through `pca`.
    pub fn project(&self, pca: &PcaModel) -> Result<LabeledDataset> {
        Ok(LabeledDataset {
            features: self.features.iter().map(|r| pca.forward(r)).collect::<Result<_>>()?,
            labels: self.labels.clone(),
            normalization: None,
        })
    }

    /// Applies an already fitted normalization (clamping out-of-range values).
    pub fn normalized_with(&self, norm: &Normalization) -> Result<LabeledDataset> {
        Ok(LabeledDataset {
            features: self.features.iter().map(|r| norm.apply(r)).collect::<Result<_>>()?,
            labels: self.labels.clone(),
            normalization: Some(norm.clone()),
        })
    }

    /// `f0,..,f{k-1},label` with a header row.
    pub fn to_csv(&self) -> String {
        let k = self.n_dims();
        let mut out: String = (0..k).map(|j| format!("f{j},")).collect();
        out.push_str("label\n");
        for (row, y) in self.features.iter().zip(&self.labels) {
            for v in row {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{y}");
        }
        out
    }
}

/// Fits a normalization on `dataset` and applies it.
pub fn normalize(dataset: &LabeledDataset) -> Result<LabeledDataset> {
    let norm = Normalization::fit(&dataset.features)?;
    dataset.normalized_with(&norm)
}

/// Digit images scaled into `[0, 1]` with their raw labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DigitSet {
    pub images: Vec<Vec<f64>>,
    pub digits: Vec<u8>,
}

pub fn load_mnist(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<DigitSet> {
    let img = read_idx_images(images)?;
    let digits = read_idx_labels(labels)?;
    if img.len() != digits.len() {
        return Err(Error::config(format!(
            "{} images but {} labels",
            img.len(),
            digits.len()
        )));
    }
    Ok(DigitSet {
        images: img.to_unit_rows(),
        digits,
    })
}

impl DigitSet {
    /// Images of a single digit in file order.
    pub fn of_digit(&self, digit: u8) -> Vec<Vec<f64>> {
        self.images
            .iter()
            .zip(&self.digits)
            .filter(|(_, &d)| d == digit)
            .map(|(x, _)| x.clone())
            .collect()
    }
}

/// The first `n_samples` images (file order) showing `digit_a` or `digit_b`,
/// relabeled `digit_a -> 1`, `digit_b -> 0`.
pub fn binary_pair(set: &DigitSet, digit_a: u8, digit_b: u8, n_samples: usize) -> Result<LabeledDataset> {
    if digit_a == digit_b {
        return Err(Error::config("the two digits must differ"));
    }
    for d in [digit_a, digit_b] {
        if !set.digits.contains(&d) {
            return Err(Error::config(format!("digit {d} does not occur in the data")));
        }
    }
    let mut features = Vec::with_capacity(n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for (x, &d) in set.images.iter().zip(&set.digits) {
        if features.len() == n_samples {
            break;
        }
        if d == digit_a || d == digit_b {
            features.push(x.clone());
            labels.push(u8::from(d == digit_a));
        }
    }
    if features.len() < n_samples {
        return Err(Error::config(format!(
            "only {} images of digits {digit_a} and {digit_b}, {n_samples} requested",
            features.len()
        )));
    }
    LabeledDataset::new(features, labels)
}
