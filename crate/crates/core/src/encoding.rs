//! Classical to quantum data translation.
//!
//! Each qubit carries two features: `x1` through `RY(2 asin √x1)` and `x2`
//! through `RZ(2 asin √x2)`, applied in that order from `|0>`. The Z-basis
//! probability of `|1>` is then exactly `x1`, and `x2` sits in the azimuth.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{zero_state, AngleSource, Gate, StateVector, MAX_QUBITS};

/// Feature value used to fill an odd-length feature vector.
pub const PAD_VALUE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    pub ry: f64,
    pub rz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedSample {
    pub angle_pairs: Vec<AnglePair>,
}

impl EncodedSample {
    pub fn n_qubits(&self) -> usize {
        self.angle_pairs.len()
    }
}

fn feature_angle(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("feature {x} outside [0, 1]")));
    }
    Ok(2.0 * x.sqrt().asin())
}

pub fn encode_pair(x1: f64, x2: f64) -> Result<AnglePair> {
    Ok(AnglePair {
        ry: feature_angle(x1)?,
        rz: feature_angle(x2)?,
    })
}

/// Maps `(x0, x1)` to qubit 0, `(x2, x3)` to qubit 1, and so on.
pub fn encode_features(x: &[f64]) -> Result<EncodedSample> {
    if x.is_empty() {
        return Err(Error::config("no features to encode"));
    }
    let angle_pairs = x
        .chunks(2)
        .map(|c| encode_pair(c[0], c.get(1).copied().unwrap_or(PAD_VALUE)))
        .collect::<Result<Vec<_>>>()?;
    if angle_pairs.len() > MAX_QUBITS {
        return Err(Error::config(format!(
            "{} features need {} qubits, more than {MAX_QUBITS}",
            x.len(),
            angle_pairs.len()
        )));
    }
    Ok(EncodedSample { angle_pairs })
}

/// Prepares the encoded state from `|0...0>`.
pub fn apply_encoding(sample: &EncodedSample) -> Result<StateVector> {
    let mut state = zero_state(sample.n_qubits())?;
    for (q, pair) in sample.angle_pairs.iter().enumerate() {
        state.apply(&Gate::ry(q, AngleSource::Fixed(pair.ry)), pair.ry)?;
        state.apply(&Gate::rz(q, AngleSource::Fixed(pair.rz)), pair.rz)?;
    }
    Ok(state)
}

/// Single-qubit radial encoding for the concentric-circles task.
///
/// The squared normalized distance `ρ²` goes into the RY slot, so
/// `P(|1>) = ρ²` and `P(|0>) >= 0.5` exactly when `ρ <= rho_max / √2`. The
/// RZ slot carries the azimuth mapped to `[0, 1]`.
pub fn radial_encode(point: [f64; 2], center: [f64; 2], rho_max: f64) -> Result<EncodedSample> {
    if !(rho_max > 0.0) || !rho_max.is_finite() {
        return Err(Error::config(format!("rho_max must be positive, got {rho_max}")));
    }
    let dx = point[0] - center[0];
    let dy = point[1] - center[1];
    let rho = (dx.hypot(dy) / rho_max).clamp(0.0, 1.0);
    let azimuth = (dy.atan2(dx) + PI) / (2.0 * PI);
    Ok(EncodedSample {
        angle_pairs: vec![encode_pair(rho * rho, azimuth.clamp(0.0, 1.0))?],
    })
}

/// Decision rule and calibration for [`radial_encode`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialKernel {
    pub center: [f64; 2],
    pub rho_max: f64,
}

impl RadialKernel {
    /// Places the decision radius between the two classes. With separable
    /// radii this is the midpoint of the gap (max inner, min outer);
    /// otherwise the midpoint of the class-mean radii. Label 1 is inner.
    pub fn calibrate(points: &[[f64; 2]], labels: &[u8], center: [f64; 2]) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::config("points and labels differ in length"));
        }
        let radius = |p: &[f64; 2]| (p[0] - center[0]).hypot(p[1] - center[1]);
        let (mut inner, mut outer) = (Vec::new(), Vec::new());
        for (p, &y) in points.iter().zip(labels) {
            if y == 1 {
                inner.push(radius(p));
            } else {
                outer.push(radius(p));
            }
        }
        if inner.is_empty() || outer.is_empty() {
            return Err(Error::config("calibration needs points from both classes"));
        }
        let max_inner = inner.iter().copied().fold(f64::MIN, f64::max);
        let min_outer = outer.iter().copied().fold(f64::MAX, f64::min);
        let boundary = if max_inner < min_outer {
            0.5 * (max_inner + min_outer)
        } else {
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            0.5 * (mean(&inner) + mean(&outer))
        };
        if !(boundary > 0.0) {
            return Err(Error::config("degenerate class radii"));
        }
        Ok(RadialKernel {
            center,
            rho_max: boundary * std::f64::consts::SQRT_2,
        })
    }

    pub fn encode(&self, point: [f64; 2]) -> Result<EncodedSample> {
        radial_encode(point, self.center, self.rho_max)
    }

    /// Class 1 (inner) when `P(|0>) >= 0.5`.
    pub fn classify(p_zero: f64) -> u8 {
        u8::from(p_zero >= 0.5)
    }
}

/// Two features read back from one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub x1: f64,
    pub x2: f64,
    /// The azimuth was undefined (state on a pole), `x2` was set to 0.
    pub degenerate: bool,
}

/// Below this transverse Bloch length the azimuth is treated as undefined.
pub const AZIMUTH_EPS: f64 = 1e-12;

/// Inverts the pair encoding from the Bloch components `<Z>, <X>, <Y>`.
///
/// With polar angle `a = acos <Z>` and azimuth `b = |atan2(<Y>, <X>)|`
/// folded into `[0, π]`, returns `(sin²(a/2), sin²(b/2))`.
pub fn decode_expectations(z: f64, x: f64, y: f64) -> Decoded {
    let a = z.clamp(-1.0, 1.0).acos();
    let x1 = (a / 2.0).sin().powi(2);
    if x.hypot(y) < AZIMUTH_EPS {
        return Decoded {
            x1,
            x2: 0.0,
            degenerate: true,
        };
    }
    let b = y.atan2(x).abs();
    Decoded {
        x1,
        x2: (b / 2.0).sin().powi(2),
        degenerate: false,
    }
}

pub fn decode_qubit(state: &StateVector, qubit: usize) -> Result<Decoded> {
    let [x, y, z] = state.bloch_vector(qubit)?;
    Ok(decode_expectations(z, x, y))
}
