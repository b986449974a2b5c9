//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export has a plain Rust counterpart (the `*_native` functions) so
//! the logic is testable off the browser.

use qlab::circuits::generative_circuit;
use qlab::encoding::{apply_encoding, decode_qubit, encode_features};
use qlab::experiments::{run_circles, ExperimentConfig, ExperimentKind};
use qlab::sim::{prob_one, sample, zero_state, Basis};
use qlab::training::{generative_example, train, LossSpec, TrainConfig};
use wasm_bindgen::prelude::*;

/// `[bloch_x, bloch_y, bloch_z, p_one, decoded_x1, decoded_x2]` for the
/// pair `(x1, x2)` loaded onto one qubit.
pub fn bloch_native(x1: f64, x2: f64) -> Result<Vec<f64>, String> {
    let state = apply_encoding(&encode_features(&[x1, x2]).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let [bx, by, bz] = state.bloch_vector(0).map_err(|e| e.to_string())?;
    let d = decode_qubit(&state, 0).map_err(|e| e.to_string())?;
    let p1 = prob_one(&state, 0).map_err(|e| e.to_string())?;
    Ok(vec![bx, by, bz, p1, d.x1, d.x2])
}

#[wasm_bindgen]
pub fn bloch(x1: f64, x2: f64) -> Result<Vec<f64>, JsError> {
    bloch_native(x1, x2).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct CirclesResult {
    points: Vec<f64>,
    shot_accuracies: Vec<f64>,
    exact_accuracy: f64,
    boundary: f64,
}

#[wasm_bindgen]
impl CirclesResult {
    /// Flat rows of `[x, y, label, predicted, p0]`.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn shot_accuracies(&self) -> Vec<f64> {
        self.shot_accuracies.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn exact_accuracy(&self) -> f64 {
        self.exact_accuracy
    }

    /// Decision radius, `rho_max / √2`.
    #[wasm_bindgen(getter)]
    pub fn boundary(&self) -> f64 {
        self.boundary
    }
}

pub fn circles_native(n: usize, noise: f64, shots: u32, repetitions: usize, seed: u64) -> Result<CirclesResult, String> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::CirclesKernel).with_seed(seed);
    cfg.circles.n = n;
    cfg.circles.noise_sigma = noise;
    cfg.circles.shots = shots;
    cfg.circles.repetitions = repetitions;
    let r = run_circles(&cfg).map_err(|e| e.to_string())?;
    let points = r
        .points
        .iter()
        .flat_map(|p| [p.x, p.y, f64::from(p.label), f64::from(p.predicted), p.p0])
        .collect();
    Ok(CirclesResult {
        points,
        shot_accuracies: r.shot_accuracies,
        exact_accuracy: r.exact_accuracy,
        boundary: r.kernel.rho_max / std::f64::consts::SQRT_2,
    })
}

#[wasm_bindgen]
pub fn circles(n: usize, noise: f64, shots: u32, repetitions: usize, seed: u64) -> Result<CirclesResult, JsError> {
    circles_native(n, noise, shots, repetitions, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct GenerativeResult {
    cloud: Vec<f64>,
    losses: Vec<f64>,
    path: Vec<f64>,
    samples: Vec<f64>,
}

#[wasm_bindgen]
impl GenerativeResult {
    /// Flat `[x1, x2]` training points.
    #[wasm_bindgen(getter)]
    pub fn cloud(&self) -> Vec<f64> {
        self.cloud.clone()
    }

    /// Loss at epochs `0..=epochs`.
    #[wasm_bindgen(getter)]
    pub fn losses(&self) -> Vec<f64> {
        self.losses.clone()
    }

    /// Flat decoded `[x1, x2]` after each epoch, starting at epoch 0.
    #[wasm_bindgen(getter)]
    pub fn path(&self) -> Vec<f64> {
        self.path.clone()
    }

    /// Flat `[x1, x2]` decoded from finite-shot estimates.
    #[wasm_bindgen(getter)]
    pub fn samples(&self) -> Vec<f64> {
        self.samples.clone()
    }
}

/// `count` points in a sunflower pattern of radius `spread` around `center`.
pub fn cloud(center: [f64; 2], spread: f64, count: usize) -> Vec<[f64; 2]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let r = spread * ((k as f64 + 0.5) / count as f64).sqrt();
            let a = k as f64 * golden;
            [
                (center[0] + r * a.cos()).clamp(0.0, 1.0),
                (center[1] + r * a.sin()).clamp(0.0, 1.0),
            ]
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn generative_native(
    cx: f64,
    cy: f64,
    spread: f64,
    epochs: usize,
    lr: f64,
    shots: u32,
    count: usize,
    seed: u64,
) -> Result<GenerativeResult, String> {
    let points = cloud([cx, cy], spread, 200);
    let circuit = generative_circuit();
    let example = generative_example(&points).map_err(|e| e.to_string())?;
    let config = TrainConfig {
        epochs,
        learning_rate: lr,
        rng_seed: seed,
        ..TrainConfig::default()
    };
    let report = train(&circuit, &[example], LossSpec::mean_squared_distance(), &config).map_err(|e| e.to_string())?;
    let input = zero_state(1).map_err(|e| e.to_string())?;
    let mut path = Vec::new();
    for theta in &report.theta_history {
        let d = decode_qubit(&circuit.run(&input, theta).map_err(|e| e.to_string())?, 0).map_err(|e| e.to_string())?;
        path.extend([d.x1, d.x2]);
    }
    let state = circuit.run(&input, &report.final_theta).map_err(|e| e.to_string())?;
    let mut samples = Vec::with_capacity(2 * count);
    for i in 0..count as u64 {
        let mut e = [0.0; 3];
        for (j, (slot, basis)) in e.iter_mut().zip([Basis::Z, Basis::X, Basis::Y]).enumerate() {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(3 * i + j as u64);
            *slot = sample(&state, 0, basis, shots, s).map_err(|e| e.to_string())?.expectation();
        }
        let d = qlab::encoding::decode_expectations(e[0], e[1], e[2]);
        samples.extend([d.x1, d.x2]);
    }
    let losses = std::iter::once(&report.initial)
        .chain(&report.per_epoch)
        .map(|m| m.mean_loss)
        .collect();
    Ok(GenerativeResult {
        cloud: points.iter().flatten().copied().collect(),
        losses,
        path,
        samples,
    })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn generative(
    cx: f64,
    cy: f64,
    spread: f64,
    epochs: usize,
    lr: f64,
    shots: u32,
    count: usize,
    seed: u64,
) -> Result<GenerativeResult, JsError> {
    generative_native(cx, cy, spread, epochs, lr, shots, count, seed).map_err(|e| JsError::new(&e))
}
