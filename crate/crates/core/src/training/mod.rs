//! The hybrid training cycle: encode, run, measure, score, differentiate,
//! update.

mod adam;
mod gradient;
mod loss;


use rand::seq::SliceRandom;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamConfig, Moments};
pub use gradient::{gradient, loss_and_gradient, mean_loss, Example, GradientMethod};
pub use loss::{
    bce_grad, bce_loss, generative_loss, LossKind, LossSpec, Target, DEFAULT_CLAMP_EPSILON,
};

use crate::circuits::{init_theta, ParameterizedCircuit, DEFAULT_INIT_HALF_WIDTH};
use crate::encoding::{apply_encoding, encode_features};
use crate::error::{Error, Result};
use crate::sim::{seeded_rng, zero_state, Shots, RNG_ALGORITHM};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BatchRepr", into = "BatchRepr")]
pub enum BatchSize {
    #[default]
    Full,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BatchRepr {
    Size(usize),
    Label(String),
}

impl From<BatchSize> for BatchRepr {
    fn from(b: BatchSize) -> Self {
        match b {
            BatchSize::Full => BatchRepr::Label("full".into()),
            BatchSize::Fixed(n) => BatchRepr::Size(n),
        }
    }
}

impl TryFrom<BatchRepr> for BatchSize {
    type Error = String;

    fn try_from(r: BatchRepr) -> std::result::Result<Self, String> {
        match r {
            BatchRepr::Size(0) => Err("batch size must be positive".into()),
            BatchRepr::Size(n) => Ok(BatchSize::Fixed(n)),
            BatchRepr::Label(s) if s == "full" => Ok(BatchSize::Full),
            BatchRepr::Label(s) => Err(format!("unknown batch size {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub batch_size: BatchSize,
    pub gradient_method: GradientMethod,
    pub fd_step: f64,
    /// Shots per expectation estimate during gradient evaluation. Reported
    /// metrics always use exact expectations.
    pub shots: Shots,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            epochs: 100,
            learning_rate: adam.learning_rate,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.eps,
            batch_size: BatchSize::Full,
            gradient_method: GradientMethod::ParameterShift,
            fd_step: 1e-5,
            shots: Shots::Exact,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::config("finite-difference step must be positive"));
        }
        self.adam().validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub mean_loss: f64,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Metrics at the starting parameters (epoch 0).
    pub initial: EpochMetrics,
    /// Metrics after each epoch's updates, epochs `1..=epochs`.
    pub per_epoch: Vec<EpochMetrics>,
    /// Parameters after each epoch; entry 0 is the starting point.
    pub theta_history: Vec<Vec<f64>>,
    pub final_theta: Vec<f64>,
    pub n_params: usize,
    pub wall_time_seconds: f64,
    pub rng_algorithm: String,
    pub config_echo: TrainConfig,
}

impl TrainReport {
    /// Everything except wall time agrees.
    pub fn same_run(&self, other: &TrainReport) -> bool {
        let strip = |r: &TrainReport| TrainReport {
            wall_time_seconds: 0.0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }

    /// Metrics at `epoch`, with 0 meaning the starting parameters.
    pub fn metrics_at(&self, epoch: usize) -> Option<&EpochMetrics> {
        if epoch == 0 {
            Some(&self.initial)
        } else {
            self.per_epoch.get(epoch - 1)
        }
    }

    pub fn final_accuracy(&self) -> Option<f64> {
        self.per_epoch.last().and_then(|m| m.accuracy)
    }

    /// First training epoch (1-based) whose accuracy reaches `threshold`.
    pub fn epochs_to_threshold(&self, threshold: f64) -> Option<usize> {
        self.per_epoch
            .iter()
            .find(|m| m.accuracy.is_some_and(|a| a >= threshold))
            .map(|m| m.epoch)
    }

    /// `epoch,loss,accuracy` rows, epoch 0 first.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("epoch,loss,accuracy\n");
        for m in std::iter::once(&self.initial).chain(&self.per_epoch) {
            let acc = m.accuracy.map(|a| a.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", m.epoch, m.mean_loss, acc));
        }
        out
    }
}

/// Something Adam can minimize over an indexed set of examples.
pub trait Objective {
    fn n_params(&self) -> usize;

    fn n_examples(&self) -> usize;

    /// Mean loss and gradient over the examples in `batch`.
    fn loss_and_grad(
        &self,
        theta: &[f64],
        batch: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<f64>)>;

    /// Mean loss and, for classifiers, accuracy over every example.
    fn metrics(&self, theta: &[f64]) -> Result<(f64, Option<f64>)>;
}

/// Runs `config.epochs` epochs of Adam from `theta0`.
pub fn optimize<O: Objective>(
    objective: &O,
    theta0: Vec<f64>,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    if objective.n_examples() == 0 {
        return Err(Error::config("dataset is empty"));
    }
    if theta0.len() != objective.n_params() {
        return Err(Error::config(format!(
            "theta has {} entries for {} parameters",
            theta0.len(),
            objective.n_params()
        )));
    }
    let start = Stopwatch::start();
    let adam = config.adam();
    // separate stream from the one used for parameter initialization
    let mut rng = seeded_rng(config.rng_seed ^ 0x9E37_79B9_7F4A_7C15);

    let metrics = |epoch: usize, theta: &[f64]| -> Result<EpochMetrics> {
        let (mean_loss, accuracy) = objective.metrics(theta)?;
        Ok(EpochMetrics {
            epoch,
            mean_loss,
            accuracy,
        })
    };

    let mut theta = theta0;
    let mut moments = Moments::zeros(theta.len());
    let mut t = 0u64;
    let initial = metrics(0, &theta)?;
    let mut per_epoch = Vec::with_capacity(config.epochs);
    let mut theta_history = vec![theta.clone()];
    let mut order: Vec<usize> = (0..objective.n_examples()).collect();

    for epoch in 1..=config.epochs {
        let chunk = match config.batch_size {
            BatchSize::Full => order.len(),
            BatchSize::Fixed(n) => {
                order.shuffle(&mut rng);
                n.min(order.len())
            }
        };
        for batch in order.chunks(chunk) {
            let (_, grad) = objective.loss_and_grad(&theta, batch, &mut rng)?;
            t += 1;
            let (next, m) = adam_step(&theta, &grad, &moments, t, &adam)?;
            theta = next;
            moments = m;
        }
        per_epoch.push(metrics(epoch, &theta)?);
        theta_history.push(theta.clone());
    }

    Ok(TrainReport {
        initial,
        per_epoch,
        n_params: theta.len(),
        final_theta: theta,
        theta_history,
        wall_time_seconds: start.seconds(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        config_echo: config.clone(),
    })
}

/// A parameterized circuit scored by `loss` on a fixed set of examples.
pub struct CircuitObjective<'a> {
    pub circuit: &'a ParameterizedCircuit,
    pub examples: &'a [Example],
    pub loss: LossSpec,
    pub method: GradientMethod,
    pub fd_step: f64,
    pub shots: Shots,
}

impl<'a> CircuitObjective<'a> {
    pub fn new(
        circuit: &'a ParameterizedCircuit,
        examples: &'a [Example],
        loss: LossSpec,
        config: &TrainConfig,
    ) -> Result<Self> {
        if let Some(e) = examples.iter().find(|e| e.input.n_qubits() != circuit.n_qubits) {
            return Err(Error::config(format!(
                "{}-qubit example for a {}-qubit circuit",
                e.input.n_qubits(),
                circuit.n_qubits
            )));
        }
        Ok(CircuitObjective {
            circuit,
            examples,
            loss,
            method: config.gradient_method,
            fd_step: config.fd_step,
            shots: config.shots,
        })
    }

    /// Exact readout probability of `|1>` for each example.
    pub fn predictions(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.examples
            .iter()
            .map(|e| {
                let s = self.circuit.run(&e.input, theta)?;
                crate::sim::prob_one(&s, self.circuit.readout)
            })
            .collect()
    }
}

impl Objective for CircuitObjective<'_> {
    fn n_params(&self) -> usize {
        self.circuit.n_params
    }

    fn n_examples(&self) -> usize {
        self.examples.len()
    }

    fn loss_and_grad(
        &self,
        theta: &[f64],
        batch: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<f64>)> {
        let picked: Vec<Example> = batch.iter().map(|&i| self.examples[i].clone()).collect();
        // keep the caller's stream advancing identically in exact mode
        let mut local = seeded_rng(rng.next_u64());
        loss_and_gradient(
            self.circuit,
            theta,
            &self.loss,
            &picked,
            self.method,
            self.fd_step,
            self.shots,
            &mut local,
        )
    }

    fn metrics(&self, theta: &[f64]) -> Result<(f64, Option<f64>)> {
        let loss = mean_loss(self.circuit, theta, &self.loss, self.examples)?;
        let accuracy = match self.loss.kind {
            LossKind::BinaryCrossEntropy => Some(classification_accuracy(self, theta)?),
            LossKind::MeanSquaredDistance => None,
        };
        Ok((loss, accuracy))
    }
}

fn classification_accuracy(obj: &CircuitObjective<'_>, theta: &[f64]) -> Result<f64> {
    let preds = obj.predictions(theta)?;
    let correct = preds
        .iter()
        .zip(obj.examples)
        .filter(|(p, e)| matches!(e.target, Target::Label(y) if u8::from(**p >= 0.5) == y))
        .count();
    Ok(correct as f64 / preds.len() as f64)
}

/// Trains from the seeded near-identity initialization.
pub fn train(
    circuit: &ParameterizedCircuit,
    dataset: &[Example],
    loss: LossSpec,
    config: &TrainConfig,
) -> Result<TrainReport> {
    let theta0 = init_theta(circuit.n_params, DEFAULT_INIT_HALF_WIDTH, config.rng_seed);
    train_from(circuit, dataset, loss, config, theta0)
}

pub fn train_from(
    circuit: &ParameterizedCircuit,
    dataset: &[Example],
    loss: LossSpec,
    config: &TrainConfig,
    theta0: Vec<f64>,
) -> Result<TrainReport> {
    let objective = CircuitObjective::new(circuit, dataset, loss, config)?;
    optimize(&objective, theta0, config)
}

/// Encodes each feature row and pairs it with its label.
pub fn classification_examples(features: &[Vec<f64>], labels: &[u8]) -> Result<Vec<Example>> {
    if features.len() != labels.len() {
        return Err(Error::config("features and labels differ in length"));
    }
    features
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            Ok(Example {
                input: apply_encoding(&encode_features(x)?)?,
                target: Target::Label(y),
            })
        })
        .collect()
}

/// A single `|0>` example scored against the whole point cloud.
pub fn generative_example(points: &[[f64; 2]]) -> Result<Example> {
    if points.is_empty() {
        return Err(Error::config("generative dataset is empty"));
    }
    Ok(Example {
        input: zero_state(1)?,
        target: Target::Points(points.to_vec()),
    })
}

/// Wall clock that reads zero on targets without one (wasm32 in a browser).
struct Stopwatch(#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return Stopwatch(std::time::Instant::now());
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        return Stopwatch();
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        return 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{generative_circuit, qnn_classifier_circuit};
    use crate::encoding::decode_qubit;

    #[test]
    fn zero_param_circuit_has_flat_loss() {
        let c = ParameterizedCircuit::empty(1).unwrap();
        let ex = classification_examples(&[vec![0.2, 0.5], vec![0.9, 0.1]], &[0, 1]).unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let r = train(&c, &ex, LossSpec::bce(), &cfg).unwrap();
        assert_eq!(r.per_epoch.len(), 5);
        assert!(r.per_epoch.iter().all(|m| m.mean_loss == r.initial.mean_loss));
        assert_eq!(r.per_epoch[0].accuracy, Some(1.0));
    }

    #[test]
    fn generative_single_point() {
        let ex = [generative_example(&[[0.3, 0.6]]).unwrap()];
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 0.05,
            ..TrainConfig::default()
        };
        let c = generative_circuit();
        let r = train(&c, &ex, LossSpec::mean_squared_distance(), &cfg).unwrap();
        let s = c.run(&zero_state(1).unwrap(), &r.final_theta).unwrap();
        let d = decode_qubit(&s, 0).unwrap();
        assert!((d.x1 - 0.3).abs() < 1e-3 && (d.x2 - 0.6).abs() < 1e-3, "{d:?}");
        assert!(r.per_epoch.iter().all(|m| m.accuracy.is_none()));
    }

    #[test]
    fn repeat_runs_agree() {
        let ex = classification_examples(
            &[vec![0.1, 0.2, 0.3, 0.4], vec![0.8, 0.7, 0.6, 0.5], vec![0.2, 0.9, 0.4, 0.1]],
            &[0, 1, 0],
        )
        .unwrap();
        let cfg = TrainConfig {
            epochs: 4,
            rng_seed: 9,
            batch_size: BatchSize::Fixed(2),
            ..TrainConfig::default()
        };
        let c = qnn_classifier_circuit();
        let a = train(&c, &ex, LossSpec::bce(), &cfg).unwrap();
        let b = train(&c, &ex, LossSpec::bce(), &cfg).unwrap();
        assert!(a.same_run(&b));
        assert_eq!(a.theta_history.len(), 5);

        let shots = TrainConfig {
            shots: Shots::Finite(50),
            ..cfg.clone()
        };
        let a = train(&c, &ex, LossSpec::bce(), &shots).unwrap();
        let b = train(&c, &ex, LossSpec::bce(), &shots).unwrap();
        assert!(a.same_run(&b));
    }

    #[test]
    fn rejects_bad_setups() {
        let c = qnn_classifier_circuit();
        let one_qubit = classification_examples(&[vec![0.1, 0.2]], &[0]).unwrap();
        assert!(matches!(
            train(&c, &one_qubit, LossSpec::bce(), &TrainConfig::default()),
            Err(Error::Config(_))
        ));
        assert!(train(&c, &[], LossSpec::bce(), &TrainConfig::default()).is_err());
        let bad = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(generative_example(&[]).is_err());
    }

    #[test]
    fn report_helpers() {
        let m = |epoch, acc| EpochMetrics {
            epoch,
            mean_loss: 1.0 / (epoch as f64 + 1.0),
            accuracy: Some(acc),
        };
        let r = TrainReport {
            initial: m(0, 0.95),
            per_epoch: vec![m(1, 0.5), m(2, 0.91), m(3, 0.97)],
            theta_history: vec![],
            final_theta: vec![],
            n_params: 0,
            wall_time_seconds: 0.1,
            rng_algorithm: RNG_ALGORITHM.into(),
            config_echo: TrainConfig::default(),
        };
        assert_eq!(r.epochs_to_threshold(0.9), Some(2));
        assert_eq!(r.epochs_to_threshold(0.99), None);
        assert_eq!(r.metrics_at(0).unwrap().epoch, 0);
        assert_eq!(r.metrics_at(3).unwrap().accuracy, Some(0.97));
        let csv = r.metrics_csv();
        assert!(csv.starts_with("epoch,loss,accuracy\n0,"));
        assert_eq!(csv.lines().count(), 5);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"batch_size\":\"full\""));
        assert_eq!(serde_json::from_str::<TrainReport>(&json).unwrap(), r);
    }
}
