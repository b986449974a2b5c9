//! End-to-end studies: kernel classification of concentric circles, the
//! two-qubit MNIST classifier against a dense baseline, and the one-qubit
//! generative model.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::baseline::{param_count, train_mlp, Mlp};
use crate::circuits::{generative_circuit, qnn_classifier_circuit_with, ParameterizedCircuit, Pooling};
use crate::datasets::{
    binary_pair, load_mnist, make_circles, pca_fit, DigitSet, LabeledDataset, Normalization, PcaModel,
    DEFAULT_INNER_RADIUS, DEFAULT_NOISE_SIGMA, DEFAULT_OUTER_RADIUS,
};
use crate::encoding::{apply_encoding, decode_expectations, decode_qubit, RadialKernel};
use crate::error::{Error, Result};
use crate::sim::{prob_one, sample_with, seeded_rng, zero_state, Basis};
use crate::training::{
    classification_examples, generative_example, train, Example, LossSpec, TrainConfig, TrainReport,
};

pub const IMAGE_SIDE: usize = 28;
pub const DEFAULT_THRESHOLD: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CirclesKernel,
    QnnTrain,
    BaselineTrain,
    Generate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirclesConfig {
    pub n: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub noise_sigma: f64,
    pub shots: u32,
    pub repetitions: usize,
}

impl Default for CirclesConfig {
    fn default() -> Self {
        CirclesConfig {
            n: 50,
            inner_radius: DEFAULT_INNER_RADIUS,
            outer_radius: DEFAULT_OUTER_RADIUS,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            shots: 40,
            repetitions: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub digit: u8,
    pub n_samples: usize,
    pub sample_shots: u32,
    pub snapshot_epochs: Vec<usize>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            digit: 0,
            n_samples: 100,
            sample_shots: 15,
            snapshot_epochs: vec![0, 25, 50],
        }
    }
}

/// Everything needed to rerun an experiment; echoed into every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub train: TrainConfig,
    pub out_dir: Option<PathBuf>,
    pub mnist_images: Option<PathBuf>,
    pub mnist_labels: Option<PathBuf>,
    /// `[a, b]`: digit `a` is label 1, digit `b` label 0.
    pub digits: [u8; 2],
    pub samples: usize,
    pub test_fraction: f64,
    pub hidden: usize,
    pub pooling: Pooling,
    pub threshold: f64,
    pub circles: CirclesConfig,
    pub generate: GenerateConfig,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        let epochs = match experiment {
            ExperimentKind::Generate => 200,
            _ => 100,
        };
        ExperimentConfig {
            experiment,
            seed: 0,
            train: TrainConfig {
                epochs,
                ..TrainConfig::default()
            },
            out_dir: None,
            mnist_images: None,
            mnist_labels: None,
            digits: [9, 6],
            samples: 913,
            test_fraction: 0.2,
            hidden: 32,
            pooling: Pooling::default(),
            threshold: DEFAULT_THRESHOLD,
            circles: CirclesConfig::default(),
            generate: GenerateConfig::default(),
        }
    }

    /// Sets the experiment seed and the training seed together.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.train.rng_seed = seed;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load_digits(&self) -> Result<DigitSet> {
        match (&self.mnist_images, &self.mnist_labels) {
            (Some(images), Some(labels)) => load_mnist(images, labels),
            _ => Err(Error::config("MNIST image and label paths are required")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub x: f64,
    pub y: f64,
    /// Radius divided by `rho_max`, as fed to the encoder.
    pub rho: f64,
    pub p0: f64,
    pub predicted: u8,
    pub label: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirclesReport {
    pub config: ExperimentConfig,
    pub kernel: RadialKernel,
    pub exact_accuracy: f64,
    /// Accuracy of each shot-mode repetition.
    pub shot_accuracies: Vec<f64>,
    pub perfect_repetitions: usize,
    pub points: Vec<PointRow>,
}

impl CirclesReport {
    pub fn points_csv(&self) -> String {
        let mut out = String::from("x,y,rho,p0,predicted,label\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{},{},{}\n", p.x, p.y, p.rho, p.p0, p.predicted, p.label));
        }
        out
    }
}

pub fn run_circles(config: &ExperimentConfig) -> Result<CirclesReport> {
    let c = &config.circles;
    if c.shots == 0 {
        return Err(Error::config("shot count must be at least 1"));
    }
    let data = make_circles(c.n, c.inner_radius, c.outer_radius, c.noise_sigma, config.seed)?;
    let points = data.points()?;
    let kernel = RadialKernel::calibrate(&points, &data.labels, [0.0, 0.0])?;
    let states = points
        .iter()
        .map(|&p| apply_encoding(&kernel.encode(p)?))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(points.len());
    for ((p, state), &label) in points.iter().zip(&states).zip(&data.labels) {
        let p0 = 1.0 - prob_one(state, 0)?;
        rows.push(PointRow {
            x: p[0],
            y: p[1],
            rho: p[0].hypot(p[1]) / kernel.rho_max,
            p0,
            predicted: RadialKernel::classify(p0),
            label,
        });
    }
    let n = rows.len() as f64;
    let exact_accuracy = rows.iter().filter(|r| r.predicted == r.label).count() as f64 / n;

    let mut rng = seeded_rng(config.seed ^ 0x00C1_C1E5);
    let mut shot_accuracies = Vec::with_capacity(c.repetitions);
    for _ in 0..c.repetitions {
        let mut correct = 0;
        for (state, &label) in states.iter().zip(&data.labels) {
            let outcome = sample_with(state, 0, Basis::Z, c.shots, &mut rng)?;
            if RadialKernel::classify(1.0 - outcome.p_one) == label {
                correct += 1;
            }
        }
        shot_accuracies.push(correct as f64 / n);
    }
    let perfect_repetitions = shot_accuracies.iter().filter(|&&a| a == 1.0).count();

    Ok(CirclesReport {
        config: config.clone(),
        kernel,
        exact_accuracy,
        shot_accuracies,
        perfect_repetitions,
        points: rows,
    })
}

/// A digit pair reduced to normalized PCA features. PCA and normalization
/// are fit on the training split; held-out rows are projected and clamped.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSplit {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub pca: PcaModel,
    pub normalization: Normalization,
}

pub fn prepare_pair(set: &DigitSet, config: &ExperimentConfig, k: usize) -> Result<PairSplit> {
    let [a, b] = config.digits;
    let pair = binary_pair(set, a, b, config.samples)?;
    let (train_raw, test_raw) = pair.split(config.test_fraction, config.seed)?;
    let pca = pca_fit(&train_raw.features, k)?;
    let train_proj = train_raw.project(&pca)?;
    let normalization = Normalization::fit(&train_proj.features)?;
    let train = train_proj.normalized_with(&normalization)?;
    let test = test_raw.project(&pca)?.normalized_with(&normalization)?;
    Ok(PairSplit {
        train,
        test,
        pca,
        normalization,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub threshold: f64,
    pub qnn_params: usize,
    pub baseline_params: usize,
    pub parameter_reduction: f64,
    pub qnn_epochs_to_threshold: Option<usize>,
    pub baseline_epochs_to_threshold: Option<usize>,
    /// QNN epochs-to-threshold over the baseline's.
    pub epoch_ratio: Option<f64>,
    pub qnn_final_accuracy: f64,
    pub baseline_final_accuracy: f64,
    /// Baseline final train accuracy minus the QNN's.
    pub accuracy_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub config: ExperimentConfig,
    /// `"qnn"` or `"mlp"`.
    pub model: String,
    pub n_params: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub train: TrainReport,
    pub final_train_accuracy: f64,
    pub test_accuracy: f64,
    pub threshold: f64,
    pub epochs_to_threshold: Option<usize>,
    pub pca: PcaModel,
    pub normalization: Normalization,
    pub comparison: Option<Comparison>,
}

impl ClassifierReport {
    pub fn compare(&self, baseline: &ClassifierReport) -> Comparison {
        let ratio = match (self.epochs_to_threshold, baseline.epochs_to_threshold) {
            (Some(q), Some(b)) => Some(q as f64 / b as f64),
            _ => None,
        };
        Comparison {
            threshold: self.threshold,
            qnn_params: self.n_params,
            baseline_params: baseline.n_params,
            parameter_reduction: 1.0 - self.n_params as f64 / baseline.n_params as f64,
            qnn_epochs_to_threshold: self.epochs_to_threshold,
            baseline_epochs_to_threshold: baseline.epochs_to_threshold,
            epoch_ratio: ratio,
            qnn_final_accuracy: self.final_train_accuracy,
            baseline_final_accuracy: baseline.final_train_accuracy,
            accuracy_gap: baseline.final_train_accuracy - self.final_train_accuracy,
        }
    }
}

/// Fraction of `examples` whose exact readout `P(|1>) >= 0.5` matches the label.
pub fn circuit_accuracy(circuit: &ParameterizedCircuit, theta: &[f64], examples: &[Example]) -> Result<f64> {
    let mut correct = 0;
    for e in examples {
        let p = prob_one(&circuit.run(&e.input, theta)?, circuit.readout)?;
        if matches!(e.target, crate::training::Target::Label(y) if u8::from(p >= 0.5) == y) {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len().max(1) as f64)
}

pub fn run_qnn(config: &ExperimentConfig, split: &PairSplit) -> Result<ClassifierReport> {
    let circuit = qnn_classifier_circuit_with(config.pooling);
    let train_ex = classification_examples(&split.train.features, &split.train.labels)?;
    let test_ex = classification_examples(&split.test.features, &split.test.labels)?;
    let report = train(&circuit, &train_ex, LossSpec::bce(), &config.train)?;
    let test_accuracy = circuit_accuracy(&circuit, &report.final_theta, &test_ex)?;
    Ok(classifier_report(config, "qnn", report, test_accuracy, split))
}

pub fn run_baseline(config: &ExperimentConfig, split: &PairSplit) -> Result<ClassifierReport> {
    let report = train_mlp(config.hidden, &split.train.features, &split.train.labels, &config.train)?;
    let mlp = Mlp::new(config.hidden, report.final_theta.clone())?;
    let objective = crate::baseline::MlpObjective::new(mlp.hidden, &split.test.features, &split.test.labels)?;
    let test_accuracy = objective.accuracy(&mlp.params);
    debug_assert_eq!(report.n_params, param_count(config.hidden));
    Ok(classifier_report(config, "mlp", report, test_accuracy, split))
}

fn classifier_report(
    config: &ExperimentConfig,
    model: &str,
    train: TrainReport,
    test_accuracy: f64,
    split: &PairSplit,
) -> ClassifierReport {
    ClassifierReport {
        config: config.clone(),
        model: model.to_string(),
        n_params: train.n_params,
        n_train: split.train.len(),
        n_test: split.test.len(),
        final_train_accuracy: train.final_accuracy().unwrap_or(0.0),
        test_accuracy,
        threshold: config.threshold,
        epochs_to_threshold: train.epochs_to_threshold(config.threshold),
        train,
        pca: split.pca.clone(),
        normalization: split.normalization.clone(),
        comparison: None,
    }
}

/// Pixels in `[0, 1]` to 8-bit gray levels.
pub fn to_gray(pixels: &[f64]) -> Vec<u8> {
    pixels
        .iter()
        .map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

/// Binary PGM (`P5`, maxval 255).
pub fn pgm_bytes(gray: &[u8], width: usize, height: usize) -> Result<Vec<u8>> {
    if gray.len() != width * height {
        return Err(Error::config(format!(
            "{} pixels for a {width}x{height} image",
            gray.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(gray);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub epoch: usize,
    pub theta: Vec<f64>,
    pub loss: f64,
    /// Exact decoded point in normalized units.
    pub decoded: [f64; 2],
    #[serde(skip)]
    pub image: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedSample {
    pub x1: f64,
    pub x2: f64,
    #[serde(skip)]
    pub image: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateReport {
    pub config: ExperimentConfig,
    pub n_class_samples: usize,
    pub train: TrainReport,
    /// Mean of the normalized PCA-2 class cloud.
    pub dataset_mean: [f64; 2],
    /// Total variance of the cloud, the lowest value the loss can reach.
    pub loss_floor: f64,
    pub decoded_final: [f64; 2],
    pub distance_to_mean: f64,
    pub snapshots: Vec<Snapshot>,
    pub samples: Vec<GeneratedSample>,
    pub pca: PcaModel,
    pub normalization: Normalization,
}

impl GenerateReport {
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("x1,x2\n");
        for s in &self.samples {
            out.push_str(&format!("{},{}\n", s.x1, s.x2));
        }
        out
    }
}

/// Normalized point back to a 28x28 gray image.
pub fn reconstruct(point: [f64; 2], pca: &PcaModel, norm: &Normalization) -> Result<Vec<u8>> {
    let z = norm.invert(&point)?;
    Ok(to_gray(&pca.inverse(&z)?))
}

pub fn run_generate(config: &ExperimentConfig, set: &DigitSet) -> Result<GenerateReport> {
    let g = &config.generate;
    if g.sample_shots == 0 {
        return Err(Error::config("shot count must be at least 1"));
    }
    let images = set.of_digit(g.digit);
    if images.is_empty() {
        return Err(Error::config(format!("digit {} does not occur in the data", g.digit)));
    }
    let pca = pca_fit(&images, 2)?;
    let projected = images.iter().map(|x| pca.forward(x)).collect::<Result<Vec<_>>>()?;
    let normalization = Normalization::fit(&projected)?;
    let points: Vec<[f64; 2]> = projected
        .iter()
        .map(|z| normalization.apply(z).map(|v| [v[0], v[1]]))
        .collect::<Result<_>>()?;

    let n = points.len() as f64;
    let mean = points.iter().fold([0.0, 0.0], |m, p| [m[0] + p[0] / n, m[1] + p[1] / n]);
    let loss_floor = points
        .iter()
        .map(|p| (p[0] - mean[0]).powi(2) + (p[1] - mean[1]).powi(2))
        .sum::<f64>()
        / n;

    let circuit = generative_circuit();
    let example = generative_example(&points)?;
    let report = train(&circuit, &[example], LossSpec::mean_squared_distance(), &config.train)?;
    let input = zero_state(1)?;
    let decode_at = |theta: &[f64]| -> Result<[f64; 2]> {
        let d = decode_qubit(&circuit.run(&input, theta)?, 0)?;
        Ok([d.x1, d.x2])
    };

    let decoded_final = decode_at(&report.final_theta)?;
    let mut snapshots = Vec::new();
    for &epoch in &g.snapshot_epochs {
        let (Some(theta), Some(m)) = (report.theta_history.get(epoch), report.metrics_at(epoch)) else {
            continue;
        };
        let decoded = decode_at(theta)?;
        snapshots.push(Snapshot {
            epoch,
            theta: theta.clone(),
            loss: m.mean_loss,
            decoded,
            image: reconstruct(decoded, &pca, &normalization)?,
        });
    }

    let state = circuit.run(&input, &report.final_theta)?;
    let mut rng = seeded_rng(config.seed ^ 0x6E_4E5A);
    let mut samples = Vec::with_capacity(g.n_samples);
    for _ in 0..g.n_samples {
        let mut e = [0.0; 3];
        for (slot, basis) in e.iter_mut().zip([Basis::Z, Basis::X, Basis::Y]) {
            *slot = sample_with(&state, 0, basis, g.sample_shots, &mut rng)?.expectation();
        }
        let d = decode_expectations(e[0], e[1], e[2]);
        samples.push(GeneratedSample {
            x1: d.x1,
            x2: d.x2,
            image: reconstruct([d.x1, d.x2], &pca, &normalization)?,
        });
    }

    Ok(GenerateReport {
        config: config.clone(),
        n_class_samples: points.len(),
        train: report,
        dataset_mean: mean,
        loss_floor,
        distance_to_mean: (decoded_final[0] - mean[0]).hypot(decoded_final[1] - mean[1]),
        decoded_final,
        snapshots,
        samples,
        pca,
        normalization,
    })
}
