use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qlab::circuits::Pooling;
use qlab::experiments::{
    pgm_bytes, prepare_pair, run_baseline, run_circles, run_generate, run_qnn, ClassifierReport,
    ExperimentConfig, ExperimentKind, IMAGE_SIDE,
};
use qlab::sim::Shots;
use qlab::training::GradientMethod;
use qlab::{Error, Result};

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  1  numeric or domain error
  2  invalid command line
  3  configuration error
  4  I/O error (the message names the path)
  5  malformed input file (the message names the byte offset)";

#[derive(Parser)]
#[command(name = "qlab", version, about = "Quantum machine learning experiments on a statevector simulator", after_help = EXIT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify noisy concentric circles with the one-qubit radial kernel
    CirclesKernel(Common),
    /// Train the 8-parameter two-qubit classifier on a pair of MNIST digits
    QnnTrain(Common),
    /// Train the dense [4, h, 1] baseline on the same features
    BaselineTrain(Common),
    /// Train the one-qubit generative model on one digit class and sample images
    Generate(Common),
}

#[derive(Args)]
#[command(after_help = EXIT_HELP)]
struct Common {
    /// Start from the config embedded in a previous report.json (or a bare config file)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Shots per estimate: training shots ("exact" or N) for qnn-train; shots per
    /// repetition for circles-kernel (default 40); shots per basis for generate (default 15)
    #[arg(long)]
    shots: Option<Shots>,
    #[arg(long, default_value = "qlab-out")]
    out_dir: PathBuf,
    #[arg(long)]
    mnist_images: Option<PathBuf>,
    #[arg(long)]
    mnist_labels: Option<PathBuf>,
    /// Digit pair `a,b`; `a` is labeled 1 and `b` 0
    #[arg(long, value_parser = parse_digits)]
    digits: Option<[u8; 2]>,
    /// Hidden width of the baseline network
    #[arg(long)]
    hidden: Option<usize>,
    /// Number of pair images taken in file order
    #[arg(long)]
    samples: Option<usize>,
    /// Entanglement direction of the classifier: onto-readout or from-readout
    #[arg(long)]
    pooling: Option<Pooling>,
    /// parameter-shift or finite-difference
    #[arg(long)]
    gradient: Option<GradientMethod>,
    /// Baseline report.json to compare against (qnn-train)
    #[arg(long)]
    baseline_report: Option<PathBuf>,
    /// Number of circle points
    #[arg(long)]
    points: Option<usize>,
    /// Gaussian noise on the circles
    #[arg(long)]
    noise: Option<f64>,
    /// Shot-mode repetitions for circles-kernel
    #[arg(long)]
    repetitions: Option<usize>,
    /// Digit class modeled by generate
    #[arg(long)]
    digit: Option<u8>,
    /// Number of generated samples
    #[arg(long)]
    count: Option<usize>,
}

fn parse_digits(s: &str) -> std::result::Result<[u8; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let digit = |p: &str| match p.parse::<u8>() {
        Ok(d) if d <= 9 => Ok(d),
        _ => Err(format!("{p:?} is not a digit 0-9")),
    };
    match parts.as_slice() {
        [a, b] => Ok([digit(a)?, digit(b)?]),
        _ => Err("expected two digits like 9,6".into()),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(text: &str, e: &serde_json::Error) -> Error {
    let offset: usize = text
        .split_inclusive('\n')
        .take(e.line().saturating_sub(1))
        .map(str::len)
        .sum::<usize>()
        + e.column().saturating_sub(1);
    Error::Format {
        offset,
        message: e.to_string(),
    }
}

fn read_json(path: &Path) -> Result<(String, serde_json::Value)> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value = serde_json::from_str(&text).map_err(|e| json_err(&text, &e))?;
    Ok((text, value))
}

fn load_config(path: &Path, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let (_, value) = read_json(path)?;
    let value = value.get("config").cloned().unwrap_or(value);
    let mut cfg: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    cfg.experiment = kind;
    Ok(cfg)
}

fn finite_shots(s: Shots) -> Result<u32> {
    match s {
        Shots::Finite(n) => Ok(n),
        Shots::Exact => Err(Error::Config("this experiment needs a finite shot count".into())),
    }
}

fn build_config(kind: ExperimentKind, a: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => load_config(path, kind)?,
        None => ExperimentConfig::new(kind),
    };
    if let Some(seed) = a.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(e) = a.epochs {
        cfg.train.epochs = e;
    }
    if let Some(lr) = a.lr {
        cfg.train.learning_rate = lr;
    }
    if let Some(shots) = a.shots {
        match kind {
            ExperimentKind::CirclesKernel => cfg.circles.shots = finite_shots(shots)?,
            ExperimentKind::Generate => cfg.generate.sample_shots = finite_shots(shots)?,
            _ => cfg.train.shots = shots,
        }
    }
    cfg.out_dir = Some(a.out_dir.clone());
    if a.mnist_images.is_some() {
        cfg.mnist_images.clone_from(&a.mnist_images);
    }
    if a.mnist_labels.is_some() {
        cfg.mnist_labels.clone_from(&a.mnist_labels);
    }
    if let Some(d) = a.digits {
        cfg.digits = d;
    }
    if let Some(h) = a.hidden {
        cfg.hidden = h;
    }
    if let Some(n) = a.samples {
        cfg.samples = n;
    }
    if let Some(p) = a.pooling {
        cfg.pooling = p;
    }
    if let Some(g) = a.gradient {
        cfg.train.gradient_method = g;
    }
    if let Some(n) = a.points {
        cfg.circles.n = n;
    }
    if let Some(s) = a.noise {
        cfg.circles.noise_sigma = s;
    }
    if let Some(r) = a.repetitions {
        cfg.circles.repetitions = r;
    }
    if let Some(d) = a.digit {
        cfg.generate.digit = d;
    }
    if let Some(m) = a.count {
        cfg.generate.n_samples = m;
    }
    cfg.train.validate()?;
    Ok(cfg)
}

struct Out {
    dir: PathBuf,
}

impl Out {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Out { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))
    }

    fn json<T: serde::Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
        self.write(name, text + "\n")
    }

    fn pgm(&self, name: &str, gray: &[u8]) -> Result<()> {
        self.write(name, pgm_bytes(gray, IMAGE_SIDE, IMAGE_SIDE)?)
    }
}

fn circles(cfg: &ExperimentConfig, out: &Out) -> Result<()> {
    let r = run_circles(cfg)?;
    out.json("report.json", &r)?;
    out.write("points.csv", r.points_csv())?;
    println!("exact accuracy: {:.4}", r.exact_accuracy);
    println!(
        "shot mode ({} shots x {} repetitions): 100% in {}/{}",
        cfg.circles.shots,
        cfg.circles.repetitions,
        r.perfect_repetitions,
        r.shot_accuracies.len()
    );
    Ok(())
}

fn epochs_str(e: Option<usize>) -> String {
    e.map_or_else(|| "not reached".into(), |e| e.to_string())
}

fn classifier(cfg: &ExperimentConfig, out: &Out, baseline: Option<&Path>) -> Result<()> {
    let set = cfg.load_digits()?;
    let split = prepare_pair(&set, cfg, 4)?;
    let mut report = match cfg.experiment {
        ExperimentKind::BaselineTrain => run_baseline(cfg, &split)?,
        _ => run_qnn(cfg, &split)?,
    };
    if let Some(path) = baseline {
        let (text, _) = read_json(path)?;
        let other: ClassifierReport = serde_json::from_str(&text).map_err(|e| json_err(&text, &e))?;
        report.comparison = Some(report.compare(&other));
    }
    out.json("report.json", &report)?;
    out.write("metrics.csv", report.train.metrics_csv())?;
    out.write("train.csv", split.train.to_csv())?;
    out.write("test.csv", split.test.to_csv())?;
    out.json(
        "pca.json",
        &serde_json::json!({
            "k": split.pca.k,
            "mean": split.pca.mean,
            "components": split.pca.components,
            "eigenvalues": split.pca.eigenvalues,
            "normalization": split.normalization,
        }),
    )?;

    println!("model: {} ({} parameters)", report.model, report.n_params);
    println!(
        "final train accuracy {:.4}, held-out accuracy {:.4}",
        report.final_train_accuracy, report.test_accuracy
    );
    println!(
        "epochs to {:.2} train accuracy: {}",
        report.threshold,
        epochs_str(report.epochs_to_threshold)
    );
    if let Some(c) = &report.comparison {
        println!("                 qnn      baseline");
        println!("parameters    {:>7}  {:>10}", c.qnn_params, c.baseline_params);
        println!("final acc     {:>7.4}  {:>10.4}", c.qnn_final_accuracy, c.baseline_final_accuracy);
        println!(
            "epochs to {:.2} {:>6}  {:>10}",
            c.threshold,
            epochs_str(c.qnn_epochs_to_threshold),
            epochs_str(c.baseline_epochs_to_threshold)
        );
        println!("parameter reduction {:.2}%", 100.0 * c.parameter_reduction);
    }
    Ok(())
}

fn generate(cfg: &ExperimentConfig, out: &Out) -> Result<()> {
    let set = cfg.load_digits()?;
    let r = run_generate(cfg, &set)?;
    out.json("report.json", &r)?;
    out.write("metrics.csv", r.train.metrics_csv())?;
    out.write("samples.csv", r.samples_csv())?;
    for s in &r.snapshots {
        out.pgm(&format!("epoch_{}.pgm", s.epoch), &s.image)?;
    }
    for (i, s) in r.samples.iter().enumerate() {
        out.pgm(&format!("sample_{i:03}.pgm"), &s.image)?;
    }
    println!(
        "class mean ({:.4}, {:.4}), decoded ({:.4}, {:.4}), distance {:.2e}",
        r.dataset_mean[0], r.dataset_mean[1], r.decoded_final[0], r.decoded_final[1], r.distance_to_mean
    );
    for s in &r.snapshots {
        println!("epoch {:>3}: loss {:.4}", s.epoch, s.loss);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (kind, args) = match &cli.command {
        Command::CirclesKernel(a) => (ExperimentKind::CirclesKernel, a),
        Command::QnnTrain(a) => (ExperimentKind::QnnTrain, a),
        Command::BaselineTrain(a) => (ExperimentKind::BaselineTrain, a),
        Command::Generate(a) => (ExperimentKind::Generate, a),
    };
    let cfg = build_config(kind, args)?;
    let out = Out::new(&args.out_dir)?;
    match kind {
        ExperimentKind::CirclesKernel => circles(&cfg, &out),
        ExperimentKind::QnnTrain | ExperimentKind::BaselineTrain => {
            classifier(&cfg, &out, args.baseline_report.as_deref())
        }
        ExperimentKind::Generate => generate(&cfg, &out),
    }?;
    println!("wrote {}", args.out_dir.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 3,
        Error::Io { .. } => 4,
        Error::Format { .. } => 5,
        Error::Numeric(_) | Error::Domain(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
