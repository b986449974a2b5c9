use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qlab::datasets::{write_idx_images, write_idx_labels, IdxImages};
use serde_json::Value;

fn qlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

/// 240 synthetic 28x28 digits (9, 6 and 0 in rotation) whose bright half
/// depends on the digit.
fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    let mut state = 12345u32;
    for i in 0..240 {
        let d = [9u8, 6, 0][i % 3];
        for p in 0..784 {
            state = state.wrapping_mul(1_103_515_245).wrapping_add(12345);
            let noise = (state >> 16) % 60;
            let col = p % 28;
            let bright = match d {
                9 => col < 14,
                6 => col >= 14,
                _ => (p / 28) < 14,
            };
            pixels.push(if bright { 150 + noise as u8 } else { noise as u8 });
        }
        labels.push(d);
    }
    let images = dir.join("images.idx");
    let lab = dir.join("labels.idx");
    write_idx_images(&images, &IdxImages { rows: 28, cols: 28, pixels }).unwrap();
    write_idx_labels(&lab, &labels).unwrap();
    (images, lab)
}

fn mnist_args<'a>(images: &'a Path, labels: &'a Path) -> Vec<&'a str> {
    vec![
        "--mnist-images",
        images.to_str().unwrap(),
        "--mnist-labels",
        labels.to_str().unwrap(),
    ]
}

#[test]
fn help_documents_exit_codes() {
    let o = qlab(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["circles-kernel", "qnn-train", "baseline-train", "generate"] {
        assert!(text.contains(sub));
    }
    assert!(text.contains("3  configuration error"));
    assert!(text.contains("5  malformed input file"));
}

#[test]
fn circles_kernel_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = qlab(&["circles-kernel", "--seed", "3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["exact_accuracy"], 1.0);
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["config"]["circles"]["shots"], 40);
    let csv = fs::read_to_string(out.join("points.csv")).unwrap();
    assert!(csv.starts_with("x,y,rho,p0,predicted,label\n"));
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn circles_two_points_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = qlab(&[
        "circles-kernel",
        "--points",
        "2",
        "--noise",
        "0",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&out)["exact_accuracy"], 1.0);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();

    assert_eq!(code(&qlab(&["qnn-train", "--out-dir", out])), 3);
    let missing = qlab(&["qnn-train", "--mnist-images", "/no/such/file", "--mnist-labels", "/no/such/file", "--out-dir", out]);
    assert_eq!(code(&missing), 4);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/file"));

    let bad = dir.path().join("bad.idx");
    fs::write(&bad, [0u8, 0, 8, 2, 0, 0, 0, 0]).unwrap();
    let b = bad.to_str().unwrap();
    let o = qlab(&["qnn-train", "--mnist-images", b, "--mnist-labels", b, "--out-dir", out]);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("offset 0"));

    assert_eq!(code(&qlab(&["qnn-train", "--digits", "9", "--out-dir", out])), 2);
    assert_eq!(code(&qlab(&["circles-kernel", "--shots", "exact", "--out-dir", out])), 3);
    assert_eq!(code(&qlab(&["circles-kernel", "--epochs", "0", "--out-dir", out])), 3);
}

#[test]
fn qnn_single_epoch_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let (images, labels) = fixture(dir.path());
    let base = dir.path().join("base");
    let qnn = dir.path().join("qnn");
    let mut args = vec!["baseline-train", "--samples", "120", "--epochs", "3", "--hidden", "32"];
    args.extend(mnist_args(&images, &labels));
    args.extend(["--out-dir", base.to_str().unwrap()]);
    let o = qlab(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("193 parameters"));
    assert_eq!(report(&base)["n_params"], 193);

    let mut args = vec!["qnn-train", "--samples", "120", "--epochs", "1"];
    args.extend(mnist_args(&images, &labels));
    args.extend(["--out-dir", qnn.to_str().unwrap()]);
    let base_report = base.join("report.json");
    args.extend(["--baseline-report", base_report.to_str().unwrap()]);
    let o = qlab(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&qnn);
    assert_eq!(r["train"]["per_epoch"].as_array().unwrap().len(), 1);
    assert_eq!(r["n_params"], 8);
    assert_eq!(r["comparison"]["baseline_params"], 193);
    let metrics = fs::read_to_string(qnn.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().next(), Some("epoch,loss,accuracy"));
    assert_eq!(metrics.lines().count(), 3);
    let train_csv = fs::read_to_string(qnn.join("train.csv")).unwrap();
    assert!(train_csv.starts_with("f0,f1,f2,f3,label\n"));
    let pca: Value = serde_json::from_str(&fs::read_to_string(qnn.join("pca.json")).unwrap()).unwrap();
    assert_eq!(pca["k"], 4);
    assert_eq!(pca["mean"].as_array().unwrap().len(), 784);
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (images, labels) = fixture(dir.path());
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    let third = dir.path().join("c");
    let run = |out: &Path, extra: &[&str]| {
        let mut args = vec!["baseline-train", "--samples", "90", "--epochs", "4", "--hidden", "8", "--seed", "5"];
        args.extend(mnist_args(&images, &labels));
        args.extend(["--out-dir", out.to_str().unwrap()]);
        args.extend(extra);
        assert_eq!(code(&qlab(&args)), 0);
    };
    run(&first, &[]);
    run(&second, &[]);
    let cfg = first.join("report.json");
    let o = qlab(&["baseline-train", "--config", cfg.to_str().unwrap(), "--out-dir", third.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let strip = |dir: &Path| {
        let mut r = report(dir);
        r["train"]["wall_time_seconds"] = Value::Null;
        r["config"]["out_dir"] = Value::Null;
        r
    };
    assert_eq!(strip(&first), strip(&second));
    assert_eq!(strip(&first), strip(&third));
    let metrics = |d: &Path| fs::read(d.join("metrics.csv")).unwrap();
    assert_eq!(metrics(&first), metrics(&third));
}

#[test]
fn generate_writes_images() {
    let dir = tempfile::tempdir().unwrap();
    let (images, labels) = fixture(dir.path());
    let out = dir.path().join("g");
    let mut args = vec!["generate", "--count", "100"];
    args.extend(mnist_args(&images, &labels));
    args.extend(["--out-dir", out.to_str().unwrap()]);
    let o = qlab(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let header = b"P5\n28 28\n255\n";
    for e in [0, 25, 50] {
        let bytes = fs::read(out.join(format!("epoch_{e}.pgm"))).unwrap();
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 784);
    }
    assert_ne!(fs::read(out.join("epoch_0.pgm")).unwrap(), fs::read(out.join("epoch_50.pgm")).unwrap());
    assert!(out.join("sample_099.pgm").exists());

    let r = report(&out);
    assert!(r["distance_to_mean"].as_f64().unwrap() < 1e-2);
    let snaps = r["snapshots"].as_array().unwrap();
    assert!(snaps[2]["loss"].as_f64().unwrap() < snaps[0]["loss"].as_f64().unwrap());

    let csv = fs::read_to_string(out.join("samples.csv")).unwrap();
    let x1: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(x1.len(), 100);
    let mean = x1.iter().sum::<f64>() / 100.0;
    assert!(x1.iter().map(|x| (x - mean).powi(2)).sum::<f64>() > 0.0);

    let mut args = vec!["generate", "--digit", "4"];
    args.extend(mnist_args(&images, &labels));
    args.extend(["--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&qlab(&args)), 3);
}
