//! Independent oracles shared by the property suite and the acceptance run.
//! Dense matrices built from textbook gate formulas and Kronecker products,
//! a dense symmetric eigensolver, and central finite differences.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use qlab::baseline::{example_loss_and_grad, param_count};
use qlab::circuits::{qnn_classifier_circuit, ParameterizedCircuit};
use qlab::datasets::{encode_idx_images, encode_idx_labels, parse_idx_images, parse_idx_labels, pca_fit, IdxImages};
use qlab::encoding::{apply_encoding, decode_qubit, encode_features, encode_pair};
use qlab::sim::{apply_gate, AngleSource, Gate, GateKind, StateVector};
use qlab::training::{adam_step, gradient, AdamConfig, Example, GradientMethod, LossSpec, Moments, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<Complex64>>;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| c(f64::from(u8::from(i == j)))).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let (ca, cb) = (a[0].len(), b[0].len());
    let mut out = vec![vec![c(0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `exp(-i θ Y / 2)`.
pub fn ry_mat(theta: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![vec![c(co), c(-s)], vec![c(s), c(co)]]
}

/// `exp(-i θ Z / 2)`.
pub fn rz_mat(theta: f64) -> Mat {
    vec![
        vec![(-I * theta / 2.0).exp(), c(0.0)],
        vec![c(0.0), (I * theta / 2.0).exp()],
    ]
}

fn projector(bit: usize) -> Mat {
    let mut p = vec![vec![c(0.0); 2]; 2];
    p[bit][bit] = c(1.0);
    p
}

/// Tensor product over qubits `n-1 .. 0` (qubit 0 is the least significant
/// index bit).
fn tensor(factors: &[Mat]) -> Mat {
    let n = factors.len();
    let mut out = factors[n - 1].clone();
    for q in (0..n - 1).rev() {
        out = kron(&out, &factors[q]);
    }
    out
}

/// Full `2^n x 2^n` matrix of a gate.
pub fn dense_gate(kind: GateKind, target: usize, control: Option<usize>, angle: f64, n: usize) -> Mat {
    let u = match kind {
        GateKind::RY | GateKind::CRY => ry_mat(angle),
        GateKind::RZ | GateKind::CRZ => rz_mat(angle),
    };
    let mut factors = vec![identity(2); n];
    match control {
        None => {
            factors[target] = u;
            tensor(&factors)
        }
        Some(ctl) => {
            let mut off = factors.clone();
            off[ctl] = projector(0);
            factors[ctl] = projector(1);
            factors[target] = u;
            add(&tensor(&off), &tensor(&factors))
        }
    }
}

pub fn mat_vec(m: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// The simulator's action on each basis state, as matrix columns.
pub fn simulated_matrix(gate: &Gate, angle: f64, n: usize) -> Mat {
    let d = 1 << n;
    let mut m = vec![vec![c(0.0); d]; d];
    for col in 0..d {
        let mut amps = vec![c(0.0); d];
        amps[col] = c(1.0);
        let s = StateVector::from_amplitudes(amps).unwrap();
        let out = apply_gate(&s, gate, angle).unwrap();
        for (row, a) in out.amplitudes().iter().enumerate() {
            m[row][col] = *a;
        }
    }
    m
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn dagger(a: &Mat) -> Mat {
    let n = a.len();
    (0..a[0].len()).map(|j| (0..n).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn make_gate(kind: GateKind, target: usize, control: Option<usize>) -> Gate {
    Gate::new(kind, target, control, AngleSource::Fixed(0.0)).unwrap()
}

pub const KINDS: [GateKind; 4] = [GateKind::RY, GateKind::RZ, GateKind::CRY, GateKind::CRZ];

/// A random gate on `n` qubits (controlled kinds need `n >= 2`).
pub fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> (Gate, f64) {
    let kinds = if n >= 2 { &KINDS[..] } else { &KINDS[..2] };
    let kind = kinds[rng.random_range(0..kinds.len())];
    let target = rng.random_range(0..n);
    let control = if kind.is_controlled() {
        let mut ctl = rng.random_range(0..n - 1);
        if ctl >= target {
            ctl += 1;
        }
        Some(ctl)
    } else {
        None
    };
    (make_gate(kind, target, control), rng.random_range(-2.0 * PI..2.0 * PI))
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let mut amps: Vec<Complex64> = (0..1 << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps).unwrap()
}

/// Max over every gate kind, placement and a spread of angles of
/// `|U†U - I|` for the simulator's own matrix, and of its distance from the
/// dense oracle matrix.
pub fn unitarity_and_oracle_error() -> (f64, f64) {
    let mut unit = 0.0f64;
    let mut oracle = 0.0f64;
    for n in 1..=3 {
        for kind in KINDS {
            for target in 0..n {
                let controls: Vec<Option<usize>> = if kind.is_controlled() {
                    (0..n).filter(|&q| q != target).map(Some).collect()
                } else {
                    vec![None]
                };
                for control in controls {
                    for k in -8..=8 {
                        let angle = k as f64 * 0.77;
                        let g = make_gate(kind, target, control);
                        let m = simulated_matrix(&g, angle, n);
                        unit = unit.max(max_diff(&matmul(&dagger(&m), &m), &identity(1 << n)));
                        oracle = oracle.max(max_diff(&m, &dense_gate(kind, target, control, angle, n)));
                    }
                }
            }
        }
    }
    (unit, oracle)
}

/// Runs `depth` random gates on a random state and returns
/// (norm drift, distance from the dense matrix product).
pub fn composition_error(seed: u64, n: usize, depth: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = random_state(&mut rng, n);
    let mut sim = start.clone();
    let mut product = identity(1 << n);
    for _ in 0..depth {
        let (g, angle) = random_gate(&mut rng, n);
        sim = apply_gate(&sim, &g, angle).unwrap();
        product = matmul(&dense_gate(g.kind, g.target, g.control, angle, n), &product);
    }
    let expected = mat_vec(&product, start.amplitudes());
    let dist = sim
        .amplitudes()
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    ((sim.norm_sqr() - 1.0).abs(), dist)
}

/// Largest decode error over a grid of feature pairs away from the poles.
pub fn round_trip_grid_error(steps: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 1..steps {
        for j in 0..=steps {
            let x1 = i as f64 / steps as f64;
            let x2 = j as f64 / steps as f64;
            encode_pair(x1, x2).unwrap();
            let s = apply_encoding(&encode_features(&[x1, x2]).unwrap()).unwrap();
            let d = decode_qubit(&s, 0).unwrap();
            worst = worst.max((d.x1 - x1).abs()).max((d.x2 - x2).abs());
        }
    }
    worst
}

/// Parameter-shift gradient against full central differences on the
/// classifier at random parameters and inputs.
pub fn shift_vs_fd_error(seed: u64, trials: usize) -> f64 {
    let circuit: ParameterizedCircuit = qnn_classifier_circuit();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let theta: Vec<f64> = (0..circuit.n_params).map(|_| rng.random_range(-PI..PI)).collect();
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..0.99)).collect();
        let batch = [Example {
            input: apply_encoding(&encode_features(&x).unwrap()).unwrap(),
            target: Target::Label(rng.random_range(0..2u8)),
        }];
        let ps = gradient(&circuit, &theta, &LossSpec::bce(), &batch, GradientMethod::ParameterShift, 1e-5).unwrap();
        let fd = gradient(&circuit, &theta, &LossSpec::bce(), &batch, GradientMethod::FiniteDifference, 1e-5).unwrap();
        for (a, b) in ps.iter().zip(&fd) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// Distance of the first Adam step from `-lr * g / (|g| + eps)`, which is
/// what bias correction reduces it to.
pub fn adam_first_step_error() -> f64 {
    let cfg = AdamConfig {
        learning_rate: 0.1,
        ..AdamConfig::default()
    };
    let grads = [1.0, -0.25, 3.0];
    let (theta, _) = adam_step(&[0.0, 0.5, -1.0], &grads, &Moments::zeros(3), 1, &cfg).unwrap();
    let expected = [-0.1 / (1.0 + 1e-8), 0.5 + 0.1 * 0.25 / (0.25 + 1e-8), -1.0 - 0.1 * 3.0 / (3.0 + 1e-8)];
    theta.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Eigenpairs from a dense symmetric solver, largest first, with each
/// vector's largest-magnitude entry made positive.
pub fn pca_oracle(rows: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let cov = x.transpose() * &x / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    for &i in order.iter().take(k) {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        values.push(eig.eigenvalues[i]);
        vectors.push(v);
    }
    (values, vectors)
}

#[rustfmt::skip]
pub const PCA_FIXTURE: [[f64; 3]; 5] = [
    [2.5, 2.4, 0.5],
    [0.5, 0.7, 1.9],
    [2.2, 2.9, 1.1],
    [1.9, 2.2, 0.3],
    [3.1, 3.0, 1.4],
];

/// (orthonormality error, component distance, eigenvalue distance) between
/// the power-iteration fit and the dense oracle.
pub fn pca_errors(rows: &[Vec<f64>], k: usize) -> (f64, f64, f64) {
    let model = pca_fit(rows, k).unwrap();
    let (values, vectors) = pca_oracle(rows, k);
    let mut ortho = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let dot: f64 = model.components[i].iter().zip(&model.components[j]).map(|(a, b)| a * b).sum();
            ortho = ortho.max((dot - f64::from(u8::from(i == j))).abs());
        }
    }
    let mut comp = 0.0f64;
    for (a, b) in model.components.iter().zip(&vectors) {
        for (x, y) in a.iter().zip(b) {
            comp = comp.max((x - y).abs());
        }
    }
    let vals = model
        .eigenvalues
        .iter()
        .zip(&values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (ortho, comp, vals)
}

pub fn pca_fixture_rows() -> Vec<Vec<f64>> {
    PCA_FIXTURE.iter().map(|r| r.to_vec()).collect()
}

/// Random data with a well separated spectrum.
pub fn anisotropic_rows(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..d)
                .map(|j| rng.random_range(-1.0..1.0) * (d - j) as f64 + 0.3 * j as f64)
                .collect()
        })
        .collect()
}

/// `| ‖x − inv(fwd(x))‖² − Σ_{i ≥ k} (v_i · (x − mean))² |` for random `x`.
pub fn pca_tail_energy_error(seed: u64) -> f64 {
    let (n, d, k) = (40, 8, 4);
    let rows = anisotropic_rows(seed, n, d);
    let model = pca_fit(&rows, k).unwrap();
    let (_, all) = pca_oracle(&rows, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let back = model.inverse_unclipped(&model.forward(&x).unwrap()).unwrap();
        let resid: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum();
        let tail: f64 = all[k..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(x.iter().zip(&model.mean))
                    .map(|(vi, (xi, mi))| vi * (xi - mi))
                    .sum::<f64>()
                    .powi(2)
            })
            .sum();
        worst = worst.max((resid.sqrt() - tail.sqrt()).abs());
    }
    worst
}

/// Whether a hand-built IDX pair survives encode → parse → encode unchanged.
pub fn idx_round_trip_exact() -> bool {
    let images = IdxImages {
        rows: 28,
        cols: 28,
        pixels: (0..2 * 784).map(|i| (i * 37 % 256) as u8).collect(),
    };
    let bytes = encode_idx_images(&images);
    let parsed = parse_idx_images(&bytes).unwrap();
    let labels = vec![9u8, 6];
    let lbytes = encode_idx_labels(&labels);
    parsed == images
        && encode_idx_images(&parsed) == bytes
        && parse_idx_labels(&lbytes).unwrap() == labels
        && bytes[..4] == [0, 0, 8, 3]
        && lbytes[..4] == [0, 0, 8, 1]
}

/// Backpropagated MLP gradient against central differences.
pub fn mlp_backprop_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for h in [2, 8, 16, 32] {
        let params: Vec<f64> = (0..param_count(h)).map(|_| rng.random_range(-0.5..0.5)).collect();
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        let y = rng.random_range(0..2u8);
        let (_, g) = example_loss_and_grad(h, &params, &x, y);
        let step = 1e-6;
        for k in 0..params.len() {
            let mut p = params.clone();
            p[k] += step;
            let up = example_loss_and_grad(h, &p, &x, y).0;
            p[k] -= 2.0 * step;
            let down = example_loss_and_grad(h, &p, &x, y).0;
            worst = worst.max(((up - down) / (2.0 * step) - g[k]).abs());
        }
    }
    worst
}
