//! Gradients of circuit losses.
//!
//! The loss of an example is a function of a few expectation values on the
//! readout qubit. Its gradient is assembled by the chain rule:
//! `dL/dθ_k = Σ_j dL/dE_j · dE_j/dθ_k`, with `dL/dE_j` analytic (see
//! [`LossSpec::evaluate`]) and `dE_j/dθ_k` from circuit evaluations.
//!
//! Under [`GradientMethod::ParameterShift`], every RY/RZ occurrence of a
//! parameter contributes `[E(+π/2) - E(-π/2)] / 2` and every CRY/CRZ
//! occurrence a central difference with step `fd_step`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::{LossSpec, Target};
use crate::circuits::{supports_shift_rule, ParameterizedCircuit, SHIFT};
use crate::error::{Error, Result};
use crate::sim::{measure_with, AngleSource, Shots, StateVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientMethod {
    #[default]
    ParameterShift,
    FiniteDifference,
}

impl std::str::FromStr for GradientMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parameter-shift" | "shift" => Ok(GradientMethod::ParameterShift),
            "finite-difference" | "fd" => Ok(GradientMethod::FiniteDifference),
            _ => Err(Error::config(format!("unknown gradient method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub input: StateVector,
    pub target: Target,
}

/// Expectation values of `loss.probes()` on the readout qubit.
pub(crate) fn probe<R: Rng>(
    state: &StateVector,
    circuit: &ParameterizedCircuit,
    loss: &LossSpec,
    shots: Shots,
    rng: &mut R,
) -> Result<Vec<f64>> {
    loss.probes()
        .iter()
        .map(|&b| Ok(measure_with(state, circuit.readout, b, shots, rng)?.expectation()))
        .collect()
}

/// `dE_j/dθ_k` as `jac[k][j]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn probe_jacobian<R: Rng>(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    input: &StateVector,
    loss: &LossSpec,
    method: GradientMethod,
    fd_step: f64,
    shots: Shots,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let n_probes = loss.probes().len();
    let mut jac = vec![vec![0.0; n_probes]; circuit.n_params];
    let mut accumulate = |k: usize, plus: Vec<f64>, minus: Vec<f64>, denom: f64| {
        for j in 0..n_probes {
            jac[k][j] += (plus[j] - minus[j]) / denom;
        }
    };

    match method {
        GradientMethod::ParameterShift => {
            for (gi, gate) in circuit.gates.iter().enumerate() {
                let AngleSource::Param(k) = gate.angle else {
                    continue;
                };
                let (step, denom) = if supports_shift_rule(gate.kind) {
                    (SHIFT, 2.0)
                } else {
                    (fd_step, 2.0 * fd_step)
                };
                let plus = circuit.run_shifted(input, theta, gi, step)?;
                let minus = circuit.run_shifted(input, theta, gi, -step)?;
                let ep = probe(&plus, circuit, loss, shots, rng)?;
                let em = probe(&minus, circuit, loss, shots, rng)?;
                accumulate(k, ep, em, denom);
            }
        }
        GradientMethod::FiniteDifference => {
            let mut shifted = theta.to_vec();
            for k in 0..circuit.n_params {
                shifted[k] = theta[k] + fd_step;
                let plus = circuit.run(input, &shifted)?;
                shifted[k] = theta[k] - fd_step;
                let minus = circuit.run(input, &shifted)?;
                shifted[k] = theta[k];
                let ep = probe(&plus, circuit, loss, shots, rng)?;
                let em = probe(&minus, circuit, loss, shots, rng)?;
                accumulate(k, ep, em, 2.0 * fd_step);
            }
        }
    }
    Ok(jac)
}

fn check_inputs(circuit: &ParameterizedCircuit, theta: &[f64], batch: &[Example]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::config("empty batch"));
    }
    if theta.len() != circuit.n_params {
        return Err(Error::config(format!(
            "theta has {} entries for {} parameters",
            theta.len(),
            circuit.n_params
        )));
    }
    if let Some(e) = batch.iter().find(|e| e.input.n_qubits() != circuit.n_qubits) {
        return Err(Error::config(format!(
            "{}-qubit example for a {}-qubit circuit",
            e.input.n_qubits(),
            circuit.n_qubits
        )));
    }
    Ok(())
}

/// Mean loss over `batch` and its gradient.
#[allow(clippy::too_many_arguments)]
pub fn loss_and_gradient<R: Rng>(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    loss: &LossSpec,
    batch: &[Example],
    method: GradientMethod,
    fd_step: f64,
    shots: Shots,
    rng: &mut R,
) -> Result<(f64, Vec<f64>)> {
    check_inputs(circuit, theta, batch)?;
    if !(fd_step > 0.0) {
        return Err(Error::config("finite-difference step must be positive"));
    }
    let mut total = 0.0;
    let mut grad = vec![0.0; circuit.n_params];
    for ex in batch {
        let out = circuit.run(&ex.input, theta)?;
        let e = probe(&out, circuit, loss, shots, rng)?;
        let (l, dl_de) = loss.evaluate(&e, &ex.target)?;
        total += l;
        let jac = probe_jacobian(circuit, theta, &ex.input, loss, method, fd_step, shots, rng)?;
        for (g, row) in grad.iter_mut().zip(&jac) {
            *g += row.iter().zip(&dl_de).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    let n = batch.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((total / n, grad))
}

/// Exact-expectation gradient of the mean loss over `batch`.
pub fn gradient(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    loss: &LossSpec,
    batch: &[Example],
    method: GradientMethod,
    fd_step: f64,
) -> Result<Vec<f64>> {
    // exact mode never draws from the generator
    let mut rng = crate::sim::seeded_rng(0);
    loss_and_gradient(circuit, theta, loss, batch, method, fd_step, Shots::Exact, &mut rng)
        .map(|(_, g)| g)
}

/// Exact mean loss over `batch`.
pub fn mean_loss(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    loss: &LossSpec,
    batch: &[Example],
) -> Result<f64> {
    check_inputs(circuit, theta, batch)?;
    let mut rng = crate::sim::seeded_rng(0);
    let mut total = 0.0;
    for ex in batch {
        let out = circuit.run(&ex.input, theta)?;
        let e = probe(&out, circuit, loss, Shots::Exact, &mut rng)?;
        total += loss.evaluate(&e, &ex.target)?.0;
    }
    Ok(total / batch.len() as f64)
}
