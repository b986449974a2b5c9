//! Layered variational circuits.
//!
//! A single-qubit unitary layer appends `RY, RZ` to each listed qubit. An
//! entanglement layer walks adjacent pairs `(q_i, q_{i+1})` of its qubit list
//! and appends `CRY, CRZ` with `q_i` as control and `q_{i+1}` as target, so
//! the order of the list fixes the direction in which information flows.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{seeded_rng, AngleSource, Gate, GateKind, StateVector, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerKind {
    SingleQubitUnitary,
    Entanglement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub qubits: Vec<usize>,
}

impl LayerSpec {
    pub fn unitary(qubits: impl Into<Vec<usize>>) -> Self {
        LayerSpec {
            kind: LayerKind::SingleQubitUnitary,
            qubits: qubits.into(),
        }
    }

    pub fn entanglement(qubits: impl Into<Vec<usize>>) -> Self {
        LayerSpec {
            kind: LayerKind::Entanglement,
            qubits: qubits.into(),
        }
    }

    /// Trainable parameters contributed by this layer.
    pub fn n_params(&self) -> usize {
        let n = self.qubits.len();
        match self.kind {
            LayerKind::SingleQubitUnitary => 2 * n,
            LayerKind::Entanglement => 2 * n.saturating_sub(1),
        }
    }
}

/// Expands `spec` into gates whose parameter indices start at `next_param`.
/// Returns the gates and the first unused parameter index.
pub fn build_layer(spec: &LayerSpec, next_param: usize) -> Result<(Vec<Gate>, usize)> {
    if spec.qubits.is_empty() {
        return Err(Error::config("layer has no qubits"));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = spec.qubits.iter().find(|q| !seen.insert(**q)) {
        return Err(Error::config(format!("qubit {dup} listed twice in layer")));
    }

    let mut next = next_param;
    let mut take = || {
        let p = AngleSource::Param(next);
        next += 1;
        p
    };
    let mut gates = Vec::with_capacity(spec.n_params());
    match spec.kind {
        LayerKind::SingleQubitUnitary => {
            for &q in &spec.qubits {
                gates.push(Gate::ry(q, take()));
                gates.push(Gate::rz(q, take()));
            }
        }
        LayerKind::Entanglement => {
            for pair in spec.qubits.windows(2) {
                let (control, target) = (pair[0], pair[1]);
                gates.push(Gate::cry(control, target, take())?);
                gates.push(Gate::crz(control, target, take())?);
            }
        }
    }
    Ok((gates, next))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterizedCircuit {
    pub n_qubits: usize,
    /// Qubit whose measurement is the model output.
    pub readout: usize,
    pub gates: Vec<Gate>,
    pub n_params: usize,
    pub theta: Vec<f64>,
}

impl ParameterizedCircuit {
    /// Stacks `layers` with gapless, sequential parameter indices. `theta`
    /// starts at zero.
    pub fn from_layers(n_qubits: usize, readout: usize, layers: &[LayerSpec]) -> Result<Self> {
        let mut gates = Vec::new();
        let mut next = 0;
        for layer in layers {
            let (g, n) = build_layer(layer, next)?;
            gates.extend(g);
            next = n;
        }
        let circuit = ParameterizedCircuit {
            n_qubits,
            readout,
            gates,
            n_params: next,
            theta: vec![0.0; next],
        };
        circuit.validate()?;
        Ok(circuit)
    }

    /// A circuit with no gates and no parameters.
    pub fn empty(n_qubits: usize) -> Result<Self> {
        let circuit = ParameterizedCircuit {
            n_qubits,
            readout: 0,
            gates: Vec::new(),
            n_params: 0,
            theta: Vec::new(),
        };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return Err(Error::config(format!(
                "qubit count {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.readout >= self.n_qubits {
            return Err(Error::config(format!("readout qubit {} out of range", self.readout)));
        }
        if self.theta.len() != self.n_params {
            return Err(Error::config(format!(
                "theta has {} entries for {} parameters",
                self.theta.len(),
                self.n_params
            )));
        }
        let mut used = vec![false; self.n_params];
        for (i, g) in self.gates.iter().enumerate() {
            g.validate()?;
            let out_of_range = g.target >= self.n_qubits
                || g.control.is_some_and(|c| c >= self.n_qubits);
            if out_of_range {
                return Err(Error::config(format!("gate {i} addresses a missing qubit")));
            }
            match g.angle {
                AngleSource::Param(p) if p >= self.n_params => {
                    return Err(Error::config(format!(
                        "gate {i} uses parameter {p} but only {} exist",
                        self.n_params
                    )));
                }
                AngleSource::Param(p) => used[p] = true,
                AngleSource::Fixed(a) if !a.is_finite() => {
                    return Err(Error::Numeric(format!("gate {i} has fixed angle {a}")));
                }
                AngleSource::Fixed(_) => {}
            }
        }
        if let Some(p) = used.iter().position(|u| !u) {
            return Err(Error::config(format!("parameter {p} is not used by any gate")));
        }
        Ok(())
    }

    /// Number of gates that carry a trainable parameter.
    pub fn trainable_gate_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.angle, AngleSource::Param(_)))
            .count()
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != self.n_params {
            return Err(Error::config(format!(
                "theta has {} entries for {} parameters",
                theta.len(),
                self.n_params
            )));
        }
        self.theta = theta;
        Ok(self)
    }

    fn check_run_args(&self, input: &StateVector, theta: &[f64]) -> Result<()> {
        if input.n_qubits() != self.n_qubits {
            return Err(Error::config(format!(
                "{}-qubit input for a {}-qubit circuit",
                input.n_qubits(),
                self.n_qubits
            )));
        }
        if theta.len() != self.n_params {
            return Err(Error::config(format!(
                "theta has {} entries for {} parameters",
                theta.len(),
                self.n_params
            )));
        }
        Ok(())
    }

    fn angle_of(&self, gate: &Gate, theta: &[f64]) -> f64 {
        match gate.angle {
            AngleSource::Fixed(a) => a,
            AngleSource::Param(p) => theta[p],
        }
    }

    /// Applies every gate in order to a copy of `input`.
    pub fn run(&self, input: &StateVector, theta: &[f64]) -> Result<StateVector> {
        self.check_run_args(input, theta)?;
        let mut state = input.clone();
        for g in &self.gates {
            state.apply(g, self.angle_of(g, theta))?;
        }
        Ok(state)
    }

    /// Like [`run`](Self::run) with `delta` added to the angle of gate
    /// `gate_index` only.
    pub fn run_shifted(
        &self,
        input: &StateVector,
        theta: &[f64],
        gate_index: usize,
        delta: f64,
    ) -> Result<StateVector> {
        self.check_run_args(input, theta)?;
        if gate_index >= self.gates.len() {
            return Err(Error::config(format!("no gate {gate_index}")));
        }
        let mut state = input.clone();
        for (i, g) in self.gates.iter().enumerate() {
            let mut angle = self.angle_of(g, theta);
            if i == gate_index {
                angle += delta;
            }
            state.apply(g, angle)?;
        }
        Ok(state)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: ParameterizedCircuit =
            serde_json::from_str(s).map_err(|e| Error::config(format!("circuit json: {e}")))?;
        c.validate()?;
        Ok(c)
    }
}

/// Which way the entanglement layer of the classifier points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    /// Control q1, target q0: data is pooled onto the readout qubit q0.
    #[default]
    OntoReadout,
    /// Control q0, target q1.
    FromReadout,
}

impl std::str::FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onto-readout" => Ok(Pooling::OntoReadout),
            "from-readout" => Ok(Pooling::FromReadout),
            _ => Err(Error::config(format!(
                "pooling must be onto-readout or from-readout, got {s:?}"
            ))),
        }
    }
}

/// Layers of the two-qubit classifier: unitary(q0, q1), entanglement,
/// unitary(q0).
pub fn qnn_classifier_layers(pooling: Pooling) -> Vec<LayerSpec> {
    let pair = match pooling {
        Pooling::OntoReadout => vec![1, 0],
        Pooling::FromReadout => vec![0, 1],
    };
    vec![
        LayerSpec::unitary(vec![0, 1]),
        LayerSpec::entanglement(pair),
        LayerSpec::unitary(vec![0]),
    ]
}

/// The 8-parameter two-qubit classifier, read out on q0.
pub fn qnn_classifier_circuit() -> ParameterizedCircuit {
    qnn_classifier_circuit_with(Pooling::default())
}

pub fn qnn_classifier_circuit_with(pooling: Pooling) -> ParameterizedCircuit {
    ParameterizedCircuit::from_layers(2, 0, &qnn_classifier_layers(pooling))
        .expect("classifier layers are well formed")
}

/// One qubit, `RY(θ0)` then `RZ(θ1)`.
pub fn generative_circuit() -> ParameterizedCircuit {
    ParameterizedCircuit::from_layers(1, 0, &[LayerSpec::unitary(vec![0])])
        .expect("generative layer is well formed")
}

/// Uniform draws from `[-half_width, half_width]`.
pub fn init_theta(n_params: usize, half_width: f64, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..n_params)
        .map(|_| rng.random_range(-half_width..=half_width))
        .collect()
}

pub const DEFAULT_INIT_HALF_WIDTH: f64 = 0.1;

/// Shift used by the two-term parameter-shift rule.
pub const SHIFT: f64 = FRAC_PI_2;

/// True when the gate's generator has eigenvalues `±1/2`, so the two-term
/// shift rule is exact for it.
pub fn supports_shift_rule(kind: GateKind) -> bool {
    !kind.is_controlled()
}
