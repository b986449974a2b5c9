//! Dense statevector simulation for 1 to 4 qubits.
//!
//! Qubit 0 is the least-significant bit of the amplitude index, so for two
//! qubits the basis order is `|q1 q0>` = 00, 01, 10, 11.
//!
//! RZ uses the phase-splitting form `diag(e^{-iθ/2}, e^{+iθ/2})` and CRZ
//! applies the same block on the control-set subspace. A matrix with equal
//! diagonal phases would only contribute a global phase and could not be
//! trained.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 4;

/// Identifier of the generator behind every seeded draw in this crate.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// `|0...0>` on `n_qubits` qubits.
pub fn zero_state(n_qubits: usize) -> Result<StateVector> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::config(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    let mut amplitudes = vec![ZERO; 1 << n_qubits];
    amplitudes[0] = ONE;
    Ok(StateVector {
        n_qubits,
        amplitudes,
    })
}

impl StateVector {
    /// Builds a state from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::config(format!(
                "amplitude count {len} is not 2^n for n >= 1"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::config(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let state = StateVector {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Numeric(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::config(format!(
                "qubit {qubit} out of range for a {}-qubit state",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Applies `gate` at `angle` in place.
    pub fn apply(&mut self, gate: &Gate, angle: f64) -> Result<()> {
        if !angle.is_finite() {
            return Err(Error::Numeric(format!("non-finite gate angle {angle}")));
        }
        gate.validate()?;
        self.check_qubit(gate.target)?;
        if let Some(c) = gate.control {
            self.check_qubit(c)?;
        }
        let u = gate.kind.rotation(angle);
        self.apply_block(&u, gate.target, gate.control);
        Ok(())
    }

    fn apply_block(&mut self, u: &Matrix2, target: usize, control: Option<usize>) {
        let tbit = 1usize << target;
        let cmask = control.map_or(0, |c| 1usize << c);
        for i in 0..self.amplitudes.len() {
            if i & tbit != 0 || i & cmask != cmask {
                continue;
            }
            let j = i | tbit;
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[j];
            self.amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
            self.amplitudes[j] = u[1][0] * a0 + u[1][1] * a1;
        }
    }

    /// Probability that `qubit` reads 1 in the computational basis.
    fn z_prob_one(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Single-qubit Bloch vector `(<X>, <Y>, <Z>)` read off the reduced
    /// density matrix of `qubit`.
    pub fn bloch_vector(&self, qubit: usize) -> Result<[f64; 3]> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let mut coherence = ZERO;
        let mut z = 0.0;
        for i in (0..self.amplitudes.len()).filter(|i| i & bit == 0) {
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | bit];
            coherence += a0.conj() * a1;
            z += a0.norm_sqr() - a1.norm_sqr();
        }
        Ok([2.0 * coherence.re, 2.0 * coherence.im, z])
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", a.re, a.im)?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RY,
    RZ,
    CRY,
    CRZ,
}

impl GateKind {
    pub fn is_controlled(self) -> bool {
        matches!(self, GateKind::CRY | GateKind::CRZ)
    }

    /// The 2x2 rotation acting on the target (on the control-set subspace
    /// for controlled kinds).
    pub fn rotation(self, angle: f64) -> Matrix2 {
        let half = angle / 2.0;
        match self {
            GateKind::RY | GateKind::CRY => {
                let (s, c) = half.sin_cos();
                [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ]
            }
            GateKind::RZ | GateKind::CRZ => [
                [Complex64::from_polar(1.0, -half), ZERO],
                [ZERO, Complex64::from_polar(1.0, half)],
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSource {
    Fixed(f64),
    Param(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    #[serde(flatten)]
    pub angle: AngleSource,
}

impl Gate {
    pub fn new(
        kind: GateKind,
        target: usize,
        control: Option<usize>,
        angle: AngleSource,
    ) -> Result<Self> {
        let gate = Gate {
            kind,
            target,
            control,
            angle,
        };
        gate.validate()?;
        Ok(gate)
    }

    pub fn ry(target: usize, angle: AngleSource) -> Self {
        Gate {
            kind: GateKind::RY,
            target,
            control: None,
            angle,
        }
    }

    pub fn rz(target: usize, angle: AngleSource) -> Self {
        Gate {
            kind: GateKind::RZ,
            target,
            control: None,
            angle,
        }
    }

    pub fn cry(control: usize, target: usize, angle: AngleSource) -> Result<Self> {
        Gate::new(GateKind::CRY, target, Some(control), angle)
    }

    pub fn crz(control: usize, target: usize, angle: AngleSource) -> Result<Self> {
        Gate::new(GateKind::CRZ, target, Some(control), angle)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind.is_controlled(), self.control) {
            (true, None) => Err(Error::config(format!("{:?} gate needs a control", self.kind))),
            (false, Some(_)) => Err(Error::config(format!(
                "{:?} gate cannot have a control",
                self.kind
            ))),
            (true, Some(c)) if c == self.target => Err(Error::config(format!(
                "control and target are both qubit {c}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Returns `gate(angle)` applied to `state`; the input is left untouched.
pub fn apply_gate(state: &StateVector, gate: &Gate, angle: f64) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate, angle)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];
}

/// Rotates `qubit` so that measuring Z afterwards measures `basis`.
fn rotate_into_z(state: &mut StateVector, qubit: usize, basis: Basis) -> Result<()> {
    match basis {
        Basis::Z => {}
        Basis::X => state.apply(&Gate::ry(qubit, AngleSource::Fixed(0.0)), -FRAC_PI_2)?,
        Basis::Y => {
            state.apply(&Gate::rz(qubit, AngleSource::Fixed(0.0)), -FRAC_PI_2)?;
            state.apply(&Gate::ry(qubit, AngleSource::Fixed(0.0)), -FRAC_PI_2)?;
        }
    }
    Ok(())
}

/// Probability of reading 1 on `qubit` after rotating `basis` onto Z.
fn basis_prob_one(state: &StateVector, qubit: usize, basis: Basis) -> Result<f64> {
    state.check_qubit(qubit)?;
    let p = if basis == Basis::Z {
        state.z_prob_one(qubit)
    } else {
        let mut rotated = state.clone();
        rotate_into_z(&mut rotated, qubit, basis)?;
        rotated.z_prob_one(qubit)
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Exact `<P>` for the Pauli `basis` on `qubit`.
pub fn expectation(state: &StateVector, qubit: usize, basis: Basis) -> Result<f64> {
    Ok(1.0 - 2.0 * basis_prob_one(state, qubit, basis)?)
}

/// Born probability of measuring `|1>` on `qubit` in the Z basis.
pub fn prob_one(state: &StateVector, qubit: usize) -> Result<f64> {
    let z = expectation(state, qubit, Basis::Z)?;
    Ok(((1.0 - z) / 2.0).clamp(0.0, 1.0))
}

/// Number of measurement repetitions, or the analytic limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ShotsRepr", into = "ShotsRepr")]
pub enum Shots {
    Exact,
    Finite(u32),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    Count(u32),
    Label(String),
}

impl From<Shots> for ShotsRepr {
    fn from(s: Shots) -> Self {
        match s {
            Shots::Exact => ShotsRepr::Label("exact".into()),
            Shots::Finite(n) => ShotsRepr::Count(n),
        }
    }
}

impl TryFrom<ShotsRepr> for Shots {
    type Error = String;

    fn try_from(r: ShotsRepr) -> std::result::Result<Self, String> {
        match r {
            ShotsRepr::Count(0) => Err("shot count must be positive".into()),
            ShotsRepr::Count(n) => Ok(Shots::Finite(n)),
            ShotsRepr::Label(s) if s.eq_ignore_ascii_case("exact") => Ok(Shots::Exact),
            ShotsRepr::Label(s) => Err(format!("unknown shot setting {s:?}")),
        }
    }
}

impl std::str::FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Shots::Exact);
        }
        match s.parse::<u32>() {
            Ok(0) | Err(_) => Err(Error::config(format!(
                "shots must be a positive integer or \"exact\", got {s:?}"
            ))),
            Ok(n) => Ok(Shots::Finite(n)),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub basis: Basis,
    pub qubit: usize,
    pub shots: Shots,
    pub p_one: f64,
}

impl MeasurementOutcome {
    pub fn exact(state: &StateVector, qubit: usize, basis: Basis) -> Result<Self> {
        Ok(MeasurementOutcome {
            basis,
            qubit,
            shots: Shots::Exact,
            p_one: basis_prob_one(state, qubit, basis)?,
        })
    }

    /// `<P>` implied by `p_one`.
    pub fn expectation(&self) -> f64 {
        1.0 - 2.0 * self.p_one
    }
}

/// Draws `shots` independent measurements of `qubit` in `basis` and returns
/// the empirical frequency of outcome 1.
pub fn sample(
    state: &StateVector,
    qubit: usize,
    basis: Basis,
    shots: u32,
    rng_seed: u64,
) -> Result<MeasurementOutcome> {
    let mut rng = seeded_rng(rng_seed);
    sample_with(state, qubit, basis, shots, &mut rng)
}

pub(crate) fn sample_with<R: Rng>(
    state: &StateVector,
    qubit: usize,
    basis: Basis,
    shots: u32,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    if shots == 0 {
        return Err(Error::config("shot count must be at least 1"));
    }
    let p = basis_prob_one(state, qubit, basis)?;
    let ones = (0..shots).filter(|_| rng.random::<f64>() < p).count();
    Ok(MeasurementOutcome {
        basis,
        qubit,
        shots: Shots::Finite(shots),
        p_one: ones as f64 / shots as f64,
    })
}

/// Exact outcome for `Shots::Exact`, sampled otherwise.
pub(crate) fn measure_with<R: Rng>(
    state: &StateVector,
    qubit: usize,
    basis: Basis,
    shots: Shots,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    match shots {
        Shots::Exact => MeasurementOutcome::exact(state, qubit, basis),
        Shots::Finite(n) => sample_with(state, qubit, basis, n, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn ry(q: usize) -> Gate {
        Gate::ry(q, AngleSource::Fixed(0.0))
    }

    fn rz(q: usize) -> Gate {
        Gate::rz(q, AngleSource::Fixed(0.0))
    }

    fn assert_amps(s: &StateVector, expected: &[(f64, f64)], tol: f64) {
        assert_eq!(s.amplitudes().len(), expected.len());
        for (a, &(re, im)) in s.amplitudes().iter().zip(expected) {
            assert!((a.re - re).abs() <= tol && (a.im - im).abs() <= tol, "{s} vs {expected:?}");
        }
    }

    #[test]
    fn zero_state_layout() {
        assert_amps(&zero_state(1).unwrap(), &[(1.0, 0.0), (0.0, 0.0)], 0.0);
        assert_amps(&zero_state(2).unwrap(), &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)], 0.0);
        assert!(matches!(zero_state(5), Err(Error::Config(_))));
        assert!(matches!(zero_state(0), Err(Error::Config(_))));
    }

    #[test]
    fn ry_examples() {
        let s0 = zero_state(1).unwrap();
        let s = apply_gate(&s0, &ry(0), PI).unwrap();
        assert_amps(&s, &[(0.0, 0.0), (1.0, 0.0)], 1e-15);
        let s = apply_gate(&s0, &ry(0), PI / 2.0).unwrap();
        assert_amps(&s, &[(FRAC_1_SQRT_2, 0.0), (FRAC_1_SQRT_2, 0.0)], 1e-15);
    }

    #[test]
    fn cry_flips_target_when_control_set() {
        // |10>: q1 = 1, q0 = 0 -> index 2
        let mut s = zero_state(2).unwrap();
        s.apply(&ry(1), PI).unwrap();
        let out = apply_gate(&s, &Gate::cry(1, 0, AngleSource::Fixed(0.0)).unwrap(), PI).unwrap();
        assert_amps(&out, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], 1e-15);

        // control clear: nothing happens
        let s = zero_state(2).unwrap();
        let out = apply_gate(&s, &Gate::cry(1, 0, AngleSource::Fixed(0.0)).unwrap(), PI).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn bad_gates_rejected() {
        assert!(Gate::cry(0, 0, AngleSource::Fixed(0.0)).is_err());
        assert!(Gate::new(GateKind::RY, 0, Some(1), AngleSource::Fixed(0.0)).is_err());
        assert!(Gate::new(GateKind::CRZ, 0, None, AngleSource::Fixed(0.0)).is_err());
        let s = zero_state(1).unwrap();
        assert!(matches!(apply_gate(&s, &ry(1), 0.1), Err(Error::Config(_))));
        assert!(matches!(apply_gate(&s, &ry(0), f64::NAN), Err(Error::Numeric(_))));
        assert!(matches!(apply_gate(&s, &ry(0), f64::INFINITY), Err(Error::Numeric(_))));
    }

    #[test]
    fn expectation_examples() {
        let s0 = zero_state(1).unwrap();
        assert_eq!(expectation(&s0, 0, Basis::Z).unwrap(), 1.0);
        let plus = apply_gate(&s0, &ry(0), PI / 2.0).unwrap();
        assert!((expectation(&plus, 0, Basis::X).unwrap() - 1.0).abs() < 1e-15);

        // RY(1.0) then RZ(0.7): Bloch vector (sin a cos b, sin a sin b, cos a)
        let mut s = s0.clone();
        s.apply(&ry(0), 1.0).unwrap();
        s.apply(&rz(0), 0.7).unwrap();
        let y = expectation(&s, 0, Basis::Y).unwrap();
        assert!((y - 1.0f64.sin() * 0.7f64.sin()).abs() < 1e-12, "{y}");
        assert!((y - 0.542_090_491_710_565_7).abs() < 1e-12);
        // amplitude of |0> is cos(a/2) e^{-ib/2}
        let a0 = s.amplitudes()[0] - Complex64::from_polar((0.5f64).cos(), -0.35);
        assert!(a0.norm() < 1e-15);
    }

    #[test]
    fn expectation_matches_bloch_vector() {
        let mut s = zero_state(3).unwrap();
        s.apply(&ry(0), 0.4).unwrap();
        s.apply(&ry(2), 1.9).unwrap();
        s.apply(&Gate::cry(0, 1, AngleSource::Fixed(0.0)).unwrap(), 2.2).unwrap();
        s.apply(&Gate::crz(2, 0, AngleSource::Fixed(0.0)).unwrap(), -0.8).unwrap();
        s.apply(&rz(1), 0.3).unwrap();
        for q in 0..3 {
            let b = s.bloch_vector(q).unwrap();
            for (k, basis) in [Basis::X, Basis::Y, Basis::Z].into_iter().enumerate() {
                let e = expectation(&s, q, basis).unwrap();
                assert!((e - b[k]).abs() < 1e-12, "q{q} {basis:?}: {e} vs {}", b[k]);
            }
        }
    }

    #[test]
    fn prob_one_examples() {
        let s0 = zero_state(1).unwrap();
        let one = apply_gate(&s0, &ry(0), PI).unwrap();
        assert!((prob_one(&one, 0).unwrap() - 1.0).abs() < 1e-15);
        let plus = apply_gate(&s0, &ry(0), PI / 2.0).unwrap();
        assert!((prob_one(&plus, 0).unwrap() - 0.5).abs() < 1e-15);
        let s = apply_gate(&s0, &ry(0), 2.0 * 0.3f64.sqrt().asin()).unwrap();
        assert!((prob_one(&s, 0).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sampling_examples() {
        let s0 = zero_state(1).unwrap();
        let one = apply_gate(&s0, &ry(0), PI).unwrap();
        for seed in 0..5 {
            assert_eq!(sample(&one, 0, Basis::Z, 40, seed).unwrap().p_one, 1.0);
            assert_eq!(sample(&s0, 0, Basis::Z, 15, seed).unwrap().p_one, 0.0);
        }
        let plus = apply_gate(&s0, &ry(0), PI / 2.0).unwrap();
        let out = sample(&plus, 0, Basis::Z, 100_000, 7).unwrap();
        assert!((out.p_one - 0.5).abs() <= 3.0 * (0.25f64 / 1e5).sqrt());
        assert_eq!(out.shots, Shots::Finite(100_000));
        assert_eq!(out, sample(&plus, 0, Basis::Z, 100_000, 7).unwrap());
        assert!(matches!(sample(&plus, 0, Basis::Z, 0, 1), Err(Error::Config(_))));
    }

    #[test]
    fn sampled_frequency_is_on_shot_grid() {
        let s = apply_gate(&zero_state(1).unwrap(), &ry(0), 1.1).unwrap();
        let out = sample(&s, 0, Basis::X, 15, 3).unwrap();
        let k = out.p_one * 15.0;
        assert!((k - k.round()).abs() < 1e-12);
    }

    #[test]
    fn shots_serde_and_parse() {
        assert_eq!(serde_json::to_string(&Shots::Exact).unwrap(), "\"exact\"");
        assert_eq!(serde_json::to_string(&Shots::Finite(40)).unwrap(), "40");
        assert_eq!(serde_json::from_str::<Shots>("15").unwrap(), Shots::Finite(15));
        assert!(serde_json::from_str::<Shots>("0").is_err());
        assert_eq!("EXACT".parse::<Shots>().unwrap(), Shots::Exact);
        assert!("-3".parse::<Shots>().is_err());
    }

    #[test]
    fn from_amplitudes_checks() {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(StateVector::from_amplitudes(vec![h, h]).is_ok());
        assert!(StateVector::from_amplitudes(vec![h, h, h]).is_err());
        assert!(StateVector::from_amplitudes(vec![h, ZERO]).is_err());
        assert!(StateVector::from_amplitudes(vec![ONE; 1]).is_err());
    }
}
