//! Dense state vectors with projective Bell measurements.
//!
//! Qubit 0 is the most significant bit of a basis index. Randomness comes
//! from ChaCha8 seeded explicitly; a shot uses stream `shot` of the seed, so
//! shots are independent of evaluation order.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{c, is_unitary, parse_complex, Matrix, DEFAULT_TOL, FRAC_1_SQRT_2};
use crate::pauli::{Outcome, PauliString};

pub const MAX_QUBITS: usize = 8;
/// Probabilities below this are treated as impossible outcomes.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// Norm drift tolerated by the CLI state parser before it warns.
pub const NORM_WARN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{0} amplitudes is not a power of two")]
    BadLength(usize),
    #[error("{0} qubits exceeds the limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("state has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("state is the zero vector")]
    ZeroVector,
    #[error("targets {0:?} invalid for a {1}-qubit state")]
    BadTargets(Vec<usize>, usize),
    #[error("gate is {0}x{1}, expected {2}x{2}")]
    GateShape(usize, usize, usize),
    #[error("gate is not unitary")]
    NotUnitary,
    #[error("outcome {outcome} has probability {probability:e}, below the floor")]
    ImpossibleOutcome { outcome: Outcome, probability: f64 },
    #[error("states have {0} and {1} qubits")]
    WidthMismatch(usize, usize),
    #[error("bad amplitude `{0}`")]
    BadAmplitude(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    n: usize,
    amps: Vec<C64>,
}

fn qubits_for(len: usize) -> Result<usize, SimError> {
    if len == 0 || !len.is_power_of_two() {
        return Err(SimError::BadLength(len));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(SimError::TooManyQubits(n));
    }
    Ok(n)
}

fn norm(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

impl QuantumState {
    /// Requires unit norm within the default tolerance.
    pub fn new(amps: Vec<C64>) -> Result<Self, SimError> {
        let n = qubits_for(amps.len())?;
        let nrm = norm(&amps);
        if (nrm - 1.0).abs() > DEFAULT_TOL {
            return Err(SimError::NotNormalized(nrm));
        }
        Ok(Self { n, amps })
    }

    /// Rescales to unit norm; also returns the original norm.
    pub fn normalized(amps: Vec<C64>) -> Result<(Self, f64), SimError> {
        let n = qubits_for(amps.len())?;
        let nrm = norm(&amps);
        if nrm < PROBABILITY_FLOOR {
            return Err(SimError::ZeroVector);
        }
        Ok((Self { n, amps: amps.into_iter().map(|a| a / nrm).collect() }, nrm))
    }

    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        assert!(n <= MAX_QUBITS && index < 1 << n);
        let mut amps = vec![c(0., 0.); 1 << n];
        amps[index] = c(1., 0.);
        Self { n, amps }
    }

    /// `|ψ(ij)⟩ = (I ⊗ X^i Z^j)(|00⟩ + |11⟩)/√2`.
    pub fn bell(o: Outcome) -> Self {
        Self { n: 2, amps: bell_amplitudes(o).to_vec() }
    }

    /// Gaussian amplitudes, normalized: uniformly distributed on the sphere.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let amps: Vec<C64> = (0..1usize << n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps).expect("gaussian vector is nonzero").0
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn tensor(&self, other: &QuantumState) -> QuantumState {
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Self { n: self.n + other.n, amps }
    }

    pub fn to_column(&self) -> Matrix {
        Matrix::column(self.amps.clone()).expect("power-of-two length")
    }

    /// `g` on `targets` (`targets[0]` is the most significant qubit of `g`).
    pub fn apply_gate(&self, g: &Matrix, targets: &[usize]) -> Result<QuantumState, SimError> {
        let k = targets.len();
        if !g.is_square() || g.rows() != 1 << k {
            return Err(SimError::GateShape(g.rows(), g.cols(), 1 << k));
        }
        let mut seen = 0usize;
        for &t in targets {
            if t >= self.n || seen >> t & 1 == 1 {
                return Err(SimError::BadTargets(targets.to_vec(), self.n));
            }
            seen |= 1 << t;
        }
        if !is_unitary(g, DEFAULT_TOL).unwrap_or(false) {
            return Err(SimError::NotUnitary);
        }
        let n = self.n;
        let masks: Vec<usize> = targets.iter().map(|&t| 1 << (n - 1 - t)).collect();
        let spread = |v: usize| masks.iter().enumerate().filter(|(j, _)| v >> (k - 1 - j) & 1 == 1).map(|(_, m)| m).sum::<usize>();
        let all: usize = masks.iter().sum();
        let mut out = vec![c(0., 0.); self.amps.len()];
        for base in (0..self.amps.len()).filter(|b| b & all == 0) {
            for v in 0..1usize << k {
                let a = self.amps[base | spread(v)];
                if a == c(0., 0.) {
                    continue;
                }
                for r in 0..1usize << k {
                    out[base | spread(r)] += g.get(r, v) * a;
                }
            }
        }
        Ok(Self { n, amps: out })
    }

    /// Applies a Pauli string qubit by qubit, including its phase.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<QuantumState, SimError> {
        if p.n_qubits() != self.n {
            return Err(SimError::WidthMismatch(p.n_qubits(), self.n));
        }
        let mut s = self.clone();
        for q in 0..self.n {
            if p.x_bit(q) || p.z_bit(q) {
                s = s.apply_gate(&p.qubit(q).to_matrix(), &[q])?;
            }
        }
        let ph = p.phase_value();
        s.amps.iter_mut().for_each(|a| *a *= ph);
        Ok(s)
    }

    pub fn inner(&self, other: &QuantumState) -> Result<C64, SimError> {
        if self.n != other.n {
            return Err(SimError::WidthMismatch(self.n, other.n));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Marginal distribution of one qubit's reduced density matrix, as `ρ`.
    pub fn reduced_qubit(&self, q: usize) -> [[C64; 2]; 2] {
        let bit = 1 << (self.n - 1 - q);
        let mut rho = [[c(0., 0.); 2]; 2];
        for (idx, a) in self.amps.iter().enumerate().filter(|(i, _)| i & bit == 0) {
            let b = self.amps[idx | bit];
            rho[0][0] += a * a.conj();
            rho[0][1] += a * b.conj();
            rho[1][0] += b * a.conj();
            rho[1][1] += b * b.conj();
        }
        rho
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64, SimError> {
    Ok(a.inner(b)?.norm_sqr())
}

fn bell_amplitudes(o: Outcome) -> [C64; 4] {
    // (I ⊗ X^i Z^j)(|00⟩+|11⟩)/√2: Z^j puts (-1)^j on |11⟩, X^i flips the second bit
    let s = FRAC_1_SQRT_2;
    let sign = if o.j { -s } else { s };
    let mut v = [c(0., 0.); 4];
    v[usize::from(o.i)] = c(s, 0.);
    v[2 | usize::from(!o.i)] = c(sign, 0.);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellMode {
    /// Draw the outcome by the Born rule from stream `shot` of `seed`.
    Sample { seed: u64, shot: u64 },
    Postselect(Outcome),
    Enumerate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub qubits: (usize, usize),
    pub outcome: Outcome,
    pub probability: f64,
    pub post_state: QuantumState,
}

impl MeasurementRecord {
    /// The unnormalized projected vector `√p · post_state`.
    pub fn projected(&self) -> Vec<C64> {
        let s = self.probability.sqrt();
        self.post_state.amps.iter().map(|a| a * s).collect()
    }
}

/// `(⟨ψ(ij)|_{q1 q2} ⊗ I)|s⟩` over the remaining qubits, in their original order.
fn project(s: &QuantumState, q1: usize, q2: usize, o: Outcome) -> Vec<C64> {
    let n = s.n;
    let bell = bell_amplitudes(o);
    let rest: Vec<usize> = (0..n).filter(|&q| q != q1 && q != q2).collect();
    let (b1, b2) = (1 << (n - 1 - q1), 1 << (n - 1 - q2));
    (0..1usize << rest.len())
        .map(|r| {
            let base: usize = rest
                .iter()
                .enumerate()
                .filter(|(j, _)| r >> (rest.len() - 1 - j) & 1 == 1)
                .map(|(_, &q)| 1 << (n - 1 - q))
                .sum();
            (0..4)
                .map(|ab| {
                    let idx = base | if ab & 2 != 0 { b1 } else { 0 } | if ab & 1 != 0 { b2 } else { 0 };
                    bell[ab].conj() * s.amps[idx]
                })
                .sum()
        })
        .collect()
}

fn record(s: &QuantumState, q1: usize, q2: usize, o: Outcome, retain: bool) -> Result<MeasurementRecord, SimError> {
    let v = project(s, q1, q2, o);
    let probability = norm(&v).powi(2);
    if probability < PROBABILITY_FLOOR {
        return Err(SimError::ImpossibleOutcome { outcome: o, probability });
    }
    let rest = QuantumState::normalized(v)?.0;
    let post_state = if retain { reinsert(&rest, q1, q2, o) } else { rest };
    Ok(MeasurementRecord { qubits: (q1, q2), outcome: o, probability, post_state })
}

/// Puts `|ψ(o)⟩` back on qubits `(q1, q2)` of the full register.
fn reinsert(rest: &QuantumState, q1: usize, q2: usize, o: Outcome) -> QuantumState {
    let n = rest.n + 2;
    let bell = bell_amplitudes(o);
    let others: Vec<usize> = (0..n).filter(|&q| q != q1 && q != q2).collect();
    let mut amps = vec![c(0., 0.); 1 << n];
    for (idx, a) in amps.iter_mut().enumerate() {
        let bit = |q: usize| idx >> (n - 1 - q) & 1;
        let r = others.iter().fold(0, |acc, &q| acc << 1 | bit(q));
        *a = bell[bit(q1) << 1 | bit(q2)] * rest.amps[r];
    }
    QuantumState { n, amps }
}

/// Projective measurement in the Bell basis `{|ψ(ij)⟩}` on `(q1, q2)`.
///
/// The measured pair is dropped from the post-measurement state unless
/// `retain` is set. `Enumerate` returns every outcome with nonzero
/// probability, in `00, 01, 10, 11` order.
pub fn measure_bell(s: &QuantumState, q1: usize, q2: usize, mode: BellMode, retain: bool) -> Result<Vec<MeasurementRecord>, SimError> {
    if q1 == q2 || q1 >= s.n || q2 >= s.n {
        return Err(SimError::BadTargets(vec![q1, q2], s.n));
    }
    match mode {
        BellMode::Postselect(o) => Ok(vec![record(s, q1, q2, o, retain)?]),
        BellMode::Enumerate => Ok(Outcome::ALL.iter().filter_map(|&o| record(s, q1, q2, o, retain).ok()).collect()),
        BellMode::Sample { seed, shot } => {
            let probs = bell_probabilities(s, q1, q2)?;
            let o = sample_outcome(&probs, seed, shot);
            Ok(vec![record(s, q1, q2, o, retain)?])
        }
    }
}

/// Born probabilities of the four Bell outcomes, indexed by [`Outcome::index`].
pub fn bell_probabilities(s: &QuantumState, q1: usize, q2: usize) -> Result<[f64; 4], SimError> {
    if q1 == q2 || q1 >= s.n || q2 >= s.n {
        return Err(SimError::BadTargets(vec![q1, q2], s.n));
    }
    let mut p = [0.0; 4];
    for o in Outcome::ALL {
        p[o.index()] = norm(&project(s, q1, q2, o)).powi(2);
    }
    Ok(p)
}

fn sample_outcome(probs: &[f64; 4], seed: u64, shot: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (k, &p) in probs.iter().enumerate() {
        if u < p {
            return Outcome::from_index(k);
        }
        u -= p;
    }
    Outcome::from_index(probs.iter().rposition(|&p| p > 0.0).unwrap_or(3))
}

/// `shots` independent Bell-basis samples on `(q1, q2)`.
pub fn sample_bell(s: &QuantumState, q1: usize, q2: usize, seed: u64, shots: u64) -> Result<Vec<Outcome>, SimError> {
    let probs = bell_probabilities(s, q1, q2)?;
    Ok((0..shots).map(|shot| sample_outcome(&probs, seed, shot)).collect())
}

/// Parses comma-separated amplitudes `re+imj`. Returns the normalized state
/// and, when the input norm was off by more than [`NORM_WARN`], that norm.
pub fn parse_state(text: &str) -> Result<(QuantumState, Option<f64>), SimError> {
    let amps: Vec<C64> = text
        .split(',')
        .map(|t| parse_complex(t.trim()).ok_or_else(|| SimError::BadAmplitude(t.trim().to_string())))
        .collect::<Result<_, _>>()?;
    let (s, nrm) = QuantumState::normalized(amps)?;
    Ok((s, ((nrm - 1.0).abs() > NORM_WARN).then_some(nrm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{NamedGate, TwoQubitGate};

    fn h() -> Matrix {
        NamedGate::H.matrix()
    }

    #[test]
    fn hadamard_on_zero() {
        let s = QuantumState::zero(1).apply_gate(&h(), &[0]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!(s.amplitudes().iter().all(|a| (a - c(r, 0.)).norm() < 1e-15));
    }

    #[test]
    fn epr_and_ghz_circuits() {
        let cnot = TwoQubitGate::cnot().matrix();
        let epr = QuantumState::zero(2).apply_gate(&h(), &[0]).unwrap().apply_gate(&cnot, &[0, 1]).unwrap();
        assert_eq!(epr, QuantumState::bell(Outcome::new(false, false)));
        let ghz = epr.tensor(&QuantumState::zero(1)).apply_gate(&cnot, &[1, 2]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!((ghz.amplitudes()[0] - r).norm() < 1e-15 && (ghz.amplitudes()[7] - r).norm() < 1e-15);
        assert!((ghz.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_states_match_their_definition() {
        let epr = QuantumState::bell(Outcome::new(false, false));
        for o in Outcome::ALL {
            let expected = epr.apply_pauli(&PauliString::identity(1).tensor(&o.pauli())).unwrap();
            assert_eq!(QuantumState::bell(o), expected, "{o}");
        }
    }

    #[test]
    fn gate_targets_are_checked() {
        let s = QuantumState::zero(2);
        let cnot = TwoQubitGate::cnot().matrix();
        assert_eq!(s.apply_gate(&cnot, &[1, 1]), Err(SimError::BadTargets(vec![1, 1], 2)));
        assert_eq!(s.apply_gate(&h(), &[2]), Err(SimError::BadTargets(vec![2], 2)));
        let not_unitary = Matrix::from_real(2, 2, &[1., 1., 0., 1.]).unwrap();
        assert_eq!(s.apply_gate(&not_unitary, &[0]), Err(SimError::NotUnitary));
    }

    #[test]
    fn gate_order_is_big_endian() {
        // CNOT with control on qubit 2, target qubit 0: |001⟩ → |101⟩
        let s = QuantumState::basis(3, 0b001).apply_gate(&TwoQubitGate::cnot().matrix(), &[2, 0]).unwrap();
        assert_eq!(s, QuantumState::basis(3, 0b101));
    }

    #[test]
    fn bell_measurement_of_a_bell_state_is_certain() {
        let recs = measure_bell(&QuantumState::bell(Outcome::new(true, true)), 0, 1, BellMode::Enumerate, false).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].outcome, Outcome::new(true, true));
        assert!((recs[0].probability - 1.0).abs() < 1e-15);
        let err = measure_bell(&QuantumState::bell(Outcome::new(false, false)), 0, 1, BellMode::Postselect(Outcome::new(true, false)), false);
        assert!(matches!(err, Err(SimError::ImpossibleOutcome { .. })));
    }

    #[test]
    fn retained_pair_is_the_bell_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alpha = QuantumState::random(1, &mut rng);
        let s = alpha.tensor(&QuantumState::bell(Outcome::new(false, false)));
        for o in Outcome::ALL {
            let kept = &measure_bell(&s, 0, 1, BellMode::Postselect(o), true).unwrap()[0];
            let dropped = &measure_bell(&s, 0, 1, BellMode::Postselect(o), false).unwrap()[0];
            let expected = QuantumState::bell(o).tensor(&dropped.post_state);
            assert!((fidelity(&kept.post_state, &expected).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = QuantumState::random(1, &mut ChaCha8Rng::seed_from_u64(9)).tensor(&QuantumState::bell(Outcome::new(false, false)));
        let a = sample_bell(&s, 0, 1, 42, 200).unwrap();
        assert_eq!(a, sample_bell(&s, 0, 1, 42, 200).unwrap());
        assert_ne!(a, sample_bell(&s, 0, 1, 43, 200).unwrap());
        let one = measure_bell(&s, 0, 1, BellMode::Sample { seed: 42, shot: 7 }, false).unwrap();
        assert_eq!(one[0].outcome, a[7]);
    }

    #[test]
    fn fidelity_examples() {
        let zero = QuantumState::zero(1);
        let one = QuantumState::basis(1, 1);
        assert_eq!(fidelity(&zero, &zero).unwrap(), 1.0);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!(fidelity(&zero, &QuantumState::zero(2)).is_err());
    }

    #[test]
    fn state_literals() {
        let (s, warn) = parse_state("0.6, 0.8j").unwrap();
        assert_eq!(warn, None);
        assert_eq!(s.amplitudes()[1], c(0., 0.8));
        let (s, warn) = parse_state("1,1").unwrap();
        assert!((warn.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(parse_state("1,2,3").is_err());
        assert!(parse_state("1,x").is_err());
        assert_eq!(parse_state("0,0"), Err(SimError::ZeroVector));
    }

    #[test]
    fn reduced_qubit_of_bell_pair_is_mixed() {
        let rho = QuantumState::bell(Outcome::new(true, false)).reduced_qubit(1);
        assert!((rho[0][0] - 0.5).norm() < 1e-15 && rho[0][1].norm() < 1e-15);
    }
}
