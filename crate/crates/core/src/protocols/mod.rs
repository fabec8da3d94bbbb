//! Teleportation-family protocols, each available as a diagram and as a
//! circuit on the state-vector simulator.
//!
//! Bell measurements act on a pair `(a, b)` and project onto
//! `|ψ(ij)⟩ = (I ⊗ X^i Z^j)|ψ(00)⟩`; in diagrams this is a cap whose right
//! leg (the `b` wire) carries the dot `(X^i Z^j)†`.

mod chi;
mod run;

use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::diagram::{Diagram, DiagramBuilder, DiagramError};
use crate::gate::{GateExpr, NamedGate, TwoQubitGate};
use crate::linalg::{c, Matrix, FRAC_1_SQRT_2};
use crate::pauli::{correction_table, conjugated_outcome_operator, CuKind, Outcome, PauliError, PauliString};
use crate::rewrite::RewriteError;
use crate::statevec::{measure_bell, BellMode, QuantumState, SimError};

pub use chi::{chi_correction, chi_correction_candidates, chi_state, ghz_identities_check, GhzIdentities};
pub use run::{run, OutcomePolicy, OutcomeRecord, ProtocolReport, RunConfig};

pub const MAX_HOPS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid protocol: {0}")]
    Invalid(String),
    #[error("expected {expected} Bell outcomes, got {got}")]
    OutcomeCount { expected: usize, got: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("outcome {outcome}: derived correction {derived} does not restore the target")]
    CorrectionMismatch { outcome: Outcome, derived: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolSpec {
    Teleport,
    ChainedTeleport { hops: usize },
    GateTeleportSingle { u: GateExpr },
    GateTeleportCu { gate: TwoQubitGate },
    Ghz,
    GhzHadamard,
    ChiPrepare,
}

/// Names accepted by [`ProtocolSpec::from_name`].
pub const PROTOCOL_NAMES: [&str; 7] = ["teleport", "chained", "gate-single", "gate-cu", "ghz", "ghz-hadamard", "chi"];

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolSpec::ChainedTeleport { hops } => write!(f, "chained(k={hops})"),
            ProtocolSpec::GateTeleportSingle { u } => write!(f, "gate-single({u})"),
            ProtocolSpec::GateTeleportCu { gate } => write!(f, "gate-cu({gate})"),
            other => f.write_str(other.name()),
        }
    }
}

/// The post-selected circuit run for one outcome assignment.
#[derive(Clone, Debug)]
pub struct Simulation {
    /// Joint probability of the outcomes.
    pub probability: f64,
    /// Normalized state of the surviving qubits.
    pub post_state: QuantumState,
    /// `√probability · post_state`.
    pub projected: Vec<C64>,
}

/// A correction operator on the output qubits.
#[derive(Clone, Debug)]
pub struct Correction {
    pub label: String,
    pub matrix: Matrix,
}

fn pauli_dagger(o: Outcome) -> GateExpr {
    GateExpr::pauli(o.i, o.j).dagger()
}

impl ProtocolSpec {
    pub fn from_name(name: &str, gate: Option<&str>, hops: usize) -> Result<Self, ProtocolError> {
        let need_gate = || gate.ok_or_else(|| ProtocolError::Invalid(format!("`{name}` requires --gate")));
        let spec = match name {
            "teleport" => ProtocolSpec::Teleport,
            "chained" => ProtocolSpec::ChainedTeleport { hops },
            "gate-single" => ProtocolSpec::GateTeleportSingle {
                u: need_gate()?.parse().map_err(|e| ProtocolError::Invalid(format!("{e}")))?,
            },
            "gate-cu" => ProtocolSpec::GateTeleportCu {
                gate: need_gate()?.parse().map_err(|e| ProtocolError::Invalid(format!("{e}")))?,
            },
            "ghz" => ProtocolSpec::Ghz,
            "ghz-hadamard" => ProtocolSpec::GhzHadamard,
            "chi" => ProtocolSpec::ChiPrepare,
            other => {
                return Err(ProtocolError::Invalid(format!(
                    "unknown protocol `{other}`; expected one of {}",
                    PROTOCOL_NAMES.join(", ")
                )))
            }
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolSpec::Teleport => "teleport",
            ProtocolSpec::ChainedTeleport { .. } => "chained",
            ProtocolSpec::GateTeleportSingle { .. } => "gate-single",
            ProtocolSpec::GateTeleportCu { .. } => "gate-cu",
            ProtocolSpec::Ghz => "ghz",
            ProtocolSpec::GhzHadamard => "ghz-hadamard",
            ProtocolSpec::ChiPrepare => "chi",
        }
    }

    pub fn check(&self) -> Result<(), ProtocolError> {
        match self {
            ProtocolSpec::ChainedTeleport { hops } if !(1..=MAX_HOPS).contains(hops) => {
                Err(ProtocolError::Invalid(format!("hops must be between 1 and {MAX_HOPS}, got {hops}")))
            }
            ProtocolSpec::GateTeleportSingle { u } if !u.is_unitary() => Err(ProtocolError::Invalid(format!("{u} is not unitary"))),
            ProtocolSpec::GateTeleportCu { gate: TwoQubitGate::Cu(u) } if !u.is_unitary() => {
                Err(ProtocolError::Invalid(format!("{u} is not unitary")))
            }
            _ => Ok(()),
        }
    }

    /// Number of Bell measurements.
    pub fn measurements(&self) -> usize {
        match self {
            ProtocolSpec::Teleport | ProtocolSpec::GateTeleportSingle { .. } | ProtocolSpec::ChiPrepare => 1,
            ProtocolSpec::ChainedTeleport { hops } => *hops,
            ProtocolSpec::GateTeleportCu { .. } => 2,
            ProtocolSpec::Ghz | ProtocolSpec::GhzHadamard => 0,
        }
    }

    /// Number of unknown input qubits.
    pub fn input_qubits(&self) -> usize {
        match self {
            ProtocolSpec::Teleport | ProtocolSpec::ChainedTeleport { .. } | ProtocolSpec::GateTeleportSingle { .. } => 1,
            ProtocolSpec::GateTeleportCu { .. } => 2,
            ProtocolSpec::Ghz | ProtocolSpec::GhzHadamard | ProtocolSpec::ChiPrepare => 0,
        }
    }

    fn expect_outcomes(&self, outcomes: &[Outcome]) -> Result<(), ProtocolError> {
        if outcomes.len() != self.measurements() {
            return Err(ProtocolError::OutcomeCount { expected: self.measurements(), got: outcomes.len() });
        }
        Ok(())
    }

    /// The diagram for one outcome assignment. Post-measurement cups are
    /// dropped; unknown input states are open input legs.
    pub fn build_diagram(&self, outcomes: &[Outcome]) -> Result<Diagram, ProtocolError> {
        self.check()?;
        self.expect_outcomes(outcomes)?;
        let label: String = outcomes.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",");
        let mut b = DiagramBuilder::new(if label.is_empty() { self.name().to_string() } else { format!("{}-{label}", self.name()) });
        match self {
            ProtocolSpec::Teleport | ProtocolSpec::ChainedTeleport { .. } => {
                let mut prev = b.input();
                for &o in outcomes {
                    let (l, r) = b.cup();
                    let l = b.dot_unless_identity(&l, pauli_dagger(o));
                    b.cap(&prev, &l);
                    prev = r;
                }
                b.output(&prev);
            }
            ProtocolSpec::GateTeleportSingle { u } => {
                let a = b.input();
                let (l, r) = b.cup();
                let r = b.dot_unless_identity(&r, u.clone());
                let l = b.dot_unless_identity(&l, pauli_dagger(outcomes[0]));
                b.cap(&a, &l);
                b.output(&r);
            }
            ProtocolSpec::GateTeleportCu { gate } => {
                let alpha = b.input();
                let beta = b.input();
                let (w2, w3) = b.cup();
                let (w4, w5) = b.cup();
                let (o3, o4) = b.gate2(&w3, &w4, gate.clone());
                let w2 = b.dot_unless_identity(&w2, pauli_dagger(outcomes[0]));
                b.cap(&alpha, &w2);
                let beta = b.dot_unless_identity(&beta, pauli_dagger(outcomes[1]));
                b.cap(&w5, &beta);
                b.output(&o3);
                b.output(&o4);
            }
            ProtocolSpec::Ghz => {
                let (w1, w2) = b.cup();
                let w3 = b.ket0();
                let (w2, w3) = b.gate2(&w2, &w3, TwoQubitGate::cnot());
                for e in [&w1, &w2, &w3] {
                    b.output(e);
                }
            }
            ProtocolSpec::GhzHadamard => {
                let (w1, w2) = b.cup();
                let w3 = b.ket0();
                let w3 = b.dot(&w3, GateExpr::named(NamedGate::H));
                let (w2, w3) = b.gate2(&w2, &w3, TwoQubitGate::Cnot { control: 1 });
                for e in [&w1, &w2, &w3] {
                    b.output(e);
                }
            }
            ProtocolSpec::ChiPrepare => {
                // wires 1–3: Hadamard-transformed GHZ; wires 4–6: GHZ
                let (w1, w2) = b.cup();
                let w3 = b.ket0();
                let w3 = b.dot(&w3, GateExpr::named(NamedGate::H));
                let (w2, w3) = b.gate2(&w2, &w3, TwoQubitGate::Cnot { control: 1 });
                let (w4, w5) = b.cup();
                let w6 = b.ket0();
                let (w5, w6) = b.gate2(&w5, &w6, TwoQubitGate::cnot());
                let w4 = b.dot_unless_identity(&w4, pauli_dagger(outcomes[0]));
                b.cap(&w3, &w4);
                for e in [&w1, &w2, &w5, &w6] {
                    b.output(e);
                }
            }
        }
        Ok(b.finish())
    }

    /// Runs the circuit on `input` (ignored when the protocol has no inputs)
    /// and post-selects the given outcomes.
    pub fn simulate(&self, input: &QuantumState, outcomes: &[Outcome]) -> Result<Simulation, ProtocolError> {
        self.check()?;
        self.expect_outcomes(outcomes)?;
        if input.n_qubits() != self.input_qubits() && self.input_qubits() > 0 {
            return Err(ProtocolError::Invalid(format!("expected {} input qubits, got {}", self.input_qubits(), input.n_qubits())));
        }
        let epr = QuantumState::bell(Outcome::new(false, false));
        let cnot = TwoQubitGate::cnot().matrix();
        let h = NamedGate::H.matrix();
        let mut probability = 1.0;
        let mut measure = |s: &QuantumState, q1: usize, q2: usize, o: Outcome| -> Result<QuantumState, ProtocolError> {
            let rec = measure_bell(s, q1, q2, BellMode::Postselect(o), false)?.remove(0);
            probability *= rec.probability;
            Ok(rec.post_state)
        };
        let post = match self {
            ProtocolSpec::Teleport | ProtocolSpec::ChainedTeleport { .. } => {
                // each pair is attached just before its measurement
                let mut s = input.clone();
                for &o in outcomes {
                    s = measure(&s.tensor(&epr), 0, 1, o)?;
                }
                s
            }
            ProtocolSpec::GateTeleportSingle { u } => {
                let resource = epr.apply_gate(&u.matrix(), &[1])?;
                measure(&input.tensor(&resource), 0, 1, outcomes[0])?
            }
            ProtocolSpec::GateTeleportCu { gate } => {
                // qubits α, pair A, pair B, β; the input holds α⊗β
                let s = input.tensor(&epr).tensor(&epr);
                // reorder α β a2 a3 b4 b5 into α a2 a3 b4 b5 β
                let s = permute(&s, &[0, 2, 3, 4, 5, 1]);
                let s = s.apply_gate(&gate.matrix(), &[2, 3])?;
                let s = measure(&s, 0, 1, outcomes[0])?;
                measure(&s, 2, 3, outcomes[1])?
            }
            ProtocolSpec::Ghz => epr.tensor(&QuantumState::zero(1)).apply_gate(&cnot, &[1, 2])?,
            ProtocolSpec::GhzHadamard => {
                let ghz = epr.tensor(&QuantumState::zero(1)).apply_gate(&cnot, &[1, 2])?;
                (0..3).try_fold(ghz, |s, q| s.apply_gate(&h, &[q]))?
            }
            ProtocolSpec::ChiPrepare => {
                let left = epr.tensor(&QuantumState::zero(1)).apply_gate(&h, &[2])?.apply_gate(&cnot, &[2, 1])?;
                let right = epr.tensor(&QuantumState::zero(1)).apply_gate(&cnot, &[1, 2])?;
                measure(&left.tensor(&right), 2, 3, outcomes[0])?
            }
        };
        let projected = post.amplitudes().iter().map(|a| a * probability.sqrt()).collect();
        Ok(Simulation { probability, post_state: post, projected })
    }

    /// The state the corrected output should equal (up to global phase).
    pub fn target(&self, input: &QuantumState) -> Result<QuantumState, ProtocolError> {
        let s = FRAC_1_SQRT_2;
        Ok(match self {
            ProtocolSpec::Teleport | ProtocolSpec::ChainedTeleport { .. } => input.clone(),
            ProtocolSpec::GateTeleportSingle { u } => input.apply_gate(&u.matrix(), &[0])?,
            ProtocolSpec::GateTeleportCu { gate } => input.apply_gate(&gate.matrix(), &[0, 1])?,
            ProtocolSpec::Ghz => {
                let mut v = vec![c(0., 0.); 8];
                v[0] = c(s, 0.);
                v[7] = c(s, 0.);
                QuantumState::new(v)?
            }
            ProtocolSpec::GhzHadamard => {
                let v = (0..8usize).map(|k| if k.count_ones() % 2 == 0 { c(0.5, 0.) } else { c(0., 0.) }).collect();
                QuantumState::new(v)?
            }
            ProtocolSpec::ChiPrepare => chi_state(),
        })
    }

    /// The outcome-dependent correction on the output qubits.
    pub fn correction(&self, outcomes: &[Outcome]) -> Result<Correction, ProtocolError> {
        self.expect_outcomes(outcomes)?;
        Ok(match self {
            ProtocolSpec::Teleport | ProtocolSpec::ChainedTeleport { .. } => {
                // output = M_k* ⋯ M_1* α with M* = M for real Paulis
                let residual = outcomes.iter().try_fold(PauliString::identity(1), |acc, o| o.pauli().multiply(&acc))?;
                let corr = residual.dagger();
                Correction { label: corr.to_string(), matrix: corr.to_matrix() }
            }
            ProtocolSpec::GateTeleportSingle { u } => {
                let m = GateExpr::pauli(outcomes[0].i, outcomes[0].j);
                let corr = u.then_after(&m.transpose()).then_after(&u.dagger()).simplified();
                Correction { label: corr.to_string(), matrix: corr.matrix() }
            }
            ProtocolSpec::GateTeleportCu { gate } => {
                let kind = match gate {
                    TwoQubitGate::Cnot { control: 0 } => Some(CuKind::Cnot),
                    TwoQubitGate::Cz => Some(CuKind::Cz),
                    _ => None,
                };
                match kind {
                    Some(kind) => {
                        let e = &correction_table(kind)[&(outcomes[0], outcomes[1])];
                        let corr = e.q.dagger().tensor(&e.p.dagger());
                        Correction { label: format!("{}⊗{}", e.q.dagger(), e.p.dagger()), matrix: corr.to_matrix() }
                    }
                    None => Correction {
                        label: "(CU(M*⊗N†)CU†)†".to_string(),
                        matrix: conjugated_outcome_operator(gate, outcomes[0], outcomes[1]).dagger(),
                    },
                }
            }
            ProtocolSpec::Ghz | ProtocolSpec::GhzHadamard => Correction { label: "I".to_string(), matrix: Matrix::identity(8) },
            ProtocolSpec::ChiPrepare => {
                let p = chi_correction(outcomes[0])?;
                Correction { label: p.to_string(), matrix: p.to_matrix() }
            }
        })
    }

    /// Every outcome assignment, lexicographically.
    pub fn all_outcomes(&self) -> Vec<Vec<Outcome>> {
        let m = self.measurements();
        (0..1usize << (2 * m))
            .map(|code| (0..m).map(|t| Outcome::from_index(code >> (2 * (m - 1 - t)) & 3)).collect())
            .collect()
    }
}

/// Reorders qubits: qubit `k` of the result is qubit `from[k]` of `s`.
fn permute(s: &QuantumState, from: &[usize]) -> QuantumState {
    let n = s.n_qubits();
    let amps: Vec<C64> = (0..1usize << n)
        .map(|idx| {
            let src = from.iter().enumerate().fold(0, |acc, (k, &q)| acc | (idx >> (n - 1 - k) & 1) << (n - 1 - q));
            s.amplitudes()[src]
        })
        .collect();
    QuantumState::new(amps).expect("permutation preserves norm")
}

/// The Pauli residual `(Q, P)` read off a gate-teleportation normal form:
/// the dot above each output, `I` where there is none. Dots that do not
/// reach an output are part of the resource and are skipped.
pub fn residual_pauli(nf: &Diagram) -> Option<PauliString> {
    let dots = crate::rewrite::residual_dots(nf);
    let mut bits = vec![(false, false); nf.outputs.len()];
    for r in &dots {
        let Some(k) = r.output else { continue };
        let g: GateExpr = r.gate.parse().ok()?;
        let (x, z) = crate::rewrite::canonical_pauli(&g)?;
        let (bx, bz) = bits[k];
        if bx || bz {
            return None;
        }
        bits[k] = (x, z);
    }
    Some(PauliString::from_bits(&bits, 0))
}
