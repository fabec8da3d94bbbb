use serde::Serialize;

use super::{residual_pauli, ProtocolError, ProtocolSpec};
use crate::diagram::evaluate;
use crate::gate::{NamedGate, TwoQubitGate};
use crate::linalg::{c, embed, Matrix};
use crate::pauli::{Outcome, PauliString};
use crate::rewrite::normalize;
use crate::statevec::{fidelity, QuantumState};

const FIDELITY_TOL: f64 = 1e-10;

/// `(I ⊗ CNOT₃₂ ⊗ I)(|ψ(00)⟩ ⊗ |ψ(00)⟩)`, qubit 3 controlling qubit 2.
pub fn chi_state() -> QuantumState {
    let epr = QuantumState::bell(Outcome::new(false, false));
    epr.tensor(&epr)
        .apply_gate(&TwoQubitGate::cnot().matrix(), &[2, 1])
        .expect("4-qubit register")
}

/// Unsigned 4-qubit Pauli strings `P` with `P · post ∝ |χ⟩`, where `post` is
/// the post-measurement state of the χ preparation for `outcome`.
pub fn chi_correction_candidates(outcome: Outcome) -> Result<Vec<PauliString>, ProtocolError> {
    let spec = ProtocolSpec::ChiPrepare;
    let sim = spec.simulate(&QuantumState::zero(0), &[outcome])?;
    let chi = chi_state();
    let mut out = Vec::new();
    for p in PauliString::all(4) {
        if fidelity(&sim.post_state.apply_pauli(&p)?, &chi)? >= 1.0 - FIDELITY_TOL {
            out.push(p);
        }
    }
    Ok(out)
}

/// The correction for the χ preparation: the inverse of the Pauli residual
/// left by normalizing the outcome diagram, checked against
/// [`chi_correction_candidates`].
pub fn chi_correction(outcome: Outcome) -> Result<PauliString, ProtocolError> {
    let spec = ProtocolSpec::ChiPrepare;
    let d = spec.build_diagram(&[outcome])?;
    let nf = normalize(&d)?;
    let derived = residual_pauli(&nf.diagram)
        .ok_or_else(|| ProtocolError::Invalid(format!("outcome {outcome}: normal form residual is not a Pauli string")))?
        .dagger();
    let candidates = chi_correction_candidates(outcome)?;
    if !candidates.contains(&derived.unsigned()) {
        return Err(ProtocolError::CorrectionMismatch { outcome, derived: derived.to_string() });
    }
    Ok(derived)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhzIdentities {
    /// `(H⊗H) CNOT (H⊗H)` against the reversed CNOT.
    pub sandwich_deviation: f64,
    /// `(H⊗H⊗H)|G⟩` against the Hadamard-GHZ diagram.
    pub hadamard_ghz_deviation: f64,
    /// Largest entry of `[CNOT₅₂, CNOT₅₆]` on six qubits.
    pub commutator_norm: f64,
    pub pass: bool,
}

pub fn ghz_identities_check(tol: f64) -> Result<GhzIdentities, ProtocolError> {
    let h = NamedGate::H.matrix();
    let hh = h.tensor(&h);
    let cnot = TwoQubitGate::cnot().matrix();
    let reversed = TwoQubitGate::Cnot { control: 1 }.matrix();
    let sandwich = &(&hh * &cnot) * &hh;
    let sandwich_deviation = sandwich.max_abs_diff(&reversed).expect("same shape");

    let ghz = ProtocolSpec::Ghz.simulate(&QuantumState::zero(0), &[])?.post_state;
    let hghz = (0..3).try_fold(ghz, |s, q| s.apply_gate(&h, &[q]))?;
    let diagram = evaluate(&ProtocolSpec::GhzHadamard.build_diagram(&[])?)?;
    let hadamard_ghz_deviation = hghz.to_column().max_abs_diff(&diagram).map_err(|e| ProtocolError::Invalid(e.to_string()))?;

    // wires 1..6 are qubits 0..5
    let c52 = embed(&cnot, &[4, 1], 6).expect("valid targets");
    let c56 = embed(&cnot, &[4, 5], 6).expect("valid targets");
    let comm = (&c52 * &c56).add(&(&c56 * &c52).scale(c(-1., 0.))).expect("same shape");
    let commutator_norm = comm.max_abs_diff(&Matrix::zeros(64, 64)).expect("same shape");

    let pass = sandwich_deviation <= tol && hadamard_ghz_deviation <= tol && commutator_norm <= tol;
    Ok(GhzIdentities { sandwich_deviation, hadamard_ghz_deviation, commutator_norm, pass })
}
