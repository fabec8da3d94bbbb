use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ProtocolError, ProtocolSpec};
use crate::diagram::evaluate;
use crate::gate::GateExpr;
use crate::linalg::{Matrix, DEFAULT_TOL};
use crate::pauli::Outcome;
use crate::rewrite::{normalize, residual_dots, ScalarReport};
use crate::statevec::{fidelity, QuantumState, SimError};

#[derive(Clone, Debug, PartialEq)]
pub enum OutcomePolicy {
    All,
    Fixed(Vec<Vec<Outcome>>),
    Sampled { shots: u64 },
}

impl OutcomePolicy {
    /// Parses `all`, `sample`, or comma-separated outcome bits such as
    /// `10` or `10,01` (one pair per measurement).
    pub fn parse(text: &str, shots: u64) -> Result<Self, ProtocolError> {
        match text.trim() {
            "all" => Ok(OutcomePolicy::All),
            "sample" => Ok(OutcomePolicy::Sampled { shots }),
            bits => {
                let outcomes = bits
                    .split(',')
                    .map(|p| match p.trim().as_bytes() {
                        [i @ b'0'..=b'1', j @ b'0'..=b'1'] => Ok(Outcome::from_bits(i - b'0', j - b'0')),
                        _ => Err(ProtocolError::Invalid(format!("bad outcome `{p}`; expected two bits like 10"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(OutcomePolicy::Fixed(vec![outcomes]))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    /// Random input states per outcome assignment.
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { trials: 20, seed: 0, tol: DEFAULT_TOL }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeRecord {
    pub outcomes: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    /// Joint Born probability for the first trial input.
    pub probability: f64,
    pub residual: Vec<String>,
    pub correction: String,
    /// For single-gate teleportation, the residual `U M*` written as `(U M* U†)·U`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factored: Option<String>,
    pub scalar: ScalarReport,
    pub normalize_deviation: f64,
    pub agreement_deviation: f64,
    pub min_fidelity: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolReport {
    pub protocol: String,
    pub seed: u64,
    pub trials: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub records: Vec<OutcomeRecord>,
}

impl ProtocolReport {
    pub fn human(&self) -> String {
        let mut s = format!("protocol {}  seed {}  trials {}\n", self.protocol, self.seed, self.trials);
        s += &format!(
            "{:<12} {:>8} {:<22} {:<16} {:<14} {:>10} {:>10} {:>14}\n",
            "outcomes", "p", "residual", "correction", "scalar", "nf dev", "sim dev", "min fidelity"
        );
        for r in &self.records {
            let residual = if r.residual.is_empty() { "-".to_string() } else { r.residual.join(" ") };
            let outcomes = match r.count {
                Some(n) => format!("{} x{n}", r.outcomes),
                None => r.outcomes.clone(),
            };
            s += &format!(
                "{:<12} {:>8.4} {:<22} {:<16} {:<14} {:>10.1e} {:>10.1e} {:>14.12} {}\n",
                outcomes,
                r.probability,
                residual,
                r.correction,
                r.scalar.value,
                r.normalize_deviation,
                r.agreement_deviation,
                r.min_fidelity,
                if r.pass { "ok" } else { "FAIL" }
            );
        }
        s += if self.pass { "result: pass\n" } else { "result: fail\n" };
        s
    }
}

fn input_state(spec: &ProtocolSpec, seed: u64, trial: usize) -> QuantumState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    match spec.input_qubits() {
        0 => QuantumState::zero(0),
        1 => QuantumState::random(1, &mut rng),
        // product inputs
        _ => QuantumState::random(1, &mut rng).tensor(&QuantumState::random(1, &mut rng)),
    }
}

fn outcome_label(outcomes: &[Outcome]) -> String {
    if outcomes.is_empty() {
        "-".to_string()
    } else {
        outcomes.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn check_branch(spec: &ProtocolSpec, outcomes: &[Outcome], cfg: &RunConfig) -> Result<OutcomeRecord, ProtocolError> {
    let d = spec.build_diagram(outcomes)?;
    let nf = normalize(&d)?;
    let ev = evaluate(&d)?;
    let normalize_deviation = ev.max_abs_diff(&evaluate(&nf.diagram)?).unwrap_or(f64::INFINITY);
    let correction = spec.correction(outcomes)?;
    let all_outputs: Vec<usize> = (0..d.outputs.len()).collect();
    let trials = if spec.input_qubits() == 0 { 1 } else { cfg.trials.max(1) };
    let mut agreement_deviation: f64 = 0.0;
    let mut min_fidelity: f64 = 1.0;
    let mut probability = 0.0;
    for t in 0..trials {
        let input = input_state(spec, cfg.seed, t);
        let sim = spec.simulate(&input, outcomes)?;
        if t == 0 {
            probability = sim.probability;
        }
        let predicted = &ev * &input.to_column();
        let projected = Matrix::column(sim.projected.clone()).map_err(|e| ProtocolError::Invalid(e.to_string()))?;
        agreement_deviation = agreement_deviation.max(predicted.max_abs_diff(&projected).unwrap_or(f64::INFINITY));
        let corrected = sim.post_state.apply_gate(&correction.matrix, &all_outputs)?;
        min_fidelity = min_fidelity.min(fidelity(&corrected, &spec.target(&input)?)?);
    }
    let residual = residual_dots(&nf.diagram)
        .into_iter()
        .map(|r| match r.output {
            Some(k) => format!("{}@{k}", r.gate),
            None => r.gate,
        })
        .collect();
    let pass = normalize_deviation <= cfg.tol
        && agreement_deviation <= cfg.tol
        && min_fidelity >= 1.0 - cfg.tol
        && !nf.budget_exhausted;
    Ok(OutcomeRecord {
        outcomes: outcome_label(outcomes),
        count: None,
        probability,
        residual,
        correction: correction.label,
        factored: match spec {
            ProtocolSpec::GateTeleportSingle { u } => {
                let m_star = GateExpr::pauli(outcomes[0].i, outcomes[0].j).conj();
                Some(format!("({})·{u}", u.then_after(&m_star).then_after(&u.dagger()).simplified()))
            }
            _ => None,
        },
        scalar: nf.diagram.scalar.into(),
        normalize_deviation,
        agreement_deviation,
        min_fidelity,
        pass,
    })
}

/// Joint outcome probabilities for the first trial input, in
/// [`ProtocolSpec::all_outcomes`] order.
fn branch_probabilities(spec: &ProtocolSpec, seed: u64) -> Result<Vec<(Vec<Outcome>, f64)>, ProtocolError> {
    let input = input_state(spec, seed, 0);
    spec.all_outcomes()
        .into_iter()
        .map(|o| match spec.simulate(&input, &o) {
            Ok(sim) => Ok((o, sim.probability)),
            Err(ProtocolError::Sim(SimError::ImpossibleOutcome { .. })) => Ok((o, 0.0)),
            Err(e) => Err(e),
        })
        .collect()
}

/// Runs every selected outcome branch through the diagram, the rewrite
/// engine and the simulator, and checks the corrected output against the
/// protocol's target.
pub fn run(spec: &ProtocolSpec, policy: &OutcomePolicy, cfg: &RunConfig) -> Result<ProtocolReport, ProtocolError> {
    spec.check()?;
    let mut records = Vec::new();
    match policy {
        OutcomePolicy::All => {
            for o in spec.all_outcomes() {
                records.push(check_branch(spec, &o, cfg)?);
            }
        }
        OutcomePolicy::Fixed(list) => {
            for o in list {
                records.push(check_branch(spec, o, cfg)?);
            }
        }
        OutcomePolicy::Sampled { shots } => {
            let probs = branch_probabilities(spec, cfg.seed)?;
            let mut counts = vec![0u64; probs.len()];
            for shot in 0..*shots {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(shot);
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let k = probs
                    .iter()
                    .position(|(_, p)| {
                        acc += p;
                        u < acc
                    })
                    .unwrap_or_else(|| probs.iter().rposition(|(_, p)| *p > 0.0).unwrap_or(0));
                counts[k] += 1;
            }
            for ((o, _), n) in probs.iter().zip(counts) {
                if n > 0 {
                    let mut r = check_branch(spec, o, cfg)?;
                    r.count = Some(n);
                    records.push(r);
                }
            }
        }
    }
    Ok(ProtocolReport {
        protocol: spec.to_string(),
        seed: cfg.seed,
        trials: cfg.trials,
        tolerance: cfg.tol,
        pass: records.iter().all(|r| r.pass),
        records,
    })
}
