//! Seeded random diagrams and unitaries for property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::diagram::{Diagram, DiagramBuilder};
use crate::gate::{GateExpr, NamedGate, TwoQubitGate};
use crate::linalg::{c, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusConfig {
    pub max_cups: usize,
    pub max_caps: usize,
    pub max_boxes: usize,
    pub max_open_legs: usize,
    pub max_ops: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self { max_cups: 5, max_caps: 5, max_boxes: 2, max_open_legs: 4, max_ops: 14 }
    }
}

/// Dot labels drawn by the generator: `I, X, Z, X.Z, H, S, T`.
pub fn dot_gates() -> Vec<GateExpr> {
    let mut v = vec![GateExpr::identity()];
    v.extend([NamedGate::X, NamedGate::Z].map(GateExpr::named));
    v.push(GateExpr::pauli(true, true));
    v.extend([NamedGate::H, NamedGate::S, NamedGate::T].map(GateExpr::named));
    v
}

/// Haar-random 2×2 unitary.
pub fn random_unitary(rng: &mut impl Rng) -> Matrix {
    let mut g = || c(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let (a, b) = (g(), g());
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n, b / n);
    let phase = c(0., rng.gen_range(0.0..std::f64::consts::TAU)).exp();
    Matrix::new(2, 2, vec![a, -b.conj(), b, a.conj()]).expect("2x2").scale(phase)
}

fn pop_random(rng: &mut impl Rng, live: &mut Vec<String>) -> String {
    let k = rng.gen_range(0..live.len());
    live.remove(k)
}

fn insert_random(rng: &mut impl Rng, live: &mut Vec<String>, e: String) {
    let k = rng.gen_range(0..=live.len());
    live.insert(k, e);
}

fn attempt(rng: &mut impl Rng, cfg: &CorpusConfig, name: &str) -> Option<Diagram> {
    let gates = dot_gates();
    let mut b = DiagramBuilder::new(name);
    let n_in = rng.gen_range(0..=2usize);
    let mut live: Vec<String> = (0..n_in).map(|_| b.input()).collect();
    let (mut cups, mut caps, mut boxes) = (0, 0, 0);
    for _ in 0..rng.gen_range(1..=cfg.max_ops) {
        match rng.gen_range(0..4) {
            0 if cups < cfg.max_cups => {
                let (l, r) = b.cup();
                insert_random(rng, &mut live, l);
                insert_random(rng, &mut live, r);
                cups += 1;
            }
            1 if caps < cfg.max_caps && live.len() >= 2 => {
                let x = pop_random(rng, &mut live);
                let y = pop_random(rng, &mut live);
                b.cap(&x, &y);
                caps += 1;
            }
            2 if !live.is_empty() => {
                let k = rng.gen_range(0..live.len());
                live[k] = b.dot(&live[k], gates.choose(rng).expect("nonempty").clone());
            }
            3 if boxes < cfg.max_boxes && live.len() >= 2 => {
                let i = rng.gen_range(0..live.len());
                let j = (i + rng.gen_range(1..live.len())) % live.len();
                let g = match rng.gen_range(0..3) {
                    0 => TwoQubitGate::cnot(),
                    1 => TwoQubitGate::Cnot { control: 1 },
                    _ => TwoQubitGate::Cz,
                };
                let (a, o) = b.gate2(&live[i], &live[j], g);
                live[i] = a;
                live[j] = o;
                boxes += 1;
            }
            _ => {}
        }
    }
    while n_in + live.len() > cfg.max_open_legs && caps < cfg.max_caps {
        let x = pop_random(rng, &mut live);
        let y = pop_random(rng, &mut live);
        b.cap(&x, &y);
        caps += 1;
    }
    if n_in + live.len() > cfg.max_open_legs {
        return None;
    }
    for e in &live {
        b.output(e);
    }
    Some(b.finish())
}

/// A valid random diagram within the limits of `cfg`.
pub fn random_diagram(rng: &mut impl Rng, cfg: &CorpusConfig, name: &str) -> Diagram {
    loop {
        if let Some(d) = attempt(rng, cfg, name) {
            return d;
        }
    }
}

/// `count` diagrams; diagram `k` depends only on `seed` and `k`.
pub fn corpus(seed: u64, count: usize, cfg: &CorpusConfig) -> Vec<Diagram> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            random_diagram(&mut rng, cfg, &format!("r{k}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_unitary;

    #[test]
    fn corpus_respects_limits() {
        let cfg = CorpusConfig::default();
        for d in corpus(3, 200, &cfg) {
            d.validate().unwrap();
            assert!(d.open_legs() <= 4);
            assert!(d.count(|n| n.is_cup()) <= 5 && d.count(|n| n.is_cap()) <= 5);
            assert!(d.count(|n| n.gate2().is_some()) <= 2);
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let cfg = CorpusConfig::default();
        assert_eq!(corpus(11, 20, &cfg), corpus(11, 20, &cfg));
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(is_unitary(&random_unitary(&mut rng), 1e-12).unwrap());
        }
    }
}
