use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use telecalc::corpus::{corpus, dot_gates, random_diagram, random_unitary, CorpusConfig};
use telecalc::diagram::{canonical_form, evaluate, parse, serialize, DiagramBuilder};
use telecalc::gate::{GateExpr, TwoQubitGate};
use telecalc::linalg::{c, embed, Matrix};
use telecalc::pauli::{CliffordMap, Outcome, PauliString};
use telecalc::protocols::ProtocolSpec;
use telecalc::rewrite::{apply_rule, measure, normalize, canonical_pauli, RewriteRule, RuleName};
use telecalc::statevec::{bell_probabilities, sample_bell, QuantumState};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), rows * cols)
        .prop_map(move |v| Matrix::new(rows, cols, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
}

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    (proptest::collection::vec((any::<bool>(), any::<bool>()), n), 0u8..4).prop_map(|(bits, ph)| PauliString::from_bits(&bits, ph))
}

proptest! {
    #[test]
    fn tensor_mixed_product(a in matrix_strategy(2, 2), b in matrix_strategy(2, 2), x in matrix_strategy(2, 2), y in matrix_strategy(2, 2)) {
        let lhs = &a.tensor(&b) * &x.tensor(&y);
        let rhs = (&a * &x).tensor(&(&b * &y));
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn dagger_reverses_products(a in matrix_strategy(4, 4), b in matrix_strategy(4, 4)) {
        prop_assert!((&a * &b).dagger().max_abs_diff(&(&b.dagger() * &a.dagger())).unwrap() < 1e-12);
        prop_assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn embed_on_leading_qubits_is_tensor(g in matrix_strategy(4, 4)) {
        let e = embed(&g, &[0, 1], 3).unwrap();
        prop_assert!(e.max_abs_diff(&g.tensor(&Matrix::identity(2))).unwrap() < 1e-15);
    }

    #[test]
    fn pauli_product_is_faithful(p in pauli_strategy(3), q in pauli_strategy(3)) {
        let pq = p.multiply(&q).unwrap();
        prop_assert!(pq.to_matrix().max_abs_diff(&(&p.to_matrix() * &q.to_matrix())).unwrap() < 1e-15);
        prop_assert!(p.dagger().to_matrix().max_abs_diff(&p.to_matrix().dagger()).unwrap() < 1e-15);
    }

    #[test]
    fn clifford_conjugation_is_faithful(p in pauli_strategy(2), which in 0usize..4) {
        let (map, u) = match which {
            0 => (CliffordMap::cnot(2, 0, 1), TwoQubitGate::cnot().matrix()),
            1 => (CliffordMap::cnot(2, 1, 0), TwoQubitGate::Cnot { control: 1 }.matrix()),
            2 => (CliffordMap::cz(2, 0, 1), TwoQubitGate::Cz.matrix()),
            _ => (CliffordMap::hadamard(2, 1), embed(&telecalc::gate::NamedGate::H.matrix(), &[1], 2).unwrap()),
        };
        let image = map.conjugate(&p).unwrap();
        let direct = &(&u * &p.to_matrix()) * &u.dagger();
        prop_assert!(image.to_matrix().max_abs_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn born_probabilities_are_complete(seed in any::<u64>(), q1 in 0usize..3, shift in 1usize..3) {
        let s = QuantumState::random(3, &mut rng(seed));
        let p = bell_probabilities(&s, q1, (q1 + shift) % 3).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), t in 0usize..3) {
        let mut r = rng(seed);
        let s = QuantumState::random(3, &mut r);
        let u = random_unitary(&mut r);
        prop_assert!((s.apply_gate(&u, &[t]).unwrap().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn slide_back_restores_diagram(seed in any::<u64>(), side in 0usize..2, g in 0usize..7) {
        let mut b = DiagramBuilder::new("s");
        let (l, r) = b.cup();
        let legs = [l, r];
        let x = b.dot(&legs[side], dot_gates()[g].clone());
        let other = legs[1 - side].clone();
        let (l, r) = if side == 0 { (x, other) } else { (other, x) };
        let y = b.dot(&r, GateExpr::literal(&random_unitary(&mut rng(seed))).unwrap());
        b.output(&l);
        b.output(&y);
        let d = b.finish();
        let cup = d.nodes.iter().find(|n| n.is_cup()).unwrap().id.clone();
        let dot = d.nodes[1].id.clone();
        let once = apply_rule(&d, &RewriteRule::new(RuleName::R1SlideCup, &[&cup, &dot])).unwrap();
        prop_assert!(evaluate(&once).unwrap().max_abs_diff(&evaluate(&d).unwrap()).unwrap() < 1e-12);
        let twice = apply_rule(&once, &RewriteRule::new(RuleName::R1SlideCup, &[&cup, &dot])).unwrap();
        prop_assert_eq!(canonical_form(&twice), canonical_form(&d));
    }

    #[test]
    fn normalize_is_sound_on_random_diagrams(seed in any::<u64>()) {
        let d = random_diagram(&mut rng(seed), &CorpusConfig::default(), "p");
        let n = normalize(&d).unwrap();
        prop_assert!(!n.budget_exhausted);
        let dev = evaluate(&d).unwrap().max_abs_diff(&evaluate(&n.diagram).unwrap()).unwrap();
        prop_assert!(dev <= 1e-10, "deviation {dev:e}\n{}", serialize(&d));
    }
}

#[test]
fn slide_laws_hold_for_random_unitaries() {
    let mut r = rng(2024);
    for k in 0..100 {
        let u = random_unitary(&mut r);
        for rule in [RuleName::R1SlideCup, RuleName::R2SlideCap] {
            let mut b = DiagramBuilder::new("slide");
            let d = if rule == RuleName::R1SlideCup {
                let (l, r) = b.cup();
                let l = b.dot(&l, GateExpr::literal(&u).unwrap());
                b.output(&l);
                b.output(&r);
                b.finish()
            } else {
                let (x, y) = (b.input(), b.input());
                let y = b.dot(&y, GateExpr::literal(&u).unwrap());
                b.cap(&x, &y);
                b.finish()
            };
            let bend = d.nodes.iter().find(|n| n.is_cup() || n.is_cap()).unwrap().id.clone();
            let dot = d.nodes.iter().find(|n| n.dot().is_some()).unwrap().id.clone();
            let slid = apply_rule(&d, &RewriteRule::new(rule, &[&bend, &dot])).unwrap();
            let dev = evaluate(&d).unwrap().max_abs_diff(&evaluate(&slid).unwrap()).unwrap();
            assert!(dev <= 1e-10, "unitary {k}, {rule}: {dev:e}");
        }
    }
}

#[test]
fn cap_is_dual_to_cup() {
    let mut r = rng(8);
    for _ in 0..50 {
        let m = random_unitary(&mut r);
        let mut b = DiagramBuilder::new("cup");
        let (x, y) = b.cup();
        let y = b.dot(&y, GateExpr::literal(&m).unwrap());
        b.output(&x);
        b.output(&y);
        let cup = evaluate(&b.finish()).unwrap();
        let mut b = DiagramBuilder::new("cap");
        let (x, y) = (b.input(), b.input());
        let y = b.dot(&y, GateExpr::literal(&m.dagger()).unwrap());
        b.cap(&x, &y);
        let cap = evaluate(&b.finish()).unwrap();
        assert!(cap.max_abs_diff(&cup.dagger()).unwrap() <= 1e-10);
    }
}

#[test]
fn corpus_soundness_termination_and_replay() {
    let cfg = CorpusConfig::default();
    let mut fired = std::collections::BTreeMap::new();
    for d in corpus(0, 500, &cfg) {
        let n = normalize(&d).unwrap();
        for st in &n.trace.steps {
            *fired.entry(st.rule.name.as_str()).or_insert(0usize) += 1;
        }
        assert!(!n.budget_exhausted, "{}", d.name);
        assert!(n.trace.len() <= n.budget);
        let dev = evaluate(&d).unwrap().max_abs_diff(&evaluate(&n.diagram).unwrap()).unwrap();
        assert!(dev <= 1e-10, "{}: deviation {dev:e}", d.name);
        assert_eq!(n.trace.replay(&d).unwrap(), n.diagram, "{}", d.name);
        let mut cur = d.clone();
        for step in &n.trace.steps {
            let next = apply_rule(&cur, &step.rule).unwrap();
            assert!(measure(&next) < measure(&cur), "{}: {} did not decrease the measure", d.name, step.rule);
            cur = next;
        }
    }
    for rule in ["R1_slide_cup", "R2_slide_cap", "R3_yank", "R4_fuse", "R5_push_through_box"] {
        assert!(fired.get(rule).copied().unwrap_or(0) >= 5, "{rule} rarely fires: {fired:?}");
    }
}

#[test]
fn pauli_scalars_are_exact() {
    let cfg = CorpusConfig::default();
    let mut seen = 0;
    for d in corpus(77, 500, &cfg) {
        if !d.nodes.iter().filter_map(|n| n.dot()).all(|g| canonical_pauli(g).is_some()) {
            continue;
        }
        let n = normalize(&d).unwrap();
        let s = n.diagram.scalar;
        if s.is_zero() {
            continue;
        }
        seen += 1;
        let halvings = n
            .trace
            .steps
            .iter()
            .filter(|st| st.rule.name == RuleName::R3Yank && st.scalar_delta.sqrt2_exp() == -2)
            .count() as i32;
        assert_eq!(s.sqrt2_exp(), -2 * halvings, "{}", d.name);
        let z = s.coeff();
        assert!([c(1., 0.), c(-1., 0.), c(0., 1.), c(0., -1.)].iter().any(|w| (z - w).norm() < 1e-12), "{}: {z}", d.name);
        for st in &n.trace.steps {
            assert!(st.scalar_delta.is_zero() || st.scalar_delta.sqrt2_exp() <= 0, "{}", d.name);
        }
    }
    assert!(seen > 20, "only {seen} all-Pauli diagrams");
}

#[test]
fn protocol_diagrams_round_trip() {
    let mut specs = vec![ProtocolSpec::Teleport, ProtocolSpec::Ghz, ProtocolSpec::GhzHadamard, ProtocolSpec::ChiPrepare];
    specs.extend((1..=6).map(|hops| ProtocolSpec::ChainedTeleport { hops }));
    specs.extend(["I", "X", "Z", "H", "S", "T"].map(|g| ProtocolSpec::GateTeleportSingle { u: g.parse().unwrap() }));
    specs.extend(["cnot", "cnot(1)", "cz", "cu(T)"].map(|g| ProtocolSpec::GateTeleportCu { gate: g.parse().unwrap() }));
    for spec in specs {
        for o in spec.all_outcomes().into_iter().take(16) {
            let d = spec.build_diagram(&o).unwrap();
            let text = serialize(&d);
            let back = parse(&text).unwrap();
            assert_eq!(canonical_form(&back), canonical_form(&d), "{spec}");
            assert_eq!(serialize(&back), text, "{spec}");
        }
    }
}

#[test]
fn bell_sampling_frequencies_are_uniform_for_teleport() {
    let alpha = QuantumState::random(1, &mut rng(5));
    let s = alpha.tensor(&QuantumState::bell(Outcome::new(false, false)));
    let shots = 10_000;
    let draws = sample_bell(&s, 0, 1, 99, shots).unwrap();
    for o in Outcome::ALL {
        let f = draws.iter().filter(|&&d| d == o).count() as f64 / shots as f64;
        assert!((f - 0.25).abs() <= 0.02, "{o}: {f}");
    }
}
