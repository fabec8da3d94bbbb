use super::*;
use crate::diagram::{evaluate, DiagramBuilder};
use crate::gate::TwoQubitGate;

fn g(s: &str) -> GateExpr {
    s.parse().unwrap()
}

fn same_map(a: &Diagram, b: &Diagram, tol: f64) -> bool {
    evaluate(a).unwrap().approx_eq(&evaluate(b).unwrap(), tol)
}

fn cup_with_dot(expr: &str) -> Diagram {
    let mut b = DiagramBuilder::new("slide");
    let (l, r) = b.cup();
    let r = b.dot(&r, g(expr));
    b.output(&l);
    b.output(&r);
    b.finish()
}

/// input → cap(input, l) ; cup(l, r) with `m` on l ; output r
fn teleport(m: &str) -> Diagram {
    let mut b = DiagramBuilder::new("teleport");
    let a = b.input();
    let (l, r) = b.cup();
    let l = b.dot(&l, g(m));
    b.cap(&a, &l);
    b.output(&r);
    b.finish()
}

#[test]
fn r1_moves_symmetric_dot_to_other_leg() {
    let d = cup_with_dot("X");
    let out = apply_rule(&d, &RewriteRule::new(RuleName::R1SlideCup, &["n0", "n1"])).unwrap();
    let dot = out.node("n1").unwrap();
    assert_eq!(dot.dot().unwrap().to_string(), "X");
    assert_eq!(out.node("n0").unwrap().outs[0], dot.ins[0]);
    assert_eq!(dot.outs[0], "e0");
    assert!(same_map(&d, &out, 0.0));
}

#[test]
fn slides_are_involutions() {
    let d = cup_with_dot("S.H.T");
    let r = RewriteRule::new(RuleName::R1SlideCup, &["n0", "n1"]);
    let once = apply_rule(&d, &r).unwrap();
    assert_eq!(once.node("n1").unwrap().dot().unwrap().to_string(), "T.H.S");
    assert!(same_map(&d, &once, 1e-12));
    assert_eq!(apply_rule(&once, &r).unwrap(), d);

    let t = teleport("mat2(0.6, 0.8i, 0.8i, 0.6)");
    let r = RewriteRule::new(RuleName::R2SlideCap, &["n2", "n1"]);
    let once = apply_rule(&t, &r).unwrap();
    assert!(same_map(&t, &once, 1e-12));
    assert_eq!(apply_rule(&once, &r).unwrap(), t);
}

#[test]
fn slide_rejects_wrong_locus() {
    let d = cup_with_dot("X");
    let err = apply_rule(&d, &RewriteRule::new(RuleName::R2SlideCap, &["n0", "n1"])).unwrap_err();
    assert!(matches!(err, RewriteError::Mismatch { .. }));
    let err = apply_rule(&d, &RewriteRule::new(RuleName::R1SlideCup, &["n0", "zz"])).unwrap_err();
    assert_eq!(err, RewriteError::UnknownNode("zz".into()));
}

#[test]
fn two_yanks_straighten_the_chain_with_a_quarter() {
    let mut b = DiagramBuilder::new("chain");
    let a = b.input();
    let (l1, r1) = b.cup();
    b.cap(&a, &l1);
    let (l2, r2) = b.cup();
    b.cap(&r1, &l2);
    b.output(&r2);
    let d = b.finish();
    let once = apply_rule(&d, &RewriteRule::new(RuleName::R3Yank, &["n0", "n1"])).unwrap();
    let twice = apply_rule(&once, &RewriteRule::new(RuleName::R3Yank, &["n2", "n3"])).unwrap();
    assert!(twice.nodes.is_empty());
    assert_eq!(twice.inputs, twice.outputs);
    assert_eq!(twice.scalar, Scalar::new(C64::new(1.0, 0.0), -4));
    assert!(same_map(&d, &twice, 1e-15));
}

#[test]
fn loops_close_to_half_trace() {
    for (left, right, expected) in [("I", "I", 1.0), ("X", "I", 0.0), ("Z", "Z", 1.0), ("X.Z", "X.Z", 1.0), ("X.Z", "Z.X", -1.0)] {
        let mut b = DiagramBuilder::new("loop");
        let (l, r) = b.cup();
        let l = b.dot(&l, g(left));
        let r = b.dot(&r, g(right));
        b.cap(&l, &r);
        let d = b.finish();
        let out = apply_rule(&d, &RewriteRule::new(RuleName::R3Yank, &["n0", "n3"])).unwrap();
        assert!(out.nodes.is_empty());
        assert_eq!(out.scalar.value(), C64::new(expected, 0.0), "{left} {right}");
        assert!((evaluate(&d).unwrap().get(0, 0) - expected).norm() < 1e-15);
    }
}

#[test]
fn yank_refuses_to_close_a_cycle() {
    // cup leg r runs through a CNOT whose other output feeds the cap
    let mut b = DiagramBuilder::new("partial-trace");
    let a = b.input();
    let (l, r) = b.cup();
    let (r2, a2) = b.gate2(&r, &a, TwoQubitGate::cnot());
    b.cap(&a2, &l);
    b.output(&r2);
    let d = b.finish();
    let err = apply_rule(&d, &RewriteRule::new(RuleName::R3Yank, &["n0", "n2"])).unwrap_err();
    assert!(matches!(err, RewriteError::Cycle { .. }));
    let n = normalize(&d).unwrap();
    assert_eq!(n.stuck.len(), 1);
    assert!(same_map(&d, &n.diagram, 1e-12));
}

#[test]
fn fuse_then_tidy_moves_phase_to_scalar() {
    let mut b = DiagramBuilder::new("fuse");
    let a = b.input();
    let a = b.dot(&a, g("X"));
    let a = b.dot(&a, g("Z"));
    b.output(&a);
    let d = b.finish();
    let fused = apply_rule(&d, &RewriteRule::new(RuleName::R4Fuse, &["n0", "n1"])).unwrap();
    assert_eq!(fused.node("n0").unwrap().dot().unwrap().to_string(), "Z.X");
    let tidy = apply_rule(&fused, &RewriteRule::new(RuleName::R4Fuse, &["n0"])).unwrap();
    assert_eq!(tidy.node("n0").unwrap().dot().unwrap().to_string(), "X.Z");
    assert_eq!(tidy.scalar.value(), C64::new(-1.0, 0.0));
    assert!(same_map(&d, &tidy, 0.0));
}

#[test]
fn fusing_inverse_dots_removes_them() {
    let mut b = DiagramBuilder::new("cancel");
    let a = b.input();
    let a = b.dot(&a, g("T"));
    let a = b.dot(&a, g("T'"));
    b.output(&a);
    let d = b.finish();
    let out = apply_rule(&d, &RewriteRule::new(RuleName::R4Fuse, &["n0", "n1"])).unwrap();
    assert!(out.nodes.is_empty());
    assert_eq!(out.inputs, out.outputs);
}

#[test]
fn pauli_through_cnot_control() {
    for (i, j) in [(false, false), (true, false), (false, true), (true, true)] {
        if !i && !j {
            continue;
        }
        let mut b = DiagramBuilder::new("push");
        let c = b.input();
        let t = b.input();
        let c = b.dot(&c, GateExpr::pauli(i, j));
        let (c, t) = b.gate2(&c, &t, TwoQubitGate::cnot());
        b.output(&c);
        b.output(&t);
        let d = b.finish();
        let out = apply_rule(&d, &RewriteRule::new(RuleName::R5PushThroughBox, &["n0", "n1"])).unwrap();
        assert!(same_map(&d, &out, 1e-15));
        assert_eq!(out.scalar, Scalar::ONE);
        let dots = residual_dots(&out);
        let on = |k: usize| dots.iter().find(|r| r.output == Some(k)).map(|r| r.gate.clone());
        assert_eq!(on(0), Some(GateExpr::pauli(i, j).to_string()));
        assert_eq!(on(1), i.then(|| "X".to_string()));
    }
}

#[test]
fn non_pauli_dot_is_stuck_before_a_box() {
    let mut b = DiagramBuilder::new("stuck");
    let c = b.input();
    let t = b.input();
    let c = b.dot(&c, g("T"));
    let (c, t) = b.gate2(&c, &t, TwoQubitGate::Cz);
    b.output(&c);
    b.output(&t);
    let d = b.finish();
    assert!(apply_rule(&d, &RewriteRule::new(RuleName::R5PushThroughBox, &["n0", "n1"])).is_err());
    let n = normalize(&d).unwrap();
    assert_eq!(n.diagram, d);
    assert_eq!(n.stuck, vec![Stuck { locus: vec!["n0".into(), "n1".into()], reason: "non-Pauli dot blocked by a two-qubit box".into() }]);
}

#[test]
fn commuting_boxes_swap_and_swap_back() {
    // CNOT(0→1) then CNOT(0→2): shared control
    let mut b = DiagramBuilder::new("commute");
    let a = b.input();
    let x = b.input();
    let y = b.input();
    let (a, x) = b.gate2(&a, &x, TwoQubitGate::cnot());
    let (a, y) = b.gate2(&a, &y, TwoQubitGate::cnot());
    for e in [&a, &x, &y] {
        b.output(e);
    }
    let d = b.finish();
    let once = apply_rule(&d, &RewriteRule::new(RuleName::R6Commute, &["n0", "n1"])).unwrap();
    assert!(same_map(&d, &once, 0.0));
    assert_ne!(once, d);
    assert_eq!(apply_rule(&once, &RewriteRule::new(RuleName::R6Commute, &["n1", "n0"])).unwrap(), d);

    let mut b = DiagramBuilder::new("clash");
    let a = b.input();
    let x = b.input();
    let (a, x) = b.gate2(&a, &x, TwoQubitGate::cnot());
    let (a, x) = b.gate2(&a, &x, TwoQubitGate::Cnot { control: 1 });
    b.output(&a);
    b.output(&x);
    let err = apply_rule(&b.finish(), &RewriteRule::new(RuleName::R6Commute, &["n0", "n1"])).unwrap_err();
    assert!(matches!(err, RewriteError::Mismatch { .. }));
}

#[test]
fn teleport_normal_form() {
    for (i, j) in [(false, false), (true, false), (false, true), (true, true)] {
        let m = GateExpr::pauli(i, j);
        let d = teleport(&m.dagger().to_string());
        let n = normalize(&d).unwrap();
        assert_eq!(n.diagram.scalar, Scalar::half());
        let dots = residual_dots(&n.diagram);
        if i || j {
            assert_eq!(dots.len(), 1);
            assert_eq!(dots[0].gate, m.conj().to_string());
            assert_eq!(dots[0].output, Some(0));
        } else {
            assert!(dots.is_empty());
        }
        assert!(n.stuck.is_empty());
        assert!(same_map(&d, &n.diagram, 1e-15));
        assert_eq!(n.trace.replay(&d).unwrap(), n.diagram);
    }
}

#[test]
fn trace_lines_have_the_documented_shape() {
    let n = normalize(&teleport("X")).unwrap();
    let lines = n.trace.lines();
    assert_eq!(lines[0], "1 R1_slide_cup n0,n1 scalar*=1+0j,0");
    assert_eq!(lines.last().unwrap(), &format!("{} R3_yank n0,n2 scalar*=1+0j,-2", lines.len()));
}

#[test]
fn corrupted_slide_equation_fails_verification() {
    let lhs = cup_with_dot("X");
    let mut b = DiagramBuilder::new("rhs");
    let (l, r) = b.cup();
    let l = b.dot(&l, g("Z"));
    b.output(&l);
    b.output(&r);
    let bad = b.finish();
    let report = verify_equation(&lhs, &bad, 1e-10).unwrap();
    assert!(!report.passed());
    assert!(report.claim_deviation.unwrap() > 0.5);
    assert!(report.deviation < 1e-15);

    let mut b = DiagramBuilder::new("rhs");
    let (l, r) = b.cup();
    let l = b.dot(&l, g("X"));
    b.output(&l);
    b.output(&r);
    assert!(verify_equation(&lhs, &b.finish(), 1e-10).unwrap().passed());
}
