//! Semantics-preserving rewrites on cup/cap diagrams.
//!
//! Every rule returns a new diagram together with the scalar it multiplied
//! in. Node identifiers are reused wherever a node survives a rewrite, so a
//! recorded trace can be replayed on the original diagram.

mod normalize;
mod verify;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::diagram::{Diagram, EdgeIndex, Node, NodeKind};
use crate::gate::GateExpr;
use crate::linalg::{embed, fmt_complex, Matrix, Scalar};
use crate::pauli::{CliffordMap, PauliString};

pub use normalize::{measure, normalize, Measure, Normalized, Stuck};
pub use verify::{residual_dots, verify, verify_equation, ResidualDot, ScalarReport, VerifyReport};

/// Entries below this are treated as exact zeros when recognising Paulis.
const PAULI_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleName {
    R1SlideCup,
    R2SlideCap,
    R3Yank,
    R4Fuse,
    R5PushThroughBox,
    R6Commute,
}

impl RuleName {
    pub const ALL: [RuleName; 6] = [
        RuleName::R1SlideCup,
        RuleName::R2SlideCap,
        RuleName::R3Yank,
        RuleName::R4Fuse,
        RuleName::R5PushThroughBox,
        RuleName::R6Commute,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleName::R1SlideCup => "R1_slide_cup",
            RuleName::R2SlideCap => "R2_slide_cap",
            RuleName::R3Yank => "R3_yank",
            RuleName::R4Fuse => "R4_fuse",
            RuleName::R5PushThroughBox => "R5_push_through_box",
            RuleName::R6Commute => "R6_commute",
        }
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleName {
    type Err = RewriteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleName::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| RewriteError::UnknownRule(s.to_string()))
    }
}

/// A rule together with the node identifiers it is applied to.
///
/// Loci: R1 `[cup, dot]`, R2 `[cap, dot]`, R3 `[cup, cap]`, R4 `[dot]` or
/// `[lower dot, upper dot]`, R5 `[dot, box]`, R6 `[lower box, upper box]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub name: RuleName,
    pub locus: Vec<String>,
}

impl RewriteRule {
    pub fn new(name: RuleName, locus: &[&str]) -> Self {
        Self { name, locus: locus.iter().map(|s| s.to_string()).collect() }
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name, self.locus.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub rule: RewriteRule,
    pub scalar_delta: Scalar,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RewriteTrace {
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn count(&self, name: RuleName) -> usize {
        self.steps.iter().filter(|s| s.rule.name == name).count()
    }

    /// `<step#> <rule> <locus> scalar*=<coeff>,<sqrt2_exp>`, steps numbered from 1.
    pub fn lines(&self) -> Vec<String> {
        self.steps
            .iter()
            .enumerate()
            .map(|(k, s)| {
                format!(
                    "{} {} scalar*={},{}",
                    k + 1,
                    s.rule,
                    fmt_complex(s.scalar_delta.coeff()),
                    s.scalar_delta.sqrt2_exp()
                )
            })
            .collect()
    }

    /// Re-applies every step to `d`.
    pub fn replay(&self, d: &Diagram) -> Result<Diagram, RewriteError> {
        self.steps.iter().try_fold(d.clone(), |acc, s| apply_rule(&acc, &s.rule))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewriteError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("no node `{0}`")]
    UnknownNode(String),
    #[error("{rule} does not match at {locus}: {reason}")]
    Mismatch { rule: RuleName, locus: String, reason: String },
    #[error("{rule} at {locus} would create a cycle")]
    Cycle { rule: RuleName, locus: String },
    #[error("diagram is invalid: {0}")]
    Invalid(String),
}

/// Applies `r` to `d`; the returned diagram has the rule's scalar factor
/// already multiplied in.
pub fn apply_rule(d: &Diagram, r: &RewriteRule) -> Result<Diagram, RewriteError> {
    apply_traced(d, r).map(|(out, _)| out)
}

/// Like [`apply_rule`], also returning the trace record.
pub fn apply_traced(d: &Diagram, r: &RewriteRule) -> Result<(Diagram, TraceStep), RewriteError> {
    let mut work = Work { d: d.clone(), rule: r.name, locus: r.locus.join(",") };
    let delta = match (r.name, r.locus.as_slice()) {
        (RuleName::R1SlideCup, [cup, dot]) => work.slide_cup(cup, dot)?,
        (RuleName::R2SlideCap, [cap, dot]) => work.slide_cap(cap, dot)?,
        (RuleName::R3Yank, [cup, cap]) => work.yank(cup, cap)?,
        (RuleName::R4Fuse, [dot]) => work.tidy_dot(dot)?,
        (RuleName::R4Fuse, [lower, upper]) => work.fuse(lower, upper)?,
        (RuleName::R5PushThroughBox, [dot, bx]) => work.push_through_box(dot, bx)?,
        (RuleName::R6Commute, [lower, upper]) => work.commute(lower, upper)?,
        _ => return Err(work.mismatch("wrong number of locus identifiers")),
    };
    let mut out = work.d;
    out.scalar = out.scalar * delta;
    Ok((out, TraceStep { rule: r.clone(), scalar_delta: delta }))
}

/// `(x, z)` when `g` is written exactly as `X^x Z^z`.
pub fn canonical_pauli(g: &GateExpr) -> Option<(bool, bool)> {
    [(false, false), (true, false), (false, true), (true, true)]
        .into_iter()
        .find(|&(x, z)| *g == GateExpr::pauli(x, z))
}

/// If `g` is proportional to a Pauli, the canonical expression and the phase
/// `λ` with `g = λ · X^x Z^z`.
pub fn pauli_form(g: &GateExpr) -> Option<(GateExpr, C64)> {
    let (p, leftover) = PauliString::from_matrix(&g.matrix(), PAULI_TOL)?;
    Some((GateExpr::pauli(p.x_bit(0), p.z_bit(0)), p.phase_value() * leftover))
}

/// Dots whose expression can be tidied: identities and non-canonical Paulis.
pub fn needs_tidy(g: &GateExpr) -> bool {
    if g.is_identity_expr() {
        return true;
    }
    canonical_pauli(g).is_none() && pauli_form(g).is_some()
}

/// Scalar from a complex number, flushing round-off zeros.
fn exact_scalar(z: C64) -> Scalar {
    if z.norm() < 1e-14 {
        Scalar::ZERO
    } else {
        Scalar::from_complex(z)
    }
}

struct Work {
    d: Diagram,
    rule: RuleName,
    locus: String,
}

impl Work {
    fn mismatch(&self, reason: &str) -> RewriteError {
        RewriteError::Mismatch { rule: self.rule, locus: self.locus.clone(), reason: reason.to_string() }
    }

    fn cycle(&self) -> RewriteError {
        RewriteError::Cycle { rule: self.rule, locus: self.locus.clone() }
    }

    fn index(&self, id: &str) -> Result<usize, RewriteError> {
        self.d.node_index(id).ok_or_else(|| RewriteError::UnknownNode(id.to_string()))
    }

    fn dot_at(&self, id: &str) -> Result<(usize, GateExpr), RewriteError> {
        let k = self.index(id)?;
        match &self.d.nodes[k].kind {
            NodeKind::Gate1(g) => Ok((k, g.clone())),
            _ => Err(self.mismatch(&format!("`{id}` is not a dot"))),
        }
    }

    fn expect(&self, id: &str, pred: fn(&Node) -> bool, what: &str) -> Result<usize, RewriteError> {
        let k = self.index(id)?;
        if pred(&self.d.nodes[k]) {
            Ok(k)
        } else {
            Err(self.mismatch(&format!("`{id}` is not a {what}")))
        }
    }

    /// Points whatever consumes `old` at `new` instead.
    fn redirect_consumer(&mut self, old: &str, new: &str) {
        for n in &mut self.d.nodes {
            for e in n.ins.iter_mut().filter(|e| *e == old) {
                *e = new.to_string();
            }
        }
        for e in self.d.outputs.iter_mut().filter(|e| *e == old) {
            *e = new.to_string();
        }
    }

    fn remove_nodes(&mut self, ids: &[String]) {
        self.d.nodes.retain(|n| !ids.contains(&n.id));
    }

    fn slide_cup(&mut self, cup: &str, dot: &str) -> Result<Scalar, RewriteError> {
        let ci = self.expect(cup, Node::is_cup, "cup")?;
        let (di, g) = self.dot_at(dot)?;
        let x = self.d.nodes[di].ins[0].clone();
        let y = self.d.nodes[di].outs[0].clone();
        let s = self.d.nodes[ci].outs.iter().position(|e| *e == x).ok_or_else(|| self.mismatch("dot is not on a leg of the cup"))?;
        let other = self.d.nodes[ci].outs[1 - s].clone();
        self.d.nodes[ci].outs[s] = y;
        self.d.nodes[ci].outs[1 - s] = x.clone();
        let n = &mut self.d.nodes[di];
        n.ins = vec![x];
        n.outs = vec![other];
        n.kind = NodeKind::Gate1(g.transpose());
        Ok(Scalar::ONE)
    }

    fn slide_cap(&mut self, cap: &str, dot: &str) -> Result<Scalar, RewriteError> {
        let ci = self.expect(cap, Node::is_cap, "cap")?;
        let (di, g) = self.dot_at(dot)?;
        let x = self.d.nodes[di].ins[0].clone();
        let y = self.d.nodes[di].outs[0].clone();
        let s = self.d.nodes[ci].ins.iter().position(|e| *e == y).ok_or_else(|| self.mismatch("dot does not feed the cap"))?;
        let other = self.d.nodes[ci].ins[1 - s].clone();
        self.d.nodes[ci].ins[s] = x;
        self.d.nodes[ci].ins[1 - s] = y;
        let n = &mut self.d.nodes[di];
        n.ins = vec![other];
        n.kind = NodeKind::Gate1(g.transpose());
        Ok(Scalar::ONE)
    }

    fn yank(&mut self, cup: &str, cap: &str) -> Result<Scalar, RewriteError> {
        let ci = self.expect(cup, Node::is_cup, "cup")?;
        let ai = self.expect(cap, Node::is_cap, "cap")?;
        let idx = self.d.edge_index();
        let legs: Vec<_> = self.d.nodes[ci].outs.iter().map(|e| chain_up(&self.d, &idx, e)).collect();
        if legs.iter().all(|(_, end)| matches!(end, Some((k, _)) if *k == ai)) {
            // closed loop: ⟨cap|(G0 ⊗ G1)|cup⟩ = tr(G0ᵀ G1) / 2
            let product = |dots: &[usize]| {
                dots.iter().fold(Matrix::identity(2), |acc, &k| &self.d.nodes[k].dot().unwrap().matrix() * &acc)
            };
            let g0 = product(&legs[0].0);
            let g1 = product(&legs[1].0);
            let value = (&g0.transpose() * &g1).trace() / 2.0;
            let mut gone: Vec<String> = legs.iter().flat_map(|(dots, _)| dots.iter().map(|&k| self.d.nodes[k].id.clone())).collect();
            gone.push(cup.to_string());
            gone.push(cap.to_string());
            self.remove_nodes(&gone);
            return Ok(exact_scalar(value));
        }
        let cup_outs = self.d.nodes[ci].outs.clone();
        let cap_ins = self.d.nodes[ai].ins.clone();
        let Some((s, t)) = (0..2).flat_map(|s| (0..2).map(move |t| (s, t))).find(|&(s, t)| cup_outs[s] == cap_ins[t]) else {
            return Err(self.mismatch("cup and cap share no edge"));
        };
        let u = cup_outs[1 - s].clone();
        let v = cap_ins[1 - t].clone();
        if let (Some((consumer, _)), Some((producer, _))) = (idx.consumer_node(&u), idx.producer_node(&v)) {
            if reaches(&self.d, &idx, consumer, producer) {
                return Err(self.cycle());
            }
        }
        self.remove_nodes(&[cup.to_string(), cap.to_string()]);
        self.redirect_consumer(&u, &v);
        Ok(Scalar::half())
    }

    fn fuse(&mut self, lower: &str, upper: &str) -> Result<Scalar, RewriteError> {
        let (li, g1) = self.dot_at(lower)?;
        let (ui, g2) = self.dot_at(upper)?;
        if self.d.nodes[li].outs[0] != self.d.nodes[ui].ins[0] {
            return Err(self.mismatch("dots are not adjacent"));
        }
        let fused = g2.then_after(&g1).simplified();
        let top = self.d.nodes[ui].outs[0].clone();
        let bottom = self.d.nodes[li].ins[0].clone();
        self.remove_nodes(&[upper.to_string()]);
        let li = self.index(lower)?;
        if fused.is_identity_expr() {
            self.remove_nodes(&[lower.to_string()]);
            self.redirect_consumer(&top, &bottom);
        } else {
            self.d.nodes[li].outs = vec![top];
            self.d.nodes[li].kind = NodeKind::Gate1(fused);
        }
        Ok(Scalar::ONE)
    }

    /// Removes an identity dot, or rewrites a dot proportional to a Pauli as
    /// `X^x Z^z` with the phase moved into the scalar.
    fn tidy_dot(&mut self, dot: &str) -> Result<Scalar, RewriteError> {
        let (di, g) = self.dot_at(dot)?;
        if !needs_tidy(&g) {
            return Err(self.mismatch("dot is already tidy"));
        }
        let (canon, phase) = if g.is_identity_expr() { (GateExpr::identity(), C64::new(1.0, 0.0)) } else { pauli_form(&g).unwrap() };
        if canon.is_identity_expr() {
            let bottom = self.d.nodes[di].ins[0].clone();
            let top = self.d.nodes[di].outs[0].clone();
            self.remove_nodes(&[dot.to_string()]);
            self.redirect_consumer(&top, &bottom);
        } else {
            self.d.nodes[di].kind = NodeKind::Gate1(canon);
        }
        Ok(exact_scalar(phase))
    }

    fn push_through_box(&mut self, dot: &str, bx: &str) -> Result<Scalar, RewriteError> {
        let (di, g) = self.dot_at(dot)?;
        let bi = self.expect(bx, |n| n.gate2().is_some(), "two-qubit box")?;
        let Some((x, z)) = canonical_pauli(&g).filter(|&p| p != (false, false)) else {
            return Err(self.mismatch("dot is not a canonical Pauli"));
        };
        let edge = self.d.nodes[di].outs[0].clone();
        let s = self.d.nodes[bi].ins.iter().position(|e| *e == edge).ok_or_else(|| self.mismatch("dot does not feed the box"))?;
        let gate = self.d.nodes[bi].gate2().unwrap().clone();
        let p = PauliString::single(2, s, x, z);
        let (image, phase) = match CliffordMap::from_box(&gate, 2, 0, 1) {
            Some(map) => {
                let img = map.conjugate(&p).expect("width 2");
                (img.unsigned(), img.phase_value())
            }
            None => {
                let gm = gate.matrix();
                let conj = &(&gm * &p.to_matrix()) * &gm.dagger();
                let (img, leftover) =
                    PauliString::from_matrix(&conj, PAULI_TOL).ok_or_else(|| self.mismatch("box maps the Pauli outside the Pauli group"))?;
                (img.unsigned(), img.phase_value() * leftover)
            }
        };
        let below = self.d.nodes[di].ins[0].clone();
        self.d.nodes[bi].ins[s] = below;
        self.remove_nodes(&[dot.to_string()]);
        for t in 0..2 {
            let (xt, zt) = (image.x_bit(t), image.z_bit(t));
            if !xt && !zt {
                continue;
            }
            let id = self.d.fresh_id("p");
            let mid = self.d.fresh_id("w");
            let bi = self.index(bx)?;
            let above = std::mem::replace(&mut self.d.nodes[bi].outs[t], mid.clone());
            self.d.nodes.push(Node { id, kind: NodeKind::Gate1(GateExpr::pauli(xt, zt)), ins: vec![mid], outs: vec![above] });
        }
        Ok(exact_scalar(phase))
    }

    fn commute(&mut self, lower: &str, upper: &str) -> Result<Scalar, RewriteError> {
        let li = self.expect(lower, |n| n.gate2().is_some(), "two-qubit box")?;
        let ui = self.expect(upper, |n| n.gate2().is_some(), "two-qubit box")?;
        let (lo, up) = (self.d.nodes[li].clone(), self.d.nodes[ui].clone());
        // wire k: (lower slot, upper slot)
        let mut wires: Vec<(Option<usize>, Option<usize>)> = Vec::new();
        for s in 0..2 {
            wires.push((Some(s), up.ins.iter().position(|e| *e == lo.outs[s])));
        }
        if wires.iter().all(|w| w.1.is_none()) {
            return Err(self.mismatch("boxes are not adjacent"));
        }
        for t in 0..2 {
            if !wires.iter().any(|w| w.1 == Some(t)) {
                wires.push((None, Some(t)));
            }
        }
        let pos = |slot: usize, upper_side: bool| {
            wires.iter().position(|w| if upper_side { w.1 == Some(slot) } else { w.0 == Some(slot) }).unwrap()
        };
        let n = wires.len();
        let a = embed(&lo.gate2().unwrap().matrix(), &[pos(0, false), pos(1, false)], n).expect("distinct wires");
        let b = embed(&up.gate2().unwrap().matrix(), &[pos(0, true), pos(1, true)], n).expect("distinct wires");
        if !(&a * &b).approx_eq(&(&b * &a), PAULI_TOL) {
            return Err(self.mismatch("boxes do not commute"));
        }
        let (mut new_lo, mut new_up) = (lo.clone(), up.clone());
        for w in &wires {
            if let (Some(s), Some(t)) = *w {
                new_up.ins[t] = lo.ins[s].clone();
                new_up.outs[t] = lo.outs[s].clone();
                new_lo.ins[s] = lo.outs[s].clone();
                new_lo.outs[s] = up.outs[t].clone();
            }
        }
        self.d.nodes[li] = new_lo;
        self.d.nodes[ui] = new_up;
        if self.d.topological_order().is_err() {
            return Err(self.cycle());
        }
        Ok(Scalar::ONE)
    }
}

/// Follows `e` upward through dots; returns the dots passed and the consumer
/// of the last edge.
pub(crate) fn chain_up(d: &Diagram, idx: &EdgeIndex, e: &str) -> (Vec<usize>, Option<(usize, usize)>) {
    let mut dots = Vec::new();
    let mut cur = e.to_string();
    loop {
        match idx.consumer_node(&cur) {
            Some((k, _)) if d.nodes[k].dot().is_some() => {
                dots.push(k);
                cur = d.nodes[k].outs[0].clone();
            }
            other => return (dots, other),
        }
    }
}

/// Whether node `to` is reachable from node `from` along edges (including `from == to`).
pub(crate) fn reaches(d: &Diagram, idx: &EdgeIndex, from: usize, to: usize) -> bool {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([from]);
    while let Some(k) = queue.pop_front() {
        if k == to {
            return true;
        }
        if !seen.insert(k) {
            continue;
        }
        for e in &d.nodes[k].outs {
            if let Some((next, _)) = idx.consumer_node(e) {
                queue.push_back(next);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests;
