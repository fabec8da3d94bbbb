//! Deterministic straightening strategy.
//!
//! Candidates are tried in rule priority order (R4, then R1/R2, then R3,
//! then R5), each group in topological node order. A candidate is applied
//! only if it strictly lowers [`Measure`], which bounds the run.

use serde::Serialize;

use super::{apply_traced, canonical_pauli, chain_up, needs_tidy, reaches, RewriteError, RewriteRule, RewriteTrace, RuleName};
use crate::diagram::{Diagram, EdgeIndex, NodeKind};

/// Lexicographic termination measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Measure {
    /// Cups plus caps.
    pub bends: usize,
    /// Dots sitting on a cup → dots → cap path.
    pub segment_dots: usize,
    /// Sum over dots of `3^b`, `b` the number of boxes reachable above the dot.
    pub dot_weight: u64,
    /// Identity dots and Pauli dots not yet written as `X^x Z^z`.
    pub untidy: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stuck {
    pub locus: Vec<String>,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub diagram: Diagram,
    pub trace: RewriteTrace,
    pub stuck: Vec<Stuck>,
    pub budget: usize,
    pub budget_exhausted: bool,
}

fn is_dot(d: &Diagram, k: usize) -> bool {
    matches!(d.nodes[k].kind, NodeKind::Gate1(_))
}

/// Whether the dot at `k` lies between a cup leg and a cap leg with only dots
/// in between.
fn on_segment(d: &Diagram, idx: &EdgeIndex, k: usize) -> bool {
    let mut down = k;
    let from_cup = loop {
        match idx.producer_node(&d.nodes[down].ins[0]) {
            Some((p, _)) if is_dot(d, p) => down = p,
            Some((p, _)) => break d.nodes[p].is_cup(),
            None => break false,
        }
    };
    if !from_cup {
        return false;
    }
    let mut up = k;
    loop {
        match idx.consumer_node(&d.nodes[up].outs[0]) {
            Some((c, _)) if is_dot(d, c) => up = c,
            Some((c, _)) => return d.nodes[c].is_cap(),
            None => return false,
        }
    }
}

fn boxes_above(d: &Diagram, idx: &EdgeIndex, k: usize) -> u32 {
    (0..d.nodes.len()).filter(|&b| b != k && d.nodes[b].gate2().is_some() && reaches(d, idx, k, b)).count() as u32
}

pub fn measure(d: &Diagram) -> Measure {
    let idx = d.edge_index();
    let mut m = Measure { bends: d.count(|n| n.is_cup() || n.is_cap()), segment_dots: 0, dot_weight: 0, untidy: 0 };
    for k in 0..d.nodes.len() {
        let Some(g) = d.nodes[k].dot() else { continue };
        if on_segment(d, &idx, k) {
            m.segment_dots += 1;
        }
        m.dot_weight = m.dot_weight.saturating_add(3u64.saturating_pow(boxes_above(d, &idx, k)));
        if needs_tidy(g) {
            m.untidy += 1;
        }
    }
    m
}

fn candidates(d: &Diagram) -> Vec<RewriteRule> {
    let order = d.topological_order().unwrap_or_else(|_| (0..d.nodes.len()).collect());
    let idx = d.edge_index();
    let id = |k: usize| d.nodes[k].id.clone();
    let rule = |name, locus: Vec<String>| RewriteRule { name, locus };
    let mut out = Vec::new();
    for &k in &order {
        let Some(g) = d.nodes[k].dot() else { continue };
        if needs_tidy(g) {
            out.push(rule(RuleName::R4Fuse, vec![id(k)]));
        }
        if let Some((c, _)) = idx.consumer_node(&d.nodes[k].outs[0]) {
            if is_dot(d, c) {
                out.push(rule(RuleName::R4Fuse, vec![id(k), id(c)]));
            }
        }
    }
    for &k in &order {
        if !is_dot(d, k) || !on_segment(d, &idx, k) {
            continue;
        }
        if let Some((p, _)) = idx.producer_node(&d.nodes[k].ins[0]) {
            if d.nodes[p].is_cup() {
                out.push(rule(RuleName::R1SlideCup, vec![id(p), id(k)]));
            }
        }
        if let Some((c, _)) = idx.consumer_node(&d.nodes[k].outs[0]) {
            if d.nodes[c].is_cap() {
                out.push(rule(RuleName::R2SlideCap, vec![id(c), id(k)]));
            }
        }
    }
    for &k in &order {
        if !d.nodes[k].is_cup() {
            continue;
        }
        let legs: Vec<_> = d.nodes[k].outs.iter().map(|e| chain_up(d, &idx, e)).collect();
        let caps: Vec<usize> = legs
            .iter()
            .filter_map(|(_, end)| end.map(|(c, _)| c))
            .filter(|&c| d.nodes[c].is_cap())
            .collect();
        if caps.len() == 2 && caps[0] == caps[1] {
            out.push(rule(RuleName::R3Yank, vec![id(k), id(caps[0])]));
            continue;
        }
        for (dots, end) in &legs {
            if let (true, Some((c, _))) = (dots.is_empty(), end) {
                if d.nodes[*c].is_cap() {
                    out.push(rule(RuleName::R3Yank, vec![id(k), id(*c)]));
                }
            }
        }
    }
    for &k in &order {
        let Some(g) = d.nodes[k].dot() else { continue };
        if !canonical_pauli(g).is_some_and(|p| p != (false, false)) {
            continue;
        }
        if let Some((c, _)) = idx.consumer_node(&d.nodes[k].outs[0]) {
            if d.nodes[c].gate2().is_some() {
                out.push(rule(RuleName::R5PushThroughBox, vec![id(k), id(c)]));
            }
        }
    }
    out
}

fn find_stuck(d: &Diagram) -> Vec<Stuck> {
    let idx = d.edge_index();
    let order = d.topological_order().unwrap_or_else(|_| (0..d.nodes.len()).collect());
    let mut out = Vec::new();
    for &k in &order {
        let n = &d.nodes[k];
        if let Some(g) = n.dot() {
            if let Some((c, _)) = idx.consumer_node(&n.outs[0]) {
                if d.nodes[c].gate2().is_some() {
                    let reason = if canonical_pauli(g).is_some() {
                        "box maps the Pauli dot outside the Pauli group"
                    } else {
                        "non-Pauli dot blocked by a two-qubit box"
                    };
                    out.push(Stuck { locus: vec![n.id.clone(), d.nodes[c].id.clone()], reason: reason.to_string() });
                }
            }
        }
        if n.is_cup() {
            for e in &n.outs {
                if let (_, Some((c, _))) = chain_up(d, &idx, e) {
                    if d.nodes[c].is_cap() {
                        let locus = vec![n.id.clone(), d.nodes[c].id.clone()];
                        if !out.iter().any(|s: &Stuck| s.locus == locus) {
                            out.push(Stuck { locus, reason: "cup–cap pair cannot be straightened".to_string() });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Rewrites `d` to the strategy's fixpoint. The step budget is
/// `10 · (node count)²`.
pub fn normalize(d: &Diagram) -> Result<Normalized, RewriteError> {
    d.validate().map_err(|v| RewriteError::Invalid(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")))?;
    let budget = 10 * d.nodes.len() * d.nodes.len();
    let mut cur = d.clone();
    let mut m = measure(&cur);
    let mut trace = RewriteTrace::default();
    let mut budget_exhausted = false;
    while let Some((next, step, m2)) = candidates(&cur).into_iter().find_map(|cand| {
        let (next, step) = apply_traced(&cur, &cand).ok()?;
        let m2 = measure(&next);
        (m2 < m).then_some((next, step, m2))
    }) {
        if trace.len() >= budget {
            budget_exhausted = true;
            break;
        }
        debug_assert!(next.validate().is_ok(), "{} broke the diagram", step.rule);
        cur = next;
        m = m2;
        trace.steps.push(step);
    }
    let stuck = find_stuck(&cur);
    Ok(Normalized { diagram: cur, trace, stuck, budget, budget_exhausted })
}
