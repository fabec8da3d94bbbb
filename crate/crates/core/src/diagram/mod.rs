//! Cup/cap diagrams: tensor networks of Bell-state cups, Bell-effect caps,
//! single-qubit dots, two-qubit boxes and `|0⟩` preparations.
//!
//! Wires are edges named by string identifiers. Every edge has exactly one
//! producer (a node output slot or a diagram input) and exactly one consumer
//! (a node input slot or a diagram output). Time runs from inputs (bottom)
//! to outputs (top), and the graph must be acyclic in that direction.
//! Planarity is not enforced.

mod eval;
mod render;
mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::gate::{GateExpr, TwoQubitGate};
use crate::linalg::{LinalgError, Scalar};

pub use eval::{evaluate, MAX_OPEN_LEGS};
pub use render::render_ascii;
pub use text::{canonical_form, parse, parse_document, serialize, ParseError};

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    /// Bell state `(|00⟩+|11⟩)/√2`; two outputs (left, right).
    Cup,
    /// Bell effect `(⟨00|+⟨11|)/√2`; two inputs (left, right).
    Cap,
    /// Single-qubit dot; one input, one output.
    Gate1(GateExpr),
    /// Two-qubit box; inputs and outputs in slot order.
    Gate2(TwoQubitGate),
    /// `|0⟩` preparation; one output.
    Ket0,
}

impl NodeKind {
    pub fn arity(&self) -> (usize, usize) {
        match self {
            NodeKind::Cup => (0, 2),
            NodeKind::Cap => (2, 0),
            NodeKind::Gate1(_) => (1, 1),
            NodeKind::Gate2(_) => (2, 2),
            NodeKind::Ket0 => (0, 1),
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            NodeKind::Cup => "cup",
            NodeKind::Cap => "cap",
            NodeKind::Gate1(_) => "gate1",
            NodeKind::Gate2(_) => "gate2",
            NodeKind::Ket0 => "ket0",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub ins: Vec<String>,
    pub outs: Vec<String>,
}

impl Node {
    pub fn is_cup(&self) -> bool {
        matches!(self.kind, NodeKind::Cup)
    }

    pub fn is_cap(&self) -> bool {
        matches!(self.kind, NodeKind::Cap)
    }

    pub fn dot(&self) -> Option<&GateExpr> {
        match &self.kind {
            NodeKind::Gate1(g) => Some(g),
            _ => None,
        }
    }

    pub fn gate2(&self) -> Option<&TwoQubitGate> {
        match &self.kind {
            NodeKind::Gate2(g) => Some(g),
            _ => None,
        }
    }
}

/// Where an edge ends. `Node(k, slot)` indexes into [`Diagram::nodes`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    Boundary(usize),
    Node(usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    pub name: String,
    pub nodes: Vec<Node>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub scalar: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    DanglingPort { edge: String },
    EdgeOverused { edge: String, uses: usize },
    DuplicateInput { edge: String },
    DuplicateOutput { edge: String },
    DuplicateNodeId { node: String },
    ArityMismatch { node: String },
    NonUnitaryGate { node: String },
    Cycle { nodes: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingPort { edge } => write!(f, "dangling port: edge `{edge}` has only one end"),
            Violation::EdgeOverused { edge, uses } => {
                write!(f, "edge `{edge}` is attached to {uses} ports (expected 2)")
            }
            Violation::DuplicateInput { edge } => write!(f, "duplicate input `{edge}`"),
            Violation::DuplicateOutput { edge } => write!(f, "duplicate output `{edge}`"),
            Violation::DuplicateNodeId { node } => write!(f, "duplicate node id `{node}`"),
            Violation::ArityMismatch { node } => write!(f, "node `{node}` has the wrong number of legs"),
            Violation::NonUnitaryGate { node } => write!(f, "node `{node}` carries a non-unitary gate"),
            Violation::Cycle { nodes } => write!(f, "cycle through nodes {}", nodes.join(", ")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("invalid diagram: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("diagram has {0} open legs; evaluation supports at most {MAX_OPEN_LEGS}")]
    TooManyOpenLegs(usize),
    #[error("intermediate tensor of {0} qubits exceeds the evaluation budget")]
    TooLarge(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Producer and consumer of every edge, computed from a diagram snapshot.
#[derive(Clone, Debug, Default)]
pub struct EdgeIndex {
    pub producer: HashMap<String, Port>,
    pub consumer: HashMap<String, Port>,
}

impl EdgeIndex {
    pub fn producer_node(&self, edge: &str) -> Option<(usize, usize)> {
        match self.producer.get(edge)? {
            Port::Node(k, s) => Some((*k, *s)),
            Port::Boundary(_) => None,
        }
    }

    pub fn consumer_node(&self, edge: &str) -> Option<(usize, usize)> {
        match self.consumer.get(edge)? {
            Port::Node(k, s) => Some((*k, *s)),
            Port::Boundary(_) => None,
        }
    }
}

impl Diagram {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            nodes: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            scalar: Scalar::ONE,
        }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn open_legs(&self) -> usize {
        self.inputs.len() + self.outputs.len()
    }

    pub fn count(&self, pred: impl Fn(&Node) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(n)).count()
    }

    /// Builds the edge index. Later uses of an over-used edge win; call
    /// [`Diagram::validate`] first when that matters.
    pub fn edge_index(&self) -> EdgeIndex {
        let mut idx = EdgeIndex::default();
        for (k, e) in self.inputs.iter().enumerate() {
            idx.producer.insert(e.clone(), Port::Boundary(k));
        }
        for (k, e) in self.outputs.iter().enumerate() {
            idx.consumer.insert(e.clone(), Port::Boundary(k));
        }
        for (k, n) in self.nodes.iter().enumerate() {
            for (s, e) in n.ins.iter().enumerate() {
                idx.consumer.insert(e.clone(), Port::Node(k, s));
            }
            for (s, e) in n.outs.iter().enumerate() {
                idx.producer.insert(e.clone(), Port::Node(k, s));
            }
        }
        idx
    }

    /// All edge identifiers in first-mention order.
    pub fn edges(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let all = self
            .inputs
            .iter()
            .chain(self.nodes.iter().flat_map(|n| n.ins.iter().chain(n.outs.iter())))
            .chain(self.outputs.iter());
        for e in all {
            if seen.insert(e.clone()) {
                out.push(e.clone());
            }
        }
        out
    }

    /// Checks every structural invariant and reports all violations.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                v.push(Violation::DuplicateNodeId { node: n.id.clone() });
            }
            if (n.ins.len(), n.outs.len()) != n.kind.arity() {
                v.push(Violation::ArityMismatch { node: n.id.clone() });
            }
            let unitary = match &n.kind {
                NodeKind::Gate1(g) => g.is_unitary(),
                NodeKind::Gate2(TwoQubitGate::Cu(u)) => u.is_unitary(),
                _ => true,
            };
            if !unitary {
                v.push(Violation::NonUnitaryGate { node: n.id.clone() });
            }
        }
        for (list, dup) in [(&self.inputs, true), (&self.outputs, false)] {
            let mut seen = BTreeSet::new();
            for e in list {
                if !seen.insert(e) {
                    v.push(if dup {
                        Violation::DuplicateInput { edge: e.clone() }
                    } else {
                        Violation::DuplicateOutput { edge: e.clone() }
                    });
                }
            }
        }
        let mut produced: BTreeMap<&str, usize> = BTreeMap::new();
        let mut consumed: BTreeMap<&str, usize> = BTreeMap::new();
        for e in &self.inputs {
            *produced.entry(e).or_default() += 1;
        }
        for e in &self.outputs {
            *consumed.entry(e).or_default() += 1;
        }
        for n in &self.nodes {
            for e in &n.outs {
                *produced.entry(e).or_default() += 1;
            }
            for e in &n.ins {
                *consumed.entry(e).or_default() += 1;
            }
        }
        let all: BTreeSet<&str> = produced.keys().chain(consumed.keys()).copied().collect();
        for e in all {
            let p = produced.get(e).copied().unwrap_or(0);
            let c = consumed.get(e).copied().unwrap_or(0);
            if p > 1 || c > 1 {
                v.push(Violation::EdgeOverused { edge: e.to_string(), uses: p + c });
            } else if p + c < 2 {
                v.push(Violation::DanglingPort { edge: e.to_string() });
            }
        }
        if v.is_empty() {
            if let Err(cycle) = self.topological_order() {
                v.push(Violation::Cycle { nodes: cycle });
            }
        }
        v.sort();
        v.dedup();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    /// Kahn order over node indices, ready nodes taken by identifier.
    /// On a cycle, returns the identifiers of the nodes never scheduled.
    pub fn topological_order(&self) -> Result<Vec<usize>, Vec<String>> {
        self.schedule(|n| n.id.clone())
    }

    /// Kahn scheduling where the ready node with the smallest key runs first.
    pub(crate) fn schedule<K: Ord>(&self, key: impl Fn(&Node) -> K) -> Result<Vec<usize>, Vec<String>> {
        let idx = self.edge_index();
        let mut indegree: Vec<usize> = self
            .nodes
            .iter()
            .map(|n| n.ins.iter().filter(|e| idx.producer_node(e).is_some()).count())
            .collect();
        let mut ready: BTreeMap<(K, usize), usize> = BTreeMap::new();
        for (k, n) in self.nodes.iter().enumerate() {
            if indegree[k] == 0 {
                ready.insert((key(n), k), k);
            }
        }
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some((_, k)) = ready.pop_first() {
            order.push(k);
            for e in &self.nodes[k].outs {
                if let Some((succ, _)) = idx.consumer_node(e) {
                    indegree[succ] -= 1;
                    if indegree[succ] == 0 {
                        ready.insert((key(&self.nodes[succ]), succ), succ);
                    }
                }
            }
        }
        if order.len() == self.nodes.len() {
            Ok(order)
        } else {
            let done: BTreeSet<usize> = order.into_iter().collect();
            Err((0..self.nodes.len()).filter(|k| !done.contains(k)).map(|k| self.nodes[k].id.clone()).collect())
        }
    }

    /// Returns a copy with the scalar multiplied by `s`.
    pub fn scaled(&self, s: Scalar) -> Diagram {
        let mut d = self.clone();
        d.scalar = d.scalar * s;
        d
    }

    /// Smallest `<prefix><k>` not used as a node or edge identifier.
    pub fn fresh_id(&self, prefix: &str) -> String {
        let used: BTreeSet<&str> = self
            .nodes
            .iter()
            .map(|n| n.id.as_str())
            .chain(self.inputs.iter().map(String::as_str))
            .chain(self.outputs.iter().map(String::as_str))
            .chain(self.nodes.iter().flat_map(|n| n.ins.iter().chain(n.outs.iter())).map(String::as_str))
            .collect();
        (0..).map(|k| format!("{prefix}{k}")).find(|s| !used.contains(s.as_str())).unwrap()
    }
}

/// Incremental construction with generated identifiers (`n0, n1, …` for
/// nodes, `e0, e1, …` for edges).
#[derive(Clone, Debug)]
pub struct DiagramBuilder {
    d: Diagram,
    next_node: usize,
    next_edge: usize,
}

impl DiagramBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self { d: Diagram::new(name), next_node: 0, next_edge: 0 }
    }

    fn edge(&mut self) -> String {
        let e = format!("e{}", self.next_edge);
        self.next_edge += 1;
        e
    }

    fn push(&mut self, kind: NodeKind, ins: Vec<String>, outs: Vec<String>) -> String {
        let id = format!("n{}", self.next_node);
        self.next_node += 1;
        self.d.nodes.push(Node { id: id.clone(), kind, ins, outs });
        id
    }

    /// A new open input leg.
    pub fn input(&mut self) -> String {
        let e = self.edge();
        self.d.inputs.push(e.clone());
        e
    }

    pub fn output(&mut self, e: &str) {
        self.d.outputs.push(e.to_string());
    }

    /// Returns the (left, right) legs.
    pub fn cup(&mut self) -> (String, String) {
        let (l, r) = (self.edge(), self.edge());
        self.push(NodeKind::Cup, vec![], vec![l.clone(), r.clone()]);
        (l, r)
    }

    pub fn cap(&mut self, left: &str, right: &str) -> String {
        self.push(NodeKind::Cap, vec![left.to_string(), right.to_string()], vec![])
    }

    /// Places a dot on `e`, returning the wire above it.
    pub fn dot(&mut self, e: &str, g: GateExpr) -> String {
        let out = self.edge();
        self.push(NodeKind::Gate1(g), vec![e.to_string()], vec![out.clone()]);
        out
    }

    /// Places a dot unless `g` is the identity expression.
    pub fn dot_unless_identity(&mut self, e: &str, g: GateExpr) -> String {
        if g.is_identity_expr() {
            e.to_string()
        } else {
            self.dot(e, g)
        }
    }

    pub fn gate2(&mut self, a: &str, b: &str, g: TwoQubitGate) -> (String, String) {
        let (oa, ob) = (self.edge(), self.edge());
        self.push(NodeKind::Gate2(g), vec![a.to_string(), b.to_string()], vec![oa.clone(), ob.clone()]);
        (oa, ob)
    }

    pub fn ket0(&mut self) -> String {
        let e = self.edge();
        self.push(NodeKind::Ket0, vec![], vec![e.clone()]);
        e
    }

    pub fn scalar(&mut self, s: Scalar) {
        self.d.scalar = self.d.scalar * s;
    }

    pub fn finish(self) -> Diagram {
        self.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cup_with_both_legs_out_is_valid() {
        let mut b = DiagramBuilder::new("cup");
        let (l, r) = b.cup();
        b.output(&l);
        b.output(&r);
        assert_eq!(b.finish().validate(), Ok(()));
    }

    #[test]
    fn dangling_cup_leg_is_reported() {
        let mut b = DiagramBuilder::new("bad");
        let (l, _r) = b.cup();
        b.output(&l);
        let errs = b.finish().validate().unwrap_err();
        assert_eq!(errs, vec![Violation::DanglingPort { edge: "e1".into() }]);
    }

    #[test]
    fn closed_loop_is_valid() {
        let mut b = DiagramBuilder::new("loop");
        let (l, r) = b.cup();
        b.cap(&l, &r);
        assert_eq!(b.finish().validate(), Ok(()));
    }

    #[test]
    fn overuse_duplicates_and_cycles() {
        let mut d = Diagram::new("x");
        d.inputs = vec!["a".into(), "a".into()];
        d.outputs = vec!["a".into()];
        let errs = d.validate().unwrap_err();
        assert!(errs.contains(&Violation::DuplicateInput { edge: "a".into() }));
        assert!(errs.contains(&Violation::EdgeOverused { edge: "a".into(), uses: 3 }));

        let mut d = Diagram::new("cyc");
        let g = |id: &str, i: &str, o: &str| Node {
            id: id.into(),
            kind: NodeKind::Gate1(GateExpr::identity()),
            ins: vec![i.into()],
            outs: vec![o.into()],
        };
        d.nodes = vec![g("a", "x", "y"), g("b", "y", "x")];
        assert!(matches!(d.validate().unwrap_err()[0], Violation::Cycle { .. }));
    }

    #[test]
    fn fresh_ids_skip_used_names() {
        let mut b = DiagramBuilder::new("f");
        let (l, r) = b.cup();
        b.output(&l);
        b.output(&r);
        let d = b.finish();
        assert_eq!(d.fresh_id("n"), "n1");
        assert_eq!(d.fresh_id("e"), "e2");
    }
}
