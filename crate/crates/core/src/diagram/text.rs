//! Line-oriented text format for diagrams.
//!
//! ```text
//! diagram <name>
//! scalar <coeff_re> <coeff_im> <sqrt2_exp>
//! input <edge-id> ...
//! output <edge-id> ...
//! node <id> cup <left-edge> <right-edge>
//! node <id> cap <left-edge> <right-edge>
//! node <id> gate1 <in-edge> <out-edge> gate=<expr>
//! node <id> gate2 <in1> <in2> <out1> <out2> gate=cnot|cnot(1)|cz|cu(<expr>)
//! node <id> ket0 <out-edge>
//! ```
//!
//! `#` starts a comment. `scalar`, `input` and `output` are optional.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{Diagram, Node, NodeKind, Port};
use crate::gate::{GateError, GateExpr, TwoQubitGate};
use crate::linalg::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: {source}")]
    Gate { line: usize, col: usize, source: GateError },
    #[error("line {line}: `{keyword}` node takes {expected} edges, got {got}")]
    Arity { line: usize, keyword: String, expected: usize, got: usize },
    #[error("undefined edge id `{0}`: it is listed as a boundary but no node uses it")]
    UndefinedEdge(String),
}

/// Tokens with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..k]));
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(s, t)| (line[..s].chars().count() + 1, t)).collect()
}

/// Parses a file holding one or more diagrams, each opened by its own
/// `diagram` line. Line numbers in errors refer to the whole file.
pub fn parse_document(text: &str) -> Result<Vec<Diagram>, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let starts: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| tokens(l.split('#').next().unwrap_or("")).first().is_some_and(|&(_, t)| t == "diagram"))
        .map(|(k, _)| k)
        .collect();
    if starts.len() <= 1 {
        return parse(text).map(|d| vec![d]);
    }
    let mut out = Vec::new();
    for (n, &start) in starts.iter().enumerate() {
        let end = starts.get(n + 1).copied().unwrap_or(lines.len());
        let section: Vec<&str> = lines
            .iter()
            .enumerate()
            .map(|(k, l)| if (n == 0 || k >= start) && k < end { *l } else { "" })
            .collect();
        out.push(parse(&section.join("\n"))?);
    }
    Ok(out)
}

pub fn parse(text: &str) -> Result<Diagram, ParseError> {
    let mut d = Diagram::new("");
    let mut named = false;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(&(col, head)) = toks.first() else { continue };
        let syntax = |col: usize, msg: &str| ParseError::Syntax { line: line_no, col, msg: msg.to_string() };
        match head {
            "diagram" => {
                if named {
                    return Err(syntax(col, "duplicate `diagram` directive"));
                }
                named = true;
                d.name = toks.get(1).map(|t| t.1.to_string()).unwrap_or_default();
            }
            "scalar" => {
                if toks.len() != 4 {
                    return Err(syntax(col, "expected `scalar <re> <im> <sqrt2_exp>`"));
                }
                let re: f64 = toks[1].1.parse().map_err(|_| syntax(toks[1].0, "bad real part"))?;
                let im: f64 = toks[2].1.parse().map_err(|_| syntax(toks[2].0, "bad imaginary part"))?;
                let k: i32 = toks[3].1.parse().map_err(|_| syntax(toks[3].0, "bad sqrt2 exponent"))?;
                if !re.is_finite() || !im.is_finite() {
                    return Err(syntax(toks[1].0, "scalar must be finite"));
                }
                d.scalar = Scalar::new(num_complex::Complex64::new(re, im), k);
            }
            "input" => d.inputs.extend(toks[1..].iter().map(|t| t.1.to_string())),
            "output" => d.outputs.extend(toks[1..].iter().map(|t| t.1.to_string())),
            "node" => d.nodes.push(parse_node(line_no, line, &toks)?),
            other => return Err(syntax(col, &format!("unknown directive `{other}`"))),
        }
    }
    let mut node_edges = BTreeSet::new();
    for n in &d.nodes {
        node_edges.extend(n.ins.iter().chain(n.outs.iter()).map(String::as_str));
    }
    let inputs: BTreeSet<&str> = d.inputs.iter().map(String::as_str).collect();
    let outputs: BTreeSet<&str> = d.outputs.iter().map(String::as_str).collect();
    for e in d.inputs.iter().chain(d.outputs.iter()) {
        let straight = inputs.contains(e.as_str()) && outputs.contains(e.as_str());
        if !straight && !node_edges.contains(e.as_str()) {
            return Err(ParseError::UndefinedEdge(e.clone()));
        }
    }
    Ok(d)
}

fn parse_node(line_no: usize, line: &str, toks: &[(usize, &str)]) -> Result<Node, ParseError> {
    let syntax = |col: usize, msg: &str| ParseError::Syntax { line: line_no, col, msg: msg.to_string() };
    if toks.len() < 3 {
        return Err(syntax(toks[0].0, "expected `node <id> <kind> ...`"));
    }
    let id = toks[1].1.to_string();
    let (kcol, keyword) = toks[2];
    // gate=... consumes the remainder of the line so expressions may contain spaces
    let gate_at = toks.iter().position(|t| t.1.starts_with("gate="));
    let edge_toks = &toks[3..gate_at.unwrap_or(toks.len())];
    let edges: Vec<String> = edge_toks.iter().map(|t| t.1.to_string()).collect();
    let gate_src = gate_at.map(|k| {
        let col = toks[k].0;
        let byte = line.char_indices().nth(col - 1).map(|(b, _)| b).unwrap_or(0);
        (col + 5, line[byte + 5..].trim())
    });
    let want = |n: usize| {
        if edges.len() != n {
            Err(ParseError::Arity { line: line_no, keyword: keyword.to_string(), expected: n, got: edges.len() })
        } else {
            Ok(())
        }
    };
    let need_gate = || gate_src.ok_or_else(|| syntax(kcol, &format!("`{keyword}` requires gate=<expr>")));
    let gate_err = |col: usize, source: GateError| ParseError::Gate { line: line_no, col, source };
    let (kind, ins, outs) = match keyword {
        "cup" => {
            want(2)?;
            (NodeKind::Cup, vec![], edges)
        }
        "cap" => {
            want(2)?;
            (NodeKind::Cap, edges, vec![])
        }
        "ket0" => {
            want(1)?;
            (NodeKind::Ket0, vec![], edges)
        }
        "gate1" => {
            want(2)?;
            let (col, src) = need_gate()?;
            let g: GateExpr = src.parse().map_err(|e| gate_err(col, e))?;
            (NodeKind::Gate1(g), vec![edges[0].clone()], vec![edges[1].clone()])
        }
        "gate2" => {
            want(4)?;
            let (col, src) = need_gate()?;
            let g: TwoQubitGate = src.parse().map_err(|e| gate_err(col, e))?;
            (NodeKind::Gate2(g), edges[..2].to_vec(), edges[2..].to_vec())
        }
        other => return Err(syntax(kcol, &format!("unknown node kind `{other}`"))),
    };
    if gate_src.is_some() && !matches!(kind, NodeKind::Gate1(_) | NodeKind::Gate2(_)) {
        return Err(syntax(kcol, &format!("`{keyword}` does not take a gate")));
    }
    Ok(Node { id, kind, ins, outs })
}

fn node_line(id: &str, n: &Node, rename: &dyn Fn(&str) -> String) -> String {
    let edges: Vec<String> = n.ins.iter().chain(n.outs.iter()).map(|e| rename(e)).collect();
    let gate = match &n.kind {
        NodeKind::Gate1(g) => format!(" gate={g}"),
        NodeKind::Gate2(g) => format!(" gate={g}"),
        _ => String::new(),
    };
    format!("node {id} {} {}{gate}", n.kind.keyword(), edges.join(" "))
}

fn header(d: &Diagram, name: &str, inputs: &[String], outputs: &[String]) -> String {
    let z = d.scalar.coeff();
    let mut s = format!("diagram {name}\n");
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    s += &format!("scalar {re} {im} {}\n", d.scalar.sqrt2_exp());
    s += &format!("input {}\n", inputs.join(" ")).replace(" \n", "\n");
    s += &format!("output {}\n", outputs.join(" ")).replace(" \n", "\n");
    s
}

/// Deterministic text: nodes in topological order, ties broken by identifier.
pub fn serialize(d: &Diagram) -> String {
    let order = d.topological_order().unwrap_or_else(|_| (0..d.nodes.len()).collect());
    let mut s = header(d, &d.name, &d.inputs, &d.outputs);
    for k in order {
        let n = &d.nodes[k];
        s += &node_line(&n.id, n, &|e| e.to_string());
        s.push('\n');
    }
    s
}

/// Serialization with identifiers replaced by structural labels, so that
/// isomorphic diagrams built with different identifiers produce equal text.
///
/// Nodes are emitted in a topological order where the next ready node is the
/// one with the smallest structural signature (kind, gate, labels of its input
/// wires, and the kinds of its immediate consumers); identifiers only break
/// remaining ties.
pub fn canonical_form(d: &Diagram) -> String {
    let idx = d.edge_index();
    let mut label: HashMap<String, String> = HashMap::new();
    for (k, e) in d.inputs.iter().enumerate() {
        label.insert(e.clone(), format!("i{k}"));
    }
    let consumer_sig = |e: &str| -> String {
        match idx.consumer.get(e) {
            Some(Port::Boundary(k)) => format!("out{k}"),
            Some(Port::Node(n, s)) => format!("{}{}:{s}", d.nodes[*n].kind.keyword(), gate_text(&d.nodes[*n])),
            None => "?".into(),
        }
    };
    let mut indegree: Vec<usize> =
        d.nodes.iter().map(|n| n.ins.iter().filter(|e| idx.producer_node(e).is_some()).count()).collect();
    let mut ready: BTreeSet<usize> = (0..d.nodes.len()).filter(|&k| indegree[k] == 0).collect();
    let mut lines = Vec::new();
    let mut next_wire = 0;
    while !ready.is_empty() {
        let sig = |k: usize| {
            let n = &d.nodes[k];
            let ins: Vec<String> = n.ins.iter().map(|e| label.get(e).cloned().unwrap_or_default()).collect();
            let outs: Vec<String> = n.outs.iter().map(|e| consumer_sig(e)).collect();
            (n.kind.keyword(), gate_text(n), ins, outs, n.id.clone())
        };
        let k = *ready.iter().min_by_key(|&&k| sig(k)).unwrap();
        ready.remove(&k);
        let n = &d.nodes[k];
        for e in &n.outs {
            label.insert(e.clone(), format!("w{next_wire}"));
            next_wire += 1;
            if let Some((succ, _)) = idx.consumer_node(e) {
                indegree[succ] -= 1;
                if indegree[succ] == 0 {
                    ready.insert(succ);
                }
            }
        }
        let rename = |e: &str| label.get(e).cloned().unwrap_or_else(|| "?".into());
        lines.push(node_line(&format!("v{}", lines.len()), n, &rename));
    }
    let rename = |e: &String| label.get(e).cloned().unwrap_or_else(|| "?".into());
    let ins: Vec<String> = d.inputs.iter().map(rename).collect();
    let outs: Vec<String> = d.outputs.iter().map(rename).collect();
    let mut s = header(d, "canonical", &ins, &outs);
    for l in lines {
        s += &l;
        s.push('\n');
    }
    s
}

fn gate_text(n: &Node) -> String {
    match &n.kind {
        NodeKind::Gate1(g) => g.to_string(),
        NodeKind::Gate2(g) => g.to_string(),
        _ => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::DiagramBuilder;

    const BARE_CUP: &str = "diagram cup\nscalar 1 0 0\ninput\noutput a b\nnode n1 cup a b\n";

    #[test]
    fn document_splits_on_diagram_lines() {
        let ds = parse_document("# eq\ndiagram a\ninput x\noutput x\ndiagram b\noutput p q\nnode n1 spoon p q\n");
        assert_eq!(ds, Err(ParseError::Syntax { line: 7, col: 9, msg: "unknown node kind `spoon`".to_string() }));
        let ds = parse_document("diagram a\ninput x\noutput x\ndiagram b\noutput p q\nnode n1 cup p q\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[1].name, "b");
        assert_eq!(parse_document(BARE_CUP).unwrap().len(), 1);
    }

    #[test]
    fn bare_cup_document() {
        let d = parse("diagram cup\noutput a b\nnode n1 cup a b\n").unwrap();
        assert_eq!(serialize(&d), BARE_CUP);
        assert_eq!(serialize(&d).lines().count(), 5);
    }

    #[test]
    fn undefined_edge_is_named() {
        let err = parse("diagram x\noutput a zz\nnode n1 cup a b\n").unwrap_err();
        assert_eq!(err, ParseError::UndefinedEdge("zz".into()));
        assert!(err.to_string().contains("zz"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("diagram x\n  node n1 spoon a b\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, col: 11, .. }), "{err:?}");
        let err = parse("bogus\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, col: 1, .. }));
        let err = parse("node g gate1 a b gate=Q\n").unwrap_err();
        assert!(matches!(err, ParseError::Gate { line: 1, source: GateError::UnknownName(_), .. }));
        let err = parse("node c cup a\n").unwrap_err();
        assert!(matches!(err, ParseError::Arity { expected: 2, got: 1, .. }));
        let err = parse("node c cup a b gate=X\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn comments_and_gates_with_spaces() {
        let src = "# teleport\ndiagram t\ninput a\noutput b\nnode n0 gate1 a b gate=mat2(0, 1, 1, 0)  # X\n";
        let d = parse(src).unwrap();
        assert_eq!(d.nodes.len(), 1);
        assert_eq!(d.nodes[0].dot().unwrap().to_string(), "mat2(0+0j,1+0j,1+0j,0+0j)");
    }

    #[test]
    fn canonical_form_ignores_identifiers() {
        let build = |names: [&str; 3]| {
            let mut d = Diagram::new("x");
            d.inputs = vec![names[0].into()];
            d.outputs = vec![names[2].into()];
            d.nodes = vec![
                Node { id: "p".into(), kind: NodeKind::Cup, ins: vec![], outs: vec![names[1].into(), names[2].into()] },
                Node { id: "q".into(), kind: NodeKind::Cap, ins: vec![names[0].into(), names[1].into()], outs: vec![] },
            ];
            d
        };
        assert_eq!(canonical_form(&build(["a", "b", "c"])), canonical_form(&build(["x", "y", "z"])));
        let mut b = DiagramBuilder::new("y");
        let a = b.input();
        let (l, r) = b.cup();
        b.cap(&a, &l);
        b.output(&r);
        assert_eq!(canonical_form(&b.finish()), canonical_form(&build(["a", "b", "c"])));
    }

    #[test]
    fn straight_wire_round_trips() {
        let d = parse("diagram w\ninput a\noutput a\n").unwrap();
        assert_eq!(parse(&serialize(&d)).unwrap(), d);
    }
}
