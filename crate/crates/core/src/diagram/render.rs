//! Monospaced pictures of diagrams, time running upward.
//!
//! Each node gets its own row. Input wires occupy the leftmost columns in
//! input order; cups and `|0⟩` preparations open fresh columns to the right.

use std::collections::{BTreeSet, HashMap};

use super::{Diagram, NodeKind};
use crate::gate::TwoQubitGate;

enum Glyph {
    Cup(usize, usize),
    Cap(usize, usize),
    Dot(usize, String),
    Box { control: usize, target: usize, target_mark: String },
    Ket0(usize),
}

struct Row {
    glyph: Glyph,
    live: BTreeSet<usize>,
}

pub fn render_ascii(d: &Diagram) -> String {
    let order = d.topological_order().unwrap_or_else(|_| (0..d.nodes.len()).collect());
    let mut col_of: HashMap<&str, usize> = HashMap::new();
    for (k, e) in d.inputs.iter().enumerate() {
        col_of.insert(e, k);
    }
    let mut next_col = d.inputs.len();
    let mut live: BTreeSet<usize> = (0..d.inputs.len()).collect();
    let mut rows = Vec::new();
    for k in order {
        let n = &d.nodes[k];
        let ins: Vec<usize> = n.ins.iter().map(|e| col_of.get(e.as_str()).copied().unwrap_or(0)).collect();
        let glyph = match &n.kind {
            NodeKind::Cup => {
                let (a, b) = (next_col, next_col + 1);
                next_col += 2;
                col_of.insert(&n.outs[0], a);
                col_of.insert(&n.outs[1], b);
                Glyph::Cup(a, b)
            }
            NodeKind::Ket0 => {
                let a = next_col;
                next_col += 1;
                col_of.insert(&n.outs[0], a);
                Glyph::Ket0(a)
            }
            NodeKind::Cap => Glyph::Cap(ins[0], ins[1]),
            NodeKind::Gate1(g) => {
                col_of.insert(&n.outs[0], ins[0]);
                Glyph::Dot(ins[0], g.to_string())
            }
            NodeKind::Gate2(g) => {
                col_of.insert(&n.outs[0], ins[0]);
                col_of.insert(&n.outs[1], ins[1]);
                let (control, target, mark) = match g {
                    TwoQubitGate::Cnot { control: 0 } => (ins[0], ins[1], "⊕".to_string()),
                    TwoQubitGate::Cnot { .. } => (ins[1], ins[0], "⊕".to_string()),
                    TwoQubitGate::Cz => (ins[0], ins[1], "*".to_string()),
                    TwoQubitGate::Cu(u) => (ins[0], ins[1], format!("[{u}]")),
                };
                Glyph::Box { control, target, target_mark: mark }
            }
        };
        let touched: Vec<usize> = match &glyph {
            Glyph::Cup(a, b) | Glyph::Cap(a, b) => vec![*a, *b],
            Glyph::Dot(a, _) | Glyph::Ket0(a) => vec![*a],
            Glyph::Box { control, target, .. } => vec![*control, *target],
        };
        let through: BTreeSet<usize> = live.iter().copied().filter(|c| !touched.contains(c)).collect();
        match &glyph {
            Glyph::Cup(a, b) => {
                live.insert(*a);
                live.insert(*b);
            }
            Glyph::Ket0(a) => {
                live.insert(*a);
            }
            Glyph::Cap(a, b) => {
                live.remove(a);
                live.remove(b);
            }
            _ => {}
        }
        rows.push(Row { glyph, live: through });
    }

    let n_cols = next_col.max(1);
    let label_w = rows
        .iter()
        .map(|r| match &r.glyph {
            Glyph::Dot(_, s) => s.chars().count() + 3,
            Glyph::Box { target_mark, .. } => target_mark.chars().count(),
            _ => 1,
        })
        .chain(d.inputs.iter().chain(d.outputs.iter()).map(|e| e.chars().count()))
        .max()
        .unwrap_or(1);
    let w = (label_w + 2).max(4);
    let width = n_cols * w;

    let blank = || vec![' '; width + w];
    let put = |line: &mut Vec<char>, x: usize, s: &str| {
        for (k, ch) in s.chars().enumerate() {
            if x + k < line.len() {
                line[x + k] = ch;
            }
        }
    };
    let boundary_line = |edges: &[String]| {
        let mut line = blank();
        for e in edges {
            if let Some(&c) = col_of.get(e.as_str()) {
                put(&mut line, c * w, e);
            }
        }
        line
    };

    let mut lines: Vec<Vec<char>> = Vec::new();
    if !d.inputs.is_empty() {
        lines.push(boundary_line(&d.inputs));
    }
    for row in &rows {
        let mut line = blank();
        for &c in &row.live {
            line[c * w] = '|';
        }
        match &row.glyph {
            Glyph::Cup(a, b) | Glyph::Cap(a, b) => {
                let (lo, hi) = (a.min(b) * w, a.max(b) * w);
                let (l, fill, r) = if matches!(row.glyph, Glyph::Cup(..)) { ('\\', '_', '/') } else { ('/', '‾', '\\') };
                line[lo + 1..hi].fill(fill);
                line[lo] = l;
                line[hi] = r;
            }
            Glyph::Dot(c, s) => put(&mut line, c * w, &format!("*[{s}]")),
            Glyph::Ket0(c) => line[c * w] = '∇',
            Glyph::Box { control, target, target_mark } => {
                let (lo, hi) = (control.min(target) * w, control.max(target) * w);
                line[lo + 1..hi].fill('─');
                line[control * w] = '*';
                put(&mut line, target * w, target_mark);
            }
        }
        lines.push(line);
    }
    lines.push(boundary_line(&d.outputs));

    let mut out = String::new();
    for line in lines.iter().rev() {
        let s: String = line.iter().collect();
        out += s.trim_end();
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::DiagramBuilder;
    use crate::gate::GateExpr;

    #[test]
    fn bare_cup_joins_two_wires_at_the_bottom() {
        let mut b = DiagramBuilder::new("cup");
        let (l, r) = b.cup();
        b.output(&l);
        b.output(&r);
        let pic = render_ascii(&b.finish());
        let lines: Vec<&str> = pic.lines().collect();
        assert_eq!(lines[0], "e0  e1");
        assert_eq!(lines[1], "\\___/");
    }

    #[test]
    fn dot_label_appears_on_its_wire() {
        let mut b = DiagramBuilder::new("bell");
        let (l, r) = b.cup();
        let r = b.dot(&r, GateExpr::pauli(true, true));
        b.output(&l);
        b.output(&r);
        let pic = render_ascii(&b.finish());
        assert_eq!(pic.lines().nth(1), Some("|       *[X.Z]"), "{pic}");
        assert!(pic.lines().last().unwrap().starts_with('\\'));
    }

    #[test]
    fn cnot_bridges_columns() {
        let mut b = DiagramBuilder::new("chi");
        let (a, bb) = b.cup();
        let (c, dd) = b.cup();
        let (t, ctl) = b.gate2(&bb, &c, TwoQubitGate::Cnot { control: 1 });
        for e in [&a, &t, &ctl, &dd] {
            b.output(e);
        }
        let pic = render_ascii(&b.finish());
        assert!(pic.contains("⊕───*"), "{pic}");
        assert_eq!(pic.matches('\\').count(), 2);
    }
}
