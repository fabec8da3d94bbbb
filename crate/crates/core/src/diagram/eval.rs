//! Dense contraction of a diagram into the linear map it denotes.
//!
//! Nodes are swept in a topological order while a tensor over the live
//! wires (the frontier) and the diagram inputs is maintained. Consumers are
//! scheduled before producers to keep the frontier narrow.

use num_complex::Complex64 as C64;

use super::{Diagram, DiagramError, NodeKind};
use crate::linalg::{c, Matrix, FRAC_1_SQRT_2};

pub const MAX_OPEN_LEGS: usize = 16;
const MAX_TENSOR_QUBITS: usize = 24;

fn node_tensor(kind: &NodeKind) -> Matrix {
    let s = FRAC_1_SQRT_2;
    match kind {
        NodeKind::Cup => Matrix::from_parts(4, 1, vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]),
        NodeKind::Cap => Matrix::from_parts(1, 4, vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]),
        NodeKind::Gate1(g) => g.matrix(),
        NodeKind::Gate2(g) => g.matrix(),
        NodeKind::Ket0 => Matrix::from_parts(2, 1, vec![c(1., 0.), c(0., 0.)]),
    }
}

fn schedule_rank(kind: &NodeKind) -> u8 {
    match kind {
        NodeKind::Cap => 0,
        NodeKind::Gate1(_) => 1,
        NodeKind::Gate2(_) => 2,
        NodeKind::Cup => 3,
        NodeKind::Ket0 => 4,
    }
}

struct Frontier {
    wires: Vec<String>,
    n_cols: usize,
    data: Vec<C64>,
}

impl Frontier {
    fn rows(&self) -> usize {
        1 << self.wires.len()
    }

    /// Contracts `tensor` (shape `2^outs x 2^ins`) against the frontier wires
    /// `ins`, appending `outs` as new wires.
    fn apply(&mut self, tensor: &Matrix, ins: &[String], outs: &[String]) -> Result<(), DiagramError> {
        let f = self.wires.len();
        let pos: Vec<usize> = ins
            .iter()
            .map(|e| self.wires.iter().position(|w| w == e).expect("input wire must be live"))
            .collect();
        let rest: Vec<usize> = (0..f).filter(|p| !pos.contains(p)).collect();
        let new_width = rest.len() + outs.len();
        if new_width + self.n_cols.trailing_zeros() as usize > MAX_TENSOR_QUBITS {
            return Err(DiagramError::TooLarge(new_width));
        }
        let bit = |p: usize| 1usize << (f - 1 - p);
        let in_offsets: Vec<usize> = (0..1usize << pos.len())
            .map(|v| {
                pos.iter()
                    .enumerate()
                    .filter(|(k, _)| v >> (pos.len() - 1 - k) & 1 == 1)
                    .map(|(_, &p)| bit(p))
                    .sum()
            })
            .collect();
        let rest_bases: Vec<usize> = (0..1usize << rest.len())
            .map(|v| {
                rest.iter()
                    .enumerate()
                    .filter(|(k, _)| v >> (rest.len() - 1 - k) & 1 == 1)
                    .map(|(_, &p)| bit(p))
                    .sum()
            })
            .collect();
        let n_out = outs.len();
        let cols = self.n_cols;
        let mut data = vec![C64::new(0.0, 0.0); (1 << new_width) * cols];
        for (rv, &base) in rest_bases.iter().enumerate() {
            for ov in 0..1usize << n_out {
                let new_row = (rv << n_out) | ov;
                let dst = &mut data[new_row * cols..(new_row + 1) * cols];
                for (iv, &off) in in_offsets.iter().enumerate() {
                    let t = tensor.get(ov, iv);
                    if t == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let src = &self.data[(base | off) * cols..(base | off) * cols + cols];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += t * s;
                    }
                }
            }
        }
        self.wires = rest.iter().map(|&p| self.wires[p].clone()).chain(outs.iter().cloned()).collect();
        self.data = data;
        Ok(())
    }
}

/// The linear map from `⊗inputs` to `⊗outputs` (rows indexed by outputs,
/// big-endian), scaled by the diagram scalar.
pub fn evaluate(d: &Diagram) -> Result<Matrix, DiagramError> {
    d.validate().map_err(DiagramError::Invalid)?;
    if d.open_legs() > MAX_OPEN_LEGS {
        return Err(DiagramError::TooManyOpenLegs(d.open_legs()));
    }
    let order = d
        .schedule(|n| (schedule_rank(&n.kind), n.id.clone()))
        .map_err(|nodes| DiagramError::Invalid(vec![super::Violation::Cycle { nodes }]))?;
    let n_in = d.inputs.len();
    let mut fr = Frontier {
        wires: d.inputs.clone(),
        n_cols: 1 << n_in,
        data: Matrix::identity(1 << n_in).into_data(),
    };
    for k in order {
        let n = &d.nodes[k];
        fr.apply(&node_tensor(&n.kind), &n.ins, &n.outs)?;
    }
    // reorder frontier rows into output order
    let f = fr.wires.len();
    debug_assert_eq!(f, d.outputs.len());
    let perm: Vec<usize> = d
        .outputs
        .iter()
        .map(|e| fr.wires.iter().position(|w| w == e).expect("output wire must be live"))
        .collect();
    let cols = fr.n_cols;
    let value = d.scalar.value();
    let mut out = vec![C64::new(0.0, 0.0); fr.rows() * cols];
    for row in 0..fr.rows() {
        let mut src = 0usize;
        for (k, &p) in perm.iter().enumerate() {
            if row >> (f - 1 - k) & 1 == 1 {
                src |= 1 << (f - 1 - p);
            }
        }
        for col in 0..cols {
            out[row * cols + col] = fr.data[src * cols + col] * value;
        }
    }
    Ok(Matrix::from_parts(fr.rows(), cols, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::DiagramBuilder;
    use crate::gate::{GateExpr, NamedGate, TwoQubitGate};
    use crate::linalg::Scalar;

    fn g(s: &str) -> GateExpr {
        s.parse().unwrap()
    }

    #[test]
    fn bare_cup_is_the_epr_state() {
        let mut b = DiagramBuilder::new("cup");
        let (l, r) = b.cup();
        b.output(&l);
        b.output(&r);
        let v = evaluate(&b.finish()).unwrap();
        let s = FRAC_1_SQRT_2;
        assert_eq!(v, Matrix::from_real(4, 1, &[s, 0., 0., s]).unwrap());
    }

    #[test]
    fn cup_with_dot_is_a_bell_state() {
        for (i, j) in [(false, false), (false, true), (true, false), (true, true)] {
            let mut b = DiagramBuilder::new("bell");
            let (l, r) = b.cup();
            let r = b.dot(&r, GateExpr::pauli(i, j));
            b.output(&l);
            b.output(&r);
            let v = evaluate(&b.finish()).unwrap();
            let m = GateExpr::pauli(i, j).matrix();
            let s = FRAC_1_SQRT_2;
            let epr = Matrix::from_real(4, 1, &[s, 0., 0., s]).unwrap();
            let expected = &Matrix::identity(2).tensor(&m) * &epr;
            assert!(v.approx_eq(&expected, 1e-15));
        }
    }

    #[test]
    fn closed_loop_is_one() {
        let mut b = DiagramBuilder::new("loop");
        let (l, r) = b.cup();
        b.cap(&l, &r);
        let v = evaluate(&b.finish()).unwrap();
        assert!((v.get(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zigzag_is_half_identity() {
        let mut b = DiagramBuilder::new("zz");
        let a = b.input();
        let (l, r) = b.cup();
        b.cap(&a, &l);
        b.output(&r);
        let v = evaluate(&b.finish()).unwrap();
        assert!(v.approx_eq(&Matrix::identity(2).scale(c(0.5, 0.0)), 1e-15));
    }

    #[test]
    fn markov_trace() {
        // U with its output bent back to its input: tr(U)/2
        for name in [NamedGate::I, NamedGate::X, NamedGate::Z, NamedGate::H] {
            let mut b = DiagramBuilder::new("trace");
            let (l, r) = b.cup();
            let top = b.dot(&r, GateExpr::named(name));
            b.cap(&l, &top);
            let v = evaluate(&b.finish()).unwrap();
            let expected = name.matrix().trace() / 2.0;
            assert!((v.get(0, 0) - expected).norm() < 1e-12, "{name:?}");
        }
    }

    #[test]
    fn output_order_is_respected() {
        let mut b = DiagramBuilder::new("perm");
        let k = b.ket0();
        let one = b.dot(&k, g("X"));
        let zero = b.ket0();
        b.output(&zero);
        b.output(&one);
        let v = evaluate(&b.finish()).unwrap();
        assert_eq!(v.get(1, 0), c(1.0, 0.0));
    }

    #[test]
    fn ghz_from_cup_and_cnot() {
        let mut b = DiagramBuilder::new("ghz");
        let (l, r) = b.cup();
        let k = b.ket0();
        let (r2, k2) = b.gate2(&r, &k, TwoQubitGate::cnot());
        for e in [&l, &r2, &k2] {
            b.output(e);
        }
        let v = evaluate(&b.finish()).unwrap();
        let s = FRAC_1_SQRT_2;
        assert!(v.approx_eq(&Matrix::from_real(8, 1, &[s, 0., 0., 0., 0., 0., 0., s]).unwrap(), 1e-15));
    }

    #[test]
    fn scalar_is_multiplicative() {
        let mut b = DiagramBuilder::new("s");
        let a = b.input();
        let a = b.dot(&a, g("T"));
        b.output(&a);
        let d = b.finish();
        let base = evaluate(&d).unwrap();
        let s = Scalar::new(c(0.3, -0.4), -3);
        let scaled = evaluate(&d.scaled(s)).unwrap();
        assert!(scaled.approx_eq(&base.scale(s.value()), 1e-15));
    }

    #[test]
    fn too_many_open_legs() {
        let mut b = DiagramBuilder::new("wide");
        for _ in 0..9 {
            let e = b.input();
            b.output(&e);
        }
        assert_eq!(evaluate(&b.finish()), Err(DiagramError::TooManyOpenLegs(18)));
    }
}
