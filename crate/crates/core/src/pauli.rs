//! Pauli strings with exact phases, Clifford conjugation, the two-qubit
//! teleportation correction tables, and the Clifford-hierarchy classifier.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::gate::{NamedGate, TwoQubitGate};
use crate::linalg::{c, equal_upto_phase, is_unitary, LinalgError, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("width mismatch: {0} vs {1} qubits")]
    WidthMismatch(usize, usize),
    #[error("expected a {expected}-qubit operator, got {got}")]
    WrongWidth { expected: usize, got: usize },
    #[error("cannot parse pauli string `{0}`")]
    Parse(String),
    #[error("operator is not unitary")]
    NotUnitary,
    #[error("hierarchy classification supports at most 2 qubits, got {0}")]
    TooWide(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `i^phase · ⊗_q X^{x_q} Z^{z_q}`. Qubit 0 is the leftmost factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 64, "pauli strings support at most 64 qubits");
        Self { n, x: 0, z: 0, phase: 0 }
    }

    /// Builds from per-qubit `(x, z)` bits, phase `i^phase`.
    pub fn from_bits(bits: &[(bool, bool)], phase: u8) -> Self {
        let mut p = Self::identity(bits.len());
        for (q, &(xb, zb)) in bits.iter().enumerate() {
            p.set(q, xb, zb);
        }
        p.phase = phase % 4;
        p
    }

    /// The single-qubit operator `(x, z)` placed on `qubit` of an `n`-qubit register.
    pub fn single(n: usize, qubit: usize, x: bool, z: bool) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, x, z);
        p
    }

    /// `X^i Z^j` on one qubit.
    pub fn xz(i: bool, j: bool) -> Self {
        Self::single(1, 0, i, j)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `k` of the phase `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_value(&self) -> C64 {
        [c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)][self.phase as usize]
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// Drops the phase.
    pub fn unsigned(self) -> Self {
        self.with_phase(0)
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x >> q & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z >> q & 1 == 1
    }

    fn set(&mut self, q: usize, xb: bool, zb: bool) {
        self.x = (self.x & !(1 << q)) | (u64::from(xb) << q);
        self.z = (self.z & !(1 << q)) | (u64::from(zb) << q);
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Restriction to one qubit, phase dropped.
    pub fn qubit(&self, q: usize) -> PauliString {
        Self::xz(self.x_bit(q), self.z_bit(q))
    }

    pub fn multiply(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        if self.n != other.n {
            return Err(PauliError::WidthMismatch(self.n, other.n));
        }
        // Z^a X^b = (-1)^{ab} X^b Z^a per qubit
        let swaps = (self.z & other.x).count_ones() as u8;
        Ok(PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * (swaps % 2)) % 4,
        })
    }

    /// Hermitian conjugate.
    pub fn dagger(&self) -> PauliString {
        // (X^x Z^z)^† = Z^z X^x = (-1)^{xz} X^x Z^z
        let swaps = (self.x & self.z).count_ones() as u8 % 2;
        let phase = (4 - self.phase + 2 * swaps) % 4;
        PauliString { phase, ..*self }
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let mut out = PauliString::identity(self.n + other.n);
        for q in 0..self.n {
            out.set(q, self.x_bit(q), self.z_bit(q));
        }
        for q in 0..other.n {
            out.set(self.n + q, other.x_bit(q), other.z_bit(q));
        }
        out.phase = (self.phase + other.phase) % 4;
        out
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::scalar(self.phase_value());
        for q in 0..self.n {
            let mut f = Matrix::identity(2);
            if self.x_bit(q) {
                f = &f * &NamedGate::X.matrix();
            }
            if self.z_bit(q) {
                f = &f * &NamedGate::Z.matrix();
            }
            m = m.tensor(&f);
        }
        m
    }

    /// Every phase-free string on `n` qubits, in lexicographic (I, X, Z, XZ) order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1u64 << (2 * n)).map(move |code| {
            let mut p = PauliString::identity(n);
            for q in 0..n {
                let digit = (code >> (2 * (n - 1 - q))) & 3;
                p.set(q, digit & 1 == 1, digit & 2 == 2);
            }
            p
        })
    }

    /// Recognizes `m = λ·P` for a Pauli string `P` (phase `i^k` folded into `P`
    /// when `λ` is a power of `i`). Returns `P` and the leftover unit factor.
    pub fn from_matrix(m: &Matrix, tol: f64) -> Option<(PauliString, C64)> {
        if !m.is_square() || m.rows() == 0 {
            return None;
        }
        let n = m.row_qubits();
        // Pauli matrices are monomial; read x-bits off the support of column 0.
        let col0 = (0..m.rows()).max_by(|&a, &b| m.get(a, 0).norm().total_cmp(&m.get(b, 0).norm()))?;
        let mut x_guess = PauliString::identity(n);
        for q in 0..n {
            let bit = (col0 >> (n - 1 - q)) & 1 == 1;
            x_guess.set(q, bit, false);
        }
        for zbits in 0..1u64 << n {
            let mut cand = x_guess;
            for q in 0..n {
                cand.z |= ((zbits >> q) & 1) << q;
            }
            if let Ok(Some(lambda)) = equal_upto_phase(m, &cand.to_matrix(), tol) {
                for k in 0..4u8 {
                    let w = cand.with_phase(k).phase_value();
                    if (lambda - w).norm() <= 1e-12 {
                        return Some((cand.with_phase(k), c(1.0, 0.0)));
                    }
                }
                return Some((cand, lambda));
            }
        }
        None
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["", "i", "-", "-i"][self.phase as usize])?;
        let factors: Vec<&str> = (0..self.n)
            .map(|q| match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => "I",
                (true, false) => "X",
                (false, true) => "Z",
                (true, true) => "XZ",
            })
            .collect();
        f.write_str(&factors.join("⊗"))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, PauliError> {
        let err = || PauliError::Parse(s.to_string());
        let t = s.trim();
        let (phase, body) = if let Some(r) = t.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = t.strip_prefix('i') {
            (1, r)
        } else {
            (0, t)
        };
        let parts: Vec<&str> =
            if body.contains('⊗') { body.split('⊗').collect() } else { body.split('x').collect() };
        if parts.is_empty() || parts.len() > 64 {
            return Err(err());
        }
        let bits = parts
            .iter()
            .map(|f| match f.trim() {
                "I" => Ok((false, false)),
                "X" => Ok((true, false)),
                "Z" => Ok((false, true)),
                "XZ" => Ok((true, true)),
                _ => Err(err()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliString::from_bits(&bits, phase))
    }
}

/// A Clifford unitary described by the images of the generators `X_q`, `Z_q`
/// under conjugation `C · g · C†`.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordMap {
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
}

impl CliffordMap {
    pub fn identity(n: usize) -> Self {
        Self {
            x_images: (0..n).map(|q| PauliString::single(n, q, true, false)).collect(),
            z_images: (0..n).map(|q| PauliString::single(n, q, false, true)).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.x_images.len()
    }

    pub fn cnot(n: usize, control: usize, target: usize) -> Self {
        let mut m = Self::identity(n);
        m.x_images[control] = m.x_images[control].multiply(&PauliString::single(n, target, true, false)).unwrap();
        m.z_images[target] = PauliString::single(n, control, false, true)
            .multiply(&PauliString::single(n, target, false, true))
            .unwrap();
        m
    }

    pub fn cz(n: usize, a: usize, b: usize) -> Self {
        let mut m = Self::identity(n);
        m.x_images[a] = m.x_images[a].multiply(&PauliString::single(n, b, false, true)).unwrap();
        m.x_images[b] = PauliString::single(n, a, false, true)
            .multiply(&PauliString::single(n, b, true, false))
            .unwrap();
        m
    }

    pub fn hadamard(n: usize, q: usize) -> Self {
        let mut m = Self::identity(n);
        m.x_images[q] = PauliString::single(n, q, false, true);
        m.z_images[q] = PauliString::single(n, q, true, false);
        m
    }

    /// The conjugation map of a CNOT or CZ box acting on qubits `(a, b)` of `n`.
    pub fn from_box(gate: &TwoQubitGate, n: usize, a: usize, b: usize) -> Option<Self> {
        match gate {
            TwoQubitGate::Cnot { control: 0 } => Some(Self::cnot(n, a, b)),
            TwoQubitGate::Cnot { .. } => Some(Self::cnot(n, b, a)),
            TwoQubitGate::Cz => Some(Self::cz(n, a, b)),
            TwoQubitGate::Cu(_) => None,
        }
    }

    /// `C · p · C†`, exact phase.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString, PauliError> {
        let n = self.n_qubits();
        if p.n_qubits() != n {
            return Err(PauliError::WidthMismatch(n, p.n_qubits()));
        }
        let mut out = PauliString::identity(n).with_phase(p.phase());
        // p = i^k Π_q X_q^{x_q} Z_q^{z_q}, factors on distinct qubits commute
        for q in 0..n {
            if p.x_bit(q) {
                out = out.multiply(&self.x_images[q])?;
            }
            if p.z_bit(q) {
                out = out.multiply(&self.z_images[q])?;
            }
        }
        Ok(out)
    }

    /// `self` applied after `first`: conjugation by `self · first`.
    pub fn compose_after(&self, first: &CliffordMap) -> Result<CliffordMap, PauliError> {
        Ok(CliffordMap {
            x_images: first.x_images.iter().map(|p| self.conjugate(p)).collect::<Result<_, _>>()?,
            z_images: first.z_images.iter().map(|p| self.conjugate(p)).collect::<Result<_, _>>()?,
        })
    }
}

fn require_two(p: &PauliString) -> Result<(), PauliError> {
    if p.n_qubits() != 2 {
        return Err(PauliError::WrongWidth { expected: 2, got: p.n_qubits() });
    }
    Ok(())
}

/// `CNOT · p · CNOT` with the first qubit as control.
pub fn conjugate_by_cnot(p: &PauliString) -> Result<PauliString, PauliError> {
    require_two(p)?;
    CliffordMap::cnot(2, 0, 1).conjugate(p)
}

/// `CZ · p · CZ`.
pub fn conjugate_by_cz(p: &PauliString) -> Result<PauliString, PauliError> {
    require_two(p)?;
    CliffordMap::cz(2, 0, 1).conjugate(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Outcome {
    pub i: bool,
    pub j: bool,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome { i: false, j: false },
        Outcome { i: false, j: true },
        Outcome { i: true, j: false },
        Outcome { i: true, j: true },
    ];

    pub fn new(i: bool, j: bool) -> Self {
        Self { i, j }
    }

    pub fn from_bits(i: u8, j: u8) -> Self {
        Self { i: i != 0, j: j != 0 }
    }

    /// `M = X^i Z^j`.
    pub fn pauli(&self) -> PauliString {
        PauliString::xz(self.i, self.j)
    }

    /// Index `2i + j`, matching the basis label `|ij⟩`.
    pub fn index(&self) -> usize {
        usize::from(self.i) * 2 + usize::from(self.j)
    }

    pub fn from_index(k: usize) -> Self {
        Self { i: k & 2 != 0, j: k & 1 != 0 }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", u8::from(self.i), u8::from(self.j))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CuKind {
    Cnot,
    Cz,
}

impl CuKind {
    pub fn gate(self) -> TwoQubitGate {
        match self {
            CuKind::Cnot => TwoQubitGate::cnot(),
            CuKind::Cz => TwoQubitGate::Cz,
        }
    }
}

/// One row of a correction table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrectionEntry {
    pub first: Outcome,
    pub second: Outcome,
    pub q: PauliString,
    pub p: PauliString,
}

fn pow(p: PauliString, e: bool) -> PauliString {
    if e {
        p
    } else {
        PauliString::identity(1)
    }
}

fn product(fs: &[PauliString]) -> PauliString {
    fs.iter().fold(PauliString::identity(1), |acc, f| acc.multiply(f).unwrap())
}

/// The residual pair `(Q, P)` for each pair of Bell outcomes
/// `M = X^{i1} Z^{j1}`, `N = X^{i2} Z^{j2}`, as closed-form products.
pub fn correction_table(kind: CuKind) -> BTreeMap<(Outcome, Outcome), CorrectionEntry> {
    let x = PauliString::xz(true, false);
    let z = PauliString::xz(false, true);
    let mut table = BTreeMap::new();
    for k in 0..16 {
        let first = Outcome::from_index(k >> 2);
        let second = Outcome::from_index(k & 3);
        let (i1, j1, i2, j2) = (first.i, first.j, second.i, second.j);
        let (q, p) = match kind {
            CuKind::Cnot => (
                product(&[pow(z, j2), pow(z, j1), pow(x, i1)]),
                product(&[pow(x, i2), pow(z, j2), pow(x, i1)]),
            ),
            CuKind::Cz => (
                product(&[pow(z, i2), pow(x, i1), pow(z, j1)]),
                product(&[pow(z, j2), pow(x, i2), pow(z, i1)]),
            ),
        };
        table.insert((first, second), CorrectionEntry { first, second, q, p });
    }
    table
}

/// `CU · (M* ⊗ N†) · CU†` for the given outcomes.
pub fn conjugated_outcome_operator(gate: &TwoQubitGate, first: Outcome, second: Outcome) -> Matrix {
    let m_star = first.pauli().to_matrix().conjugate();
    let n_dag = second.pauli().to_matrix().dagger();
    let cu = gate.matrix();
    &(&cu * &m_star.tensor(&n_dag)) * &cu.dagger()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum HierarchyLevel {
    C1,
    C2,
    C3,
    Beyond,
}

impl HierarchyLevel {
    pub fn rank(self) -> u8 {
        match self {
            HierarchyLevel::C1 => 1,
            HierarchyLevel::C2 => 2,
            HierarchyLevel::C3 => 3,
            HierarchyLevel::Beyond => 4,
        }
    }
}

impl fmt::Display for HierarchyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HierarchyLevel::C1 => "C1",
            HierarchyLevel::C2 => "C2",
            HierarchyLevel::C3 => "C3",
            HierarchyLevel::Beyond => "beyond",
        })
    }
}

fn generators(n: usize) -> Vec<Matrix> {
    (0..n)
        .flat_map(|q| [PauliString::single(n, q, true, false), PauliString::single(n, q, false, true)])
        .map(|p| p.to_matrix())
        .collect()
}

fn in_c1(u: &Matrix, tol: f64) -> bool {
    PauliString::from_matrix(u, tol).is_some()
}

fn in_c2(u: &Matrix, gens: &[Matrix], tol: f64) -> bool {
    let ud = u.dagger();
    gens.iter().all(|g| in_c1(&(&(u * g) * &ud), tol))
}

fn in_c3(u: &Matrix, gens: &[Matrix], tol: f64) -> bool {
    let ud = u.dagger();
    gens.iter().all(|g| in_c2(&(&(u * g) * &ud), gens, tol))
}

/// Smallest `k ≤ 3` with `u ∈ C_k`, where `C_1` is the Pauli group and
/// `C_k = { U : U·C_1·U† ⊆ C_{k-1} }`.
pub fn classify_hierarchy(u: &Matrix, n_qubits: usize, tol: f64) -> Result<HierarchyLevel, PauliError> {
    if n_qubits > 2 {
        return Err(PauliError::TooWide(n_qubits));
    }
    if u.rows() != 1 << n_qubits || !u.is_square() {
        return Err(PauliError::WrongWidth { expected: n_qubits, got: u.row_qubits() });
    }
    if !is_unitary(u, tol)? {
        return Err(PauliError::NotUnitary);
    }
    let gens = generators(n_qubits);
    Ok(if in_c1(u, tol) {
        HierarchyLevel::C1
    } else if in_c2(u, &gens, tol) {
        HierarchyLevel::C2
    } else if in_c3(u, &gens, tol) {
        HierarchyLevel::C3
    } else {
        HierarchyLevel::Beyond
    })
}

/// The correction `U · Mᵀ · U†` that undoes the residual `U · M*` left by
/// single-qubit gate teleportation.
pub fn single_qubit_residual(u: &Matrix, m: &PauliString) -> Result<Matrix, PauliError> {
    if u.shape() != (2, 2) {
        return Err(PauliError::WrongWidth { expected: 1, got: u.row_qubits() });
    }
    if m.n_qubits() != 1 {
        return Err(PauliError::WrongWidth { expected: 1, got: m.n_qubits() });
    }
    Ok(&(u * &m.to_matrix().transpose()) * &u.dagger())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_examples() {
        let x = ps("X");
        let z = ps("Z");
        assert_eq!(x.multiply(&x).unwrap(), ps("I"));
        assert_eq!(z.multiply(&x).unwrap(), ps("-XZ"));
        let xz = ps("XZ");
        assert_eq!(xz.multiply(&xz).unwrap(), ps("-I"));
        assert!(x.multiply(&ps("X⊗X")).is_err());
    }

    #[test]
    fn text_format() {
        for s in ["-XZ⊗X", "iZ", "-iI⊗XZ", "X⊗I⊗Z"] {
            assert_eq!(ps(s).to_string(), s);
        }
        assert_eq!(ps("-XZxX"), ps("-XZ⊗X"));
        assert!("Y".parse::<PauliString>().is_err());
        assert!("X⊗".parse::<PauliString>().is_err());
    }

    #[test]
    fn cnot_conjugation_examples() {
        assert_eq!(conjugate_by_cnot(&ps("X⊗I")).unwrap(), ps("X⊗X"));
        assert_eq!(conjugate_by_cnot(&ps("Z⊗I")).unwrap(), ps("Z⊗I"));
        assert_eq!(conjugate_by_cnot(&ps("XZ⊗I")).unwrap(), ps("XZ⊗X"));
        assert!(conjugate_by_cnot(&ps("X")).is_err());
    }

    #[test]
    fn cz_conjugation_examples() {
        assert_eq!(conjugate_by_cz(&ps("X⊗I")).unwrap(), ps("X⊗Z"));
        assert_eq!(conjugate_by_cz(&ps("I⊗X")).unwrap(), ps("Z⊗X"));
        assert_eq!(conjugate_by_cz(&ps("Z⊗Z")).unwrap(), ps("Z⊗Z"));
    }

    #[test]
    fn symbolic_conjugation_matches_matrices() {
        for (gate, f) in [
            (TwoQubitGate::cnot(), conjugate_by_cnot as fn(&PauliString) -> _),
            (TwoQubitGate::Cz, conjugate_by_cz),
        ] {
            let g = gate.matrix();
            for p in PauliString::all(2) {
                for k in 0..4 {
                    let p = p.with_phase(k);
                    let expect = &(&g * &p.to_matrix()) * &g.dagger();
                    assert!(f(&p).unwrap().to_matrix().approx_eq(&expect, 0.0), "{gate} {p}");
                }
            }
        }
    }

    #[test]
    fn correction_table_examples() {
        let cnot = correction_table(CuKind::Cnot);
        let e = &cnot[&(Outcome::new(true, false), Outcome::new(false, false))];
        assert_eq!((e.q, e.p), (ps("X"), ps("X")));
        let e = &cnot[&(Outcome::new(false, true), Outcome::new(false, false))];
        assert_eq!((e.q, e.p), (ps("Z"), ps("I")));
        let cz = correction_table(CuKind::Cz);
        let e = &cz[&(Outcome::new(false, false), Outcome::new(true, false))];
        assert_eq!((e.q, e.p), (ps("Z"), ps("X")));
        assert_eq!(cnot.len(), 16);
    }

    #[test]
    fn from_matrix_recovers_phase() {
        let m = ps("-iXZ⊗Z").to_matrix();
        let (p, rest) = PauliString::from_matrix(&m, 1e-12).unwrap();
        assert_eq!(p, ps("-iXZ⊗Z"));
        assert_eq!(rest, c(1.0, 0.0));
        let t = NamedGate::T.matrix();
        let w = t.get(1, 1);
        let (p, rest) = PauliString::from_matrix(&ps("X").to_matrix().scale(w), 1e-12).unwrap();
        assert_eq!(p, ps("X"));
        assert!((rest - w).norm() < 1e-15);
        assert!(PauliString::from_matrix(&NamedGate::H.matrix(), 1e-12).is_none());
    }

    #[test]
    fn hierarchy_examples() {
        let lvl = |m: &Matrix, n| classify_hierarchy(m, n, DEFAULT_TOL).unwrap();
        assert_eq!(lvl(&NamedGate::X.matrix(), 1), HierarchyLevel::C1);
        assert_eq!(lvl(&NamedGate::H.matrix(), 1), HierarchyLevel::C2);
        assert_eq!(lvl(&NamedGate::T.matrix(), 1), HierarchyLevel::C3);
        assert_eq!(lvl(&TwoQubitGate::cnot().matrix(), 2), HierarchyLevel::C2);
        // sqrt(T) sits beyond the third level
        let rt = Matrix::new(
            2,
            2,
            vec![c(1., 0.), c(0., 0.), c(0., 0.), C64::from_polar(1.0, std::f64::consts::PI / 8.0)],
        )
        .unwrap();
        assert_eq!(lvl(&rt, 1), HierarchyLevel::Beyond);
        let bad = Matrix::from_real(2, 2, &[1., 1., 0., 1.]).unwrap();
        assert_eq!(classify_hierarchy(&bad, 1, DEFAULT_TOL), Err(PauliError::NotUnitary));
    }

    #[test]
    fn residual_examples() {
        let x = ps("X");
        let z = ps("Z");
        let r = single_qubit_residual(&Matrix::identity(2), &x).unwrap();
        assert_eq!(r, x.to_matrix());
        let r = single_qubit_residual(&NamedGate::H.matrix(), &x).unwrap();
        assert!(r.approx_eq(&z.to_matrix(), 1e-15));
        let r = single_qubit_residual(&NamedGate::T.matrix(), &z).unwrap();
        assert!(r.approx_eq(&z.to_matrix(), 1e-15));
    }

    #[test]
    fn dagger_and_tensor() {
        assert_eq!(ps("XZ").dagger(), ps("-XZ"));
        assert_eq!(ps("iX").dagger(), ps("-iX"));
        assert_eq!(ps("X").tensor(&ps("-Z")), ps("-X⊗Z"));
    }
}
