//! Gate expressions attached to diagram dots and two-qubit boxes.
//!
//! A [`GateExpr`] is a product of named gates (optionally daggered) and
//! literal 2x2 matrices. Every named gate is a symmetric matrix, so
//! transposition only reverses the product and conjugation only toggles
//! daggers; both stay symbolic.
//!
//! Text syntax: factors joined by `.` (matrix product, rightmost acts
//! first), postfix `'` for dagger, `^T` for transpose, `^*` for complex
//! conjugate, parentheses for grouping, and `mat2(a,b,c,d)` for a row-major
//! literal with `re±imj` entries. `I` is the empty product.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{c, fmt_complex, is_unitary, parse_complex, Matrix, DEFAULT_TOL, FRAC_1_SQRT_2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("unknown gate name `{0}` (expected one of I, X, Z, H, S, T, mat2(..))")]
    UnknownName(String),
    #[error("syntax error in gate expression at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("gate expression `{0}` is not unitary")]
    NotUnitary(String),
    #[error("unknown two-qubit gate `{0}` (expected cnot, cnot(1), cz or cu(<expr>))")]
    UnknownTwoQubit(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedGate {
    I,
    X,
    Z,
    H,
    S,
    T,
}

impl NamedGate {
    pub const ALL: [NamedGate; 6] =
        [NamedGate::I, NamedGate::X, NamedGate::Z, NamedGate::H, NamedGate::S, NamedGate::T];

    pub fn matrix(self) -> Matrix {
        let s = FRAC_1_SQRT_2;
        let data = match self {
            NamedGate::I => [c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
            NamedGate::X => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
            NamedGate::Z => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
            NamedGate::H => [c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)],
            NamedGate::S => [c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)],
            NamedGate::T => [c(1., 0.), c(0., 0.), c(0., 0.), c(s, s)],
        };
        Matrix::from_parts(2, 2, data.to_vec())
    }

    /// Hermitian gates are their own dagger.
    pub fn is_hermitian(self) -> bool {
        !matches!(self, NamedGate::S | NamedGate::T)
    }

    fn symbol(self) -> &'static str {
        match self {
            NamedGate::I => "I",
            NamedGate::X => "X",
            NamedGate::Z => "Z",
            NamedGate::H => "H",
            NamedGate::S => "S",
            NamedGate::T => "T",
        }
    }

    fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "I" => NamedGate::I,
            "X" => NamedGate::X,
            "Z" => NamedGate::Z,
            "H" => NamedGate::H,
            "S" => NamedGate::S,
            "T" => NamedGate::T,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Named { gate: NamedGate, dagger: bool },
    Literal([C64; 4]),
}

impl Factor {
    fn matrix(&self) -> Matrix {
        match self {
            Factor::Named { gate, dagger } => {
                let m = gate.matrix();
                if *dagger {
                    m.dagger()
                } else {
                    m
                }
            }
            Factor::Literal(d) => Matrix::from_parts(2, 2, d.to_vec()),
        }
    }

    fn transpose(&self) -> Factor {
        match self {
            Factor::Named { .. } => self.clone(),
            Factor::Literal([a, b, cc, d]) => Factor::Literal([*a, *cc, *b, *d]),
        }
    }

    fn conj(&self) -> Factor {
        match self {
            Factor::Named { gate, dagger } => {
                Factor::Named { gate: *gate, dagger: !*dagger && !gate.is_hermitian() }
            }
            Factor::Literal(d) => Factor::Literal(d.map(|z| z.conj())),
        }
    }

    fn is_identity(&self) -> bool {
        matches!(self, Factor::Named { gate: NamedGate::I, .. })
    }

    fn cancels(&self, next: &Factor) -> bool {
        match (self, next) {
            (Factor::Named { gate: g1, dagger: d1 }, Factor::Named { gate: g2, dagger: d2 }) => {
                g1 == g2 && (d1 != d2 || g1.is_hermitian())
            }
            _ => false,
        }
    }
}

/// A product `f_0 · f_1 · … · f_{n-1}` of single-qubit factors.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GateExpr {
    factors: Vec<Factor>,
}

impl GateExpr {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn named(gate: NamedGate) -> Self {
        if gate == NamedGate::I {
            return Self::identity();
        }
        Self { factors: vec![Factor::Named { gate, dagger: false }] }
    }

    pub fn literal(m: &Matrix) -> Result<Self, GateError> {
        let data: [C64; 4] = m
            .data()
            .try_into()
            .map_err(|_| GateError::Syntax { col: 0, msg: "literal must be 2x2".into() })?;
        let e = Self { factors: vec![Factor::Literal(data)] };
        if !is_unitary(m, DEFAULT_TOL).unwrap_or(false) {
            return Err(GateError::NotUnitary(e.to_string()));
        }
        Ok(e)
    }

    /// `X^x Z^z` in the canonical X-before-Z order.
    pub fn pauli(x: bool, z: bool) -> Self {
        let mut f = Vec::new();
        if x {
            f.push(Factor::Named { gate: NamedGate::X, dagger: false });
        }
        if z {
            f.push(Factor::Named { gate: NamedGate::Z, dagger: false });
        }
        Self { factors: f }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn is_identity_expr(&self) -> bool {
        self.factors.iter().all(Factor::is_identity)
    }

    pub fn matrix(&self) -> Matrix {
        self.factors.iter().fold(Matrix::identity(2), |acc, f| &acc * &f.matrix())
    }

    /// `self · other` (other acts first).
    pub fn then_after(&self, other: &GateExpr) -> GateExpr {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        GateExpr { factors }
    }

    pub fn transpose(&self) -> GateExpr {
        GateExpr { factors: self.factors.iter().rev().map(Factor::transpose).collect() }
    }

    pub fn conj(&self) -> GateExpr {
        GateExpr { factors: self.factors.iter().map(Factor::conj).collect() }
    }

    pub fn dagger(&self) -> GateExpr {
        self.transpose().conj()
    }

    /// Drops identities and cancels adjacent `g·g†` pairs. Exact.
    pub fn simplified(&self) -> GateExpr {
        let mut out: Vec<Factor> = Vec::new();
        for f in self.factors.iter().filter(|f| !f.is_identity()) {
            if out.last().is_some_and(|last| last.cancels(f)) {
                out.pop();
            } else {
                out.push(f.clone());
            }
        }
        GateExpr { factors: out }
    }

    pub fn is_unitary(&self) -> bool {
        is_unitary(&self.matrix(), DEFAULT_TOL).unwrap_or(false)
    }
}

impl fmt::Display for GateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("I");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|fac| match fac {
                Factor::Named { gate, dagger } => {
                    format!("{}{}", gate.symbol(), if *dagger { "'" } else { "" })
                }
                Factor::Literal(d) => {
                    let e: Vec<String> = d.iter().map(|z| fmt_complex(*z)).collect();
                    format!("mat2({})", e.join(","))
                }
            })
            .collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for GateExpr {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, GateError> {
        let mut p = ExprParser { src: s, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        if !e.is_unitary() {
            return Err(GateError::NotUnitary(s.to_string()));
        }
        Ok(e)
    }
}

struct ExprParser<'a> {
    src: &'a str,
    pos: usize,
}

impl ExprParser<'_> {
    fn err(&self, msg: &str) -> GateError {
        GateError::Syntax { col: self.pos + 1, msg: msg.to_string() }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<GateExpr, GateError> {
        let mut e = self.term()?;
        while self.eat(".") {
            let t = self.term()?;
            e = e.then_after(&t);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<GateExpr, GateError> {
        let mut e = self.atom()?;
        loop {
            if self.eat("'") {
                e = e.dagger();
            } else if self.eat("^T") {
                e = e.transpose();
            } else if self.eat("^*") {
                e = e.conj();
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> Result<GateExpr, GateError> {
        self.skip_ws();
        if self.eat("(") {
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(self.err("expected `)`"));
            }
            return Ok(e);
        }
        if self.eat("mat2(") {
            let close = self.rest().find(')').ok_or_else(|| self.err("unterminated mat2("))?;
            let body = &self.rest()[..close];
            let entries: Vec<&str> = body.split(',').collect();
            if entries.len() != 4 {
                return Err(self.err("mat2 takes four entries"));
            }
            let mut d = [C64::new(0.0, 0.0); 4];
            for (k, tok) in entries.iter().enumerate() {
                d[k] = parse_complex(tok)
                    .ok_or_else(|| self.err(&format!("bad complex literal `{}`", tok.trim())))?;
            }
            self.pos += close + 1;
            return Ok(GateExpr { factors: vec![Factor::Literal(d)] });
        }
        let ident: String =
            self.rest().chars().take_while(|ch| ch.is_ascii_alphanumeric() || *ch == '_').collect();
        if ident.is_empty() {
            return Err(self.err("expected a gate name"));
        }
        let g = NamedGate::from_symbol(&ident).ok_or(GateError::UnknownName(ident.clone()))?;
        self.pos += ident.len();
        Ok(GateExpr::named(g))
    }
}

/// Two-qubit boxes. Slot 0 is the left (most-significant) wire.
#[derive(Clone, Debug, PartialEq)]
pub enum TwoQubitGate {
    Cnot { control: usize },
    Cz,
    /// Control on slot 0, `u` applied to slot 1.
    Cu(GateExpr),
}

impl TwoQubitGate {
    pub fn cnot() -> Self {
        TwoQubitGate::Cnot { control: 0 }
    }

    pub fn matrix(&self) -> Matrix {
        match self {
            TwoQubitGate::Cnot { control: 0 } => controlled(&NamedGate::X.matrix()),
            TwoQubitGate::Cnot { .. } => {
                let mut m = Matrix::zeros(4, 4);
                for (r, col) in [(0, 0), (3, 1), (2, 2), (1, 3)] {
                    m.set(r, col, c(1.0, 0.0));
                }
                m
            }
            TwoQubitGate::Cz => controlled(&NamedGate::Z.matrix()),
            TwoQubitGate::Cu(u) => controlled(&u.matrix()),
        }
    }

    /// True for the boxes whose conjugation action on Paulis is tracked symbolically.
    pub fn is_clifford_box(&self) -> bool {
        matches!(self, TwoQubitGate::Cnot { .. } | TwoQubitGate::Cz)
    }
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ u`.
pub fn controlled(u: &Matrix) -> Matrix {
    let mut m = Matrix::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            m.set(2 + i, 2 + j, u.get(i, j));
        }
    }
    m
}

impl fmt::Display for TwoQubitGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwoQubitGate::Cnot { control: 0 } => f.write_str("cnot"),
            TwoQubitGate::Cnot { control } => write!(f, "cnot({control})"),
            TwoQubitGate::Cz => f.write_str("cz"),
            TwoQubitGate::Cu(u) => write!(f, "cu({u})"),
        }
    }
}

impl FromStr for TwoQubitGate {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, GateError> {
        let t = s.trim();
        match t {
            "cnot" | "cnot(0)" => return Ok(TwoQubitGate::cnot()),
            "cnot(1)" => return Ok(TwoQubitGate::Cnot { control: 1 }),
            "cz" => return Ok(TwoQubitGate::Cz),
            _ => {}
        }
        if let Some(inner) = t.strip_prefix("cu(").and_then(|r| r.strip_suffix(')')) {
            return Ok(TwoQubitGate::Cu(inner.parse()?));
        }
        Err(GateError::UnknownTwoQubit(t.to_string()))
    }
}
