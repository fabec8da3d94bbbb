//! Dense complex linear algebra for small registers.
//!
//! Qubit ordering is big-endian throughout: in a Kronecker product the left
//! factor owns the most-significant index bits, so the leftmost wire of a
//! diagram is qubit 0.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Default tolerance for every numeric comparison in the crate.
pub const DEFAULT_TOL: f64 = 1e-10;

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("entry count {got} does not match shape {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, got: usize },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("targets {0:?} invalid for a {1}-qubit register")]
    BadTargets(Vec<usize>, usize),
}

pub type LinalgResult<T> = Result<T, LinalgError>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense row-major complex matrix with power-of-two dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> LinalgResult<Self> {
        for d in [rows, cols] {
            if !d.is_power_of_two() {
                return Err(LinalgError::NotPowerOfTwo(d));
            }
        }
        if data.len() != rows * cols {
            return Err(LinalgError::EntryCount { rows, cols, got: data.len() });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite(k));
        }
        Ok(Self { rows, cols, data })
    }

    /// Internal constructor for results of operations on already-valid matrices.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> LinalgResult<Self> {
        Self::new(rows, cols, data.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![C64::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for k in 0..dim {
            m.data[k * dim + k] = C64::new(1.0, 0.0);
        }
        m
    }

    /// A column vector.
    pub fn column(entries: Vec<C64>) -> LinalgResult<Self> {
        let n = entries.len();
        Self::new(n, 1, entries)
    }

    /// A 1x1 matrix.
    pub fn scalar(z: C64) -> Self {
        Self::from_parts(1, 1, vec![z])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.data[r * self.cols + col]
    }

    pub fn set(&mut self, r: usize, col: usize, z: C64) {
        self.data[r * self.cols + col] = z;
    }

    /// Number of qubits spanned by the row space.
    pub fn row_qubits(&self) -> usize {
        self.rows.trailing_zeros() as usize
    }

    pub fn col_qubits(&self) -> usize {
        self.cols.trailing_zeros() as usize
    }

    pub fn matmul(&self, other: &Matrix) -> LinalgResult<Matrix> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch(self.shape(), other.shape()));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (j, b) in row.iter().enumerate() {
                    out[i * other.cols + j] += a * b;
                }
            }
        }
        Ok(Matrix::from_parts(self.rows, other.cols, out))
    }

    /// Kronecker product; `self` owns the high-order index bits.
    pub fn tensor(&self, other: &Matrix) -> Matrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = vec![C64::new(0.0, 0.0); rows * cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k) * cols + j * other.cols + l] =
                            a * other.data[k * other.cols + l];
                    }
                }
            }
        }
        Matrix::from_parts(rows, cols, out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.data[i * self.cols + j]);
            }
        }
        Matrix::from_parts(self.cols, self.rows, out)
    }

    pub fn conjugate(&self) -> Matrix {
        Matrix::from_parts(self.rows, self.cols, self.data.iter().map(|z| z.conj()).collect())
    }

    pub fn dagger(&self) -> Matrix {
        self.transpose().conjugate()
    }

    pub fn scale(&self, z: C64) -> Matrix {
        Matrix::from_parts(self.rows, self.cols, self.data.iter().map(|x| x * z).collect())
    }

    pub fn add(&self, other: &Matrix) -> LinalgResult<Matrix> {
        if self.shape() != other.shape() {
            return Err(LinalgError::ShapeMismatch(self.shape(), other.shape()));
        }
        Ok(Matrix::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self.get(k, k)).sum()
    }

    /// Max-entry distance `‖self − other‖_max`.
    pub fn max_abs_diff(&self, other: &Matrix) -> LinalgResult<f64> {
        if self.shape() != other.shape() {
            return Err(LinalgError::ShapeMismatch(self.shape(), other.shape()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    /// Panics on shape mismatch; use [`Matrix::matmul`] for a fallible product.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("matrix shapes do not compose")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| fmt_complex(self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Formats as `re+imj`, the literal syntax accepted by [`parse_complex`].
pub fn fmt_complex(z: C64) -> String {
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    if im < 0.0 {
        format!("{re}-{}j", -im)
    } else {
        format!("{re}+{im}j")
    }
}

/// Parses `re`, `imj`, or `re±imj` (also accepts `i` as the imaginary unit suffix).
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let bytes = s.as_bytes();
    let last = *bytes.last()?;
    if last != b'j' && last != b'i' {
        return s.parse::<f64>().ok().filter(|x| x.is_finite()).map(|re| c(re, 0.0));
    }
    let body = &s[..s.len() - 1];
    // split at the last sign that is not an exponent sign or the leading sign
    let split = body
        .char_indices()
        .filter(|&(k, ch)| {
            (ch == '+' || ch == '-') && k > 0 && !matches!(body.as_bytes()[k - 1], b'e' | b'E')
        })
        .map(|(k, _)| k)
        .next_back();
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, parse_imag(&body[k..])?),
        None => (0.0, parse_imag(body)?),
    };
    (re.is_finite() && im.is_finite()).then(|| c(re, im))
}

fn parse_imag(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    }
}

/// Checks `a ≈ λ·b` for a unit-modulus `λ`, returning `λ` on success.
///
/// `λ` is read off the largest-magnitude entry of `b`. Two zero matrices are
/// equal with `λ = 1`.
pub fn equal_upto_phase(a: &Matrix, b: &Matrix, tol: f64) -> LinalgResult<Option<C64>> {
    if a.shape() != b.shape() {
        return Err(LinalgError::ShapeMismatch(a.shape(), b.shape()));
    }
    let (k, bk) = b
        .data
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(k, z)| (k, *z))
        .unwrap_or((0, C64::new(0.0, 0.0)));
    let lambda = if bk.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        let r = a.data[k] / bk;
        if r.norm() == 0.0 {
            return Ok(None);
        }
        r / r.norm()
    };
    let dev = a.max_abs_diff(&b.scale(lambda))?;
    Ok((dev <= tol).then_some(lambda))
}

pub fn is_unitary(m: &Matrix, tol: f64) -> LinalgResult<bool> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare(m.rows, m.cols));
    }
    let prod = m.matmul(&m.dagger())?;
    Ok(prod.max_abs_diff(&Matrix::identity(m.rows))? <= tol)
}

/// `g` acting on the listed qubits of an `n`-qubit register (big-endian),
/// identity elsewhere. `targets[0]` is the most significant qubit of `g`.
pub fn embed(g: &Matrix, targets: &[usize], n: usize) -> LinalgResult<Matrix> {
    let k = targets.len();
    if !g.is_square() || g.rows() != 1 << k {
        return Err(LinalgError::ShapeMismatch(g.shape(), (1 << k, 1 << k)));
    }
    let mut seen = 0usize;
    for &t in targets {
        if t >= n || seen >> t & 1 == 1 {
            return Err(LinalgError::BadTargets(targets.to_vec(), n));
        }
        seen |= 1 << t;
    }
    let dim = 1usize << n;
    let sub = |basis: usize| targets.iter().fold(0, |acc, &t| acc << 1 | (basis >> (n - 1 - t) & 1));
    let with_sub = |basis: usize, v: usize| {
        let mut b = basis;
        for (j, &t) in targets.iter().enumerate() {
            let bit = v >> (k - 1 - j) & 1;
            b = (b & !(1 << (n - 1 - t))) | bit << (n - 1 - t);
        }
        b
    };
    let mut out = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let v = sub(col);
        for r in 0..1usize << k {
            let z = g.get(r, v);
            if z != C64::new(0.0, 0.0) {
                out.set(with_sub(col, r), col, z);
            }
        }
    }
    Ok(out)
}

/// Exact normalization bookkeeping: `coeff · 2^(sqrt2_exp / 2)`.
///
/// Canonical form keeps `|coeff|` in `(2^(-1/2), 1]`; zero is stored as
/// `(0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scalar {
    coeff: C64,
    sqrt2_exp: i32,
}

const CANON_EPS: f64 = 1e-12;

impl Scalar {
    pub const ONE: Scalar = Scalar { coeff: C64 { re: 1.0, im: 0.0 }, sqrt2_exp: 0 };
    pub const ZERO: Scalar = Scalar { coeff: C64 { re: 0.0, im: 0.0 }, sqrt2_exp: 0 };

    pub fn new(coeff: C64, sqrt2_exp: i32) -> Self {
        Self { coeff, sqrt2_exp }.canonical()
    }

    /// `2^(k/2)`.
    pub fn sqrt2_pow(k: i32) -> Self {
        Self::new(C64::new(1.0, 0.0), k)
    }

    /// The factor contributed by one straightened cup–cap pair.
    pub fn half() -> Self {
        Self::sqrt2_pow(-2)
    }

    pub fn from_complex(z: C64) -> Self {
        Self::new(z, 0)
    }

    pub fn coeff(&self) -> C64 {
        self.coeff
    }

    pub fn sqrt2_exp(&self) -> i32 {
        self.sqrt2_exp
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == C64::new(0.0, 0.0)
    }

    pub fn value(&self) -> C64 {
        let half = 2f64.powi(self.sqrt2_exp.div_euclid(2));
        let odd = if self.sqrt2_exp.rem_euclid(2) == 1 { std::f64::consts::SQRT_2 } else { 1.0 };
        self.coeff * half * odd
    }

    fn canonical(mut self) -> Self {
        if !self.coeff.re.is_finite() || !self.coeff.im.is_finite() {
            panic!("non-finite scalar coefficient");
        }
        if self.coeff.norm() < 1e-300 {
            return Self::ZERO;
        }
        while self.coeff.norm() > 1.0 + CANON_EPS {
            self.coeff *= FRAC_1_SQRT_2;
            self.sqrt2_exp += 1;
        }
        while self.coeff.norm() <= FRAC_1_SQRT_2 + CANON_EPS {
            self.coeff *= std::f64::consts::SQRT_2;
            self.sqrt2_exp -= 1;
        }
        self.coeff = snap_unit(self.coeff);
        self
    }
}

/// Rounds values within round-off of an eighth root of unity onto it.
fn snap_unit(z: C64) -> C64 {
    if (z.norm() - 1.0).abs() > CANON_EPS {
        return z;
    }
    for k in 0..8 {
        let w = C64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_4);
        let w = C64::new(clean(w.re), clean(w.im));
        if (z - w).norm() <= CANON_EPS {
            return w;
        }
    }
    z
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

impl Mul for Scalar {
    type Output = Scalar;

    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar::new(self.coeff * rhs.coeff, self.sqrt2_exp + rhs.sqrt2_exp)
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Self::ONE
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^({}/2)", fmt_complex(self.coeff), self.sqrt2_exp)
    }
}
