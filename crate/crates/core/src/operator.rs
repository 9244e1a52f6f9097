//! Dense complex matrices standing in for finite truncations of trace-class
//! and bounded operators, the trace pairing between them, and the
//! triangular and Hermitian splittings used throughout the crate.
//!
//! Index conventions are 0-based in code: `Matrix::unit(n, i, j)` is the
//! elementary matrix with a single 1 in row `i`, column `j`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Default tolerance for exact algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A square complex matrix with finite entries and dimension at least one.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    data: DMatrix<Complex64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            write!(f, "  [")?;
            for j in 0..self.dim() {
                let z = self.data[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl Matrix {
    /// Wraps an nalgebra matrix after checking squareness, size and finiteness.
    pub fn from_dmatrix(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { left: data.nrows(), right: data.ncols() });
        }
        if data.nrows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for j in 0..data.ncols() {
            for i in 0..data.nrows() {
                let z = data[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { data })
    }

    /// Internal constructor for results of arithmetic on valid matrices.
    /// Finiteness is not rechecked here; see [`Matrix::is_finite`].
    pub(crate) fn wrap(data: DMatrix<Complex64>) -> Self {
        debug_assert!(data.nrows() == data.ncols() && data.nrows() > 0);
        Self { data }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        Self::wrap(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        Self::wrap(DMatrix::identity(n, n))
    }

    /// Elementary matrix `E_ij` (0-based).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.data[(i, j)] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        Self::wrap(DMatrix::from_fn(n, n, f))
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| if i == j { values[i] } else { Complex64::new(0.0, 0.0) })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Builds a matrix from complex rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::BadShape { len: r.len(), expected: n });
            }
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Row-major real and imaginary parts, as used by the JSON schema.
    pub fn from_parts(dim: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let expected = dim * dim;
        if re.len() != expected {
            return Err(Error::BadShape { len: re.len(), expected });
        }
        if im.len() != expected {
            return Err(Error::BadShape { len: im.len(), expected });
        }
        Self::from_dmatrix(DMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(re[i * dim + j], im[i * dim + j])
        }))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.data
    }

    /// Returns a copy with entry `(i, j)` replaced.
    pub fn with_entry(&self, i: usize, j: usize, value: Complex64) -> Self {
        let mut data = self.data.clone();
        data[(i, j)] = value;
        Self { data }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::wrap(self.data.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::wrap(self.data.map(|z| z * s))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::wrap(self.data.map(|z| z * s))
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Matrix) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in axpy");
        Self::wrap(self.data.zip_map(&other.data, |a, b| a + b * s))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> Result<f64> {
        Ok(linalg::singular_values(self)?.first().copied().unwrap_or(0.0))
    }

    /// Extracts the square diagonal block `[start, start + len)`.
    pub fn block(&self, start: usize, len: usize) -> Self {
        Self::wrap(self.data.view((start, start), (len, len)).into_owned())
    }

    /// Block-diagonal assembly `diag(a, b)`.
    pub fn block_diag(a: &Matrix, b: &Matrix) -> Self {
        let (n1, n2) = (a.dim(), b.dim());
        let mut data = DMatrix::zeros(n1 + n2, n1 + n2);
        data.view_mut((0, 0), (n1, n1)).copy_from(&a.data);
        data.view_mut((n1, n1), (n2, n2)).copy_from(&b.data);
        Self::wrap(data)
    }

    /// Row-major real parts.
    pub fn re_parts(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n * n).map(|k| self.data[(k / n, k % n)].re).collect()
    }

    /// Row-major imaginary parts.
    pub fn im_parts(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n * n).map(|k| self.data[(k / n, k % n)].im).collect()
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in add");
        Matrix::wrap(&self.data + &rhs.data)
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in sub");
        Matrix::wrap(&self.data - &rhs.data)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in mul");
        Matrix::wrap(&self.data * &rhs.data)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix::wrap(-&self.data)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson { dim: self.dim(), re: self.re_parts(), im: self.im_parts() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        Matrix::from_parts(raw.dim, &raw.re, &raw.im).map_err(serde::de::Error::custom)
    }
}

fn check_dims(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// `[x, y] = xy - yx`.
pub fn commutator(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    check_dims(x, y)?;
    Ok(commutator_unchecked(x, y))
}

pub(crate) fn commutator_unchecked(x: &Matrix, y: &Matrix) -> Matrix {
    Matrix::wrap(&x.data * &y.data - &y.data * &x.data)
}

/// `<x, rho> = tr(x rho)`.
pub fn trace_pairing(x: &Matrix, rho: &Matrix) -> Result<Complex64> {
    check_dims(x, rho)?;
    Ok(pairing_unchecked(x, rho))
}

pub(crate) fn pairing_unchecked(x: &Matrix, rho: &Matrix) -> Complex64 {
    let n = x.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += x.data[(i, j)] * rho.data[(j, i)];
        }
    }
    acc
}

/// Sum of singular values.
pub fn trace_norm(rho: &Matrix) -> Result<f64> {
    Ok(linalg::singular_values(rho)?.iter().sum())
}

/// Keeps entries with row >= column (diagonal included).
pub fn project_lower(rho: &Matrix) -> Matrix {
    mask(rho, |i, j| i >= j)
}

/// Keeps entries with row < column (no diagonal); complement of [`project_lower`].
pub fn project_strictly_upper(rho: &Matrix) -> Matrix {
    mask(rho, |i, j| i < j)
}

/// Keeps entries with column >= row (diagonal included).
pub fn project_upper_plus(x: &Matrix) -> Matrix {
    mask(x, |i, j| j >= i)
}

/// Keeps entries with row > column (no diagonal); complement of [`project_upper_plus`].
pub fn project_strictly_lower(x: &Matrix) -> Matrix {
    mask(x, |i, j| i > j)
}

fn mask(m: &Matrix, keep: impl Fn(usize, usize) -> bool) -> Matrix {
    let zero = Complex64::new(0.0, 0.0);
    Matrix::from_fn(m.dim(), |i, j| if keep(i, j) { m.get(i, j) } else { zero })
}

/// `(rho - rho*) / 2`, the projection onto skew-Hermitian matrices.
pub fn skew_hermitian_part(rho: &Matrix) -> Matrix {
    (rho - &rho.adjoint()).scale_re(0.5)
}

/// `(rho + rho*) / 2`.
pub fn hermitian_part(rho: &Matrix) -> Matrix {
    (rho + &rho.adjoint()).scale_re(0.5)
}

/// Validation labels for the operator classes. Storage is always dense.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    TraceClass,
    Bounded,
    LowerTriangular,
    StrictlyUpper,
    Hermitian,
    SkewHermitian,
}

impl ClassTag {
    pub fn name(self) -> &'static str {
        match self {
            ClassTag::TraceClass => "trace-class",
            ClassTag::Bounded => "bounded",
            ClassTag::LowerTriangular => "lower-triangular",
            ClassTag::StrictlyUpper => "strictly-upper",
            ClassTag::Hermitian => "hermitian",
            ClassTag::SkewHermitian => "skew-hermitian",
        }
    }
}

/// True iff `m` satisfies the invariants of `tag` within `tol` (entrywise).
pub fn validate(tag: ClassTag, m: &Matrix, tol: f64) -> bool {
    if !m.is_finite() {
        return false;
    }
    let n = m.dim();
    let all = |pred: &dyn Fn(usize, usize) -> bool| {
        (0..n).all(|i| (0..n).all(|j| pred(i, j)))
    };
    match tag {
        // every finite matrix is both at finite truncation
        ClassTag::TraceClass | ClassTag::Bounded => true,
        ClassTag::LowerTriangular => all(&|i, j| i >= j || m.get(i, j).norm() <= tol),
        ClassTag::StrictlyUpper => all(&|i, j| i < j || m.get(i, j).norm() <= tol),
        ClassTag::Hermitian => all(&|i, j| (m.get(i, j) - m.get(j, i).conj()).norm() <= tol),
        ClassTag::SkewHermitian => all(&|i, j| (m.get(i, j) + m.get(j, i).conj()).norm() <= tol),
    }
}

pub(crate) fn require(tag: ClassTag, m: &Matrix, tol: f64) -> Result<()> {
    if validate(tag, m, tol) {
        Ok(())
    } else {
        Err(Error::TagViolation(tag.name()))
    }
}

/// An ordered family of mutually orthogonal self-adjoint projectors summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionOfUnity {
    projectors: Vec<Matrix>,
}

impl DecompositionOfUnity {
    pub fn new(projectors: Vec<Matrix>) -> Result<Self> {
        let d = Self { projectors };
        d.check(DEFAULT_TOL)?;
        Ok(d)
    }

    /// `{E_11, ..., E_NN}`.
    pub fn standard(n: usize) -> Self {
        Self { projectors: (0..n).map(|i| Matrix::unit(n, i, i)).collect() }
    }

    /// Coordinate blocks of the given sizes, in order.
    pub fn blocks(sizes: &[usize]) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        if n == 0 || sizes.contains(&0) {
            return Err(Error::InvalidDecomposition("block sizes must be positive".into()));
        }
        let mut start = 0;
        let mut projectors = Vec::with_capacity(sizes.len());
        for &s in sizes {
            let range = start..start + s;
            projectors.push(Matrix::from_fn(n, |i, j| {
                if i == j && range.contains(&i) {
                    c64(1.0, 0.0)
                } else {
                    c64(0.0, 0.0)
                }
            }));
            start += s;
        }
        Ok(Self { projectors })
    }

    /// Groups consecutive columns of a unitary into spectral projectors.
    pub fn from_unitary_columns(u: &Matrix, sizes: &[usize]) -> Result<Self> {
        let n = u.dim();
        if sizes.iter().sum::<usize>() != n || sizes.contains(&0) {
            return Err(Error::InvalidDecomposition("block sizes must partition the dimension".into()));
        }
        let mut start = 0;
        let mut projectors = Vec::with_capacity(sizes.len());
        for &s in sizes {
            let cols = u.as_dmatrix().columns(start, s).into_owned();
            projectors.push(Matrix::wrap(&cols * cols.adjoint()));
            start += s;
        }
        Self::new(projectors)
    }

    pub fn projectors(&self) -> &[Matrix] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, Matrix::dim)
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    fn check(&self, tol: f64) -> Result<()> {
        let first = self
            .projectors
            .first()
            .ok_or_else(|| Error::InvalidDecomposition("no projectors".into()))?;
        let n = first.dim();
        let mut sum = Matrix::zeros(n);
        for (a, p) in self.projectors.iter().enumerate() {
            if p.dim() != n {
                return Err(Error::DimensionMismatch { left: n, right: p.dim() });
            }
            if !validate(ClassTag::Hermitian, p, tol) {
                return Err(Error::InvalidDecomposition(format!("projector {a} is not self-adjoint")));
            }
            for (b, q) in self.projectors.iter().enumerate() {
                let prod = p * q;
                let expected = if a == b { p.clone() } else { Matrix::zeros(n) };
                if (&prod - &expected).max_abs() > tol {
                    return Err(Error::InvalidDecomposition(format!(
                        "P_{a} P_{b} differs from delta_ab P_{a}"
                    )));
                }
            }
            sum = &sum + p;
        }
        if (&sum - &Matrix::identity(n)).max_abs() > tol {
            return Err(Error::InvalidDecomposition("projectors do not sum to the identity".into()));
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for DecompositionOfUnity {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            projectors: Vec<Matrix>,
        }
        let raw = Raw::deserialize(deserializer)?;
        DecompositionOfUnity::new(raw.projectors).map_err(serde::de::Error::custom)
    }
}

/// True iff `d` is a valid decomposition of unity within `tol`.
pub fn validate_decomposition(d: &DecompositionOfUnity, tol: f64) -> bool {
    d.check(tol).is_ok()
}
