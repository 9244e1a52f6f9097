//! Dense kernels: singular values, spectra, the matrix exponential,
//! inversion and null spaces. Thin wrappers over nalgebra except for the
//! exponential, which is a fixed-order Pade scaling-and-squaring.

use nalgebra::{DMatrix, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::Matrix;

const MAX_ITER: usize = 10_000;

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.as_dmatrix().clone(), false, false, f64::EPSILON, MAX_ITER)
        .ok_or(Error::SvdNoConvergence)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let h = (m.as_dmatrix() + m.as_dmatrix().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, MAX_ITER).ok_or(Error::EigenNoConvergence)?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// Eigenvalues of a general complex matrix via complex Schur form, sorted
/// lexicographically by (real, imaginary).
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(m.as_dmatrix().clone(), f64::EPSILON, MAX_ITER)
        .ok_or(Error::EigenNoConvergence)?;
    let (_, t) = schur.unpack();
    let mut v: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(v)
}

/// Ratio of extreme singular values; infinite for singular input.
pub fn condition_number(m: &Matrix) -> Result<f64> {
    let s = singular_values(m)?;
    let smax = s[0];
    let smin = *s.last().expect("dimension >= 1");
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

pub const MAX_CONDITION: f64 = 1e12;

/// Inverse, refusing matrices with condition estimate above [`MAX_CONDITION`].
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    let cond = condition_number(m)?;
    if !(cond < MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let inv = m.as_dmatrix().clone().try_inverse().ok_or(Error::IllConditioned(cond))?;
    Matrix::from_dmatrix(inv)
}

/// Numerical rank: singular values above `rel_tol` times the largest.
pub fn rank_of(m: &DMatrix<Complex64>, rel_tol: f64) -> Result<usize> {
    let s = singular_values_of(m)?;
    let smax = s.iter().copied().fold(0.0, f64::max);
    Ok(s.iter().filter(|&&v| smax > 0.0 && v > rel_tol * smax).count())
}

/// Numerical rank: singular values above the absolute `threshold`.
pub fn rank_above(m: &DMatrix<Complex64>, threshold: f64) -> Result<usize> {
    Ok(singular_values_of(m)?.iter().filter(|&&v| v > threshold).count())
}

fn singular_values_of(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, MAX_ITER).ok_or(Error::SvdNoConvergence)?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Orthonormal basis of the right null space, as columns: right singular
/// vectors with singular value at most `rel_tol` times the largest.
pub fn null_space(m: &DMatrix<Complex64>, rel_tol: f64) -> Result<Vec<Vec<Complex64>>> {
    null_space_with(m, |s, smax| smax == 0.0 || s <= rel_tol * smax)
}

/// Null space with an absolute cutoff on the singular values.
pub fn null_space_below(m: &DMatrix<Complex64>, threshold: f64) -> Result<Vec<Vec<Complex64>>> {
    null_space_with(m, |s, _| s <= threshold)
}

fn null_space_with(m: &DMatrix<Complex64>, is_null: impl Fn(f64, f64) -> bool) -> Result<Vec<Vec<Complex64>>> {
    let cols = m.ncols();
    // pad to a square system so V is complete
    let rows = m.nrows().max(cols);
    let mut a = DMatrix::zeros(rows, cols);
    a.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = SVD::try_new(a, false, true, f64::EPSILON, MAX_ITER).ok_or(Error::SvdNoConvergence)?;
    let v_t = svd.v_t.ok_or(Error::SvdNoConvergence)?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if is_null(s, smax) {
            basis.push(v_t.row(k).iter().map(|z| z.conj()).collect());
        }
    }
    Ok(basis)
}

/// Coefficients `c_0 .. c_N` of `det(t I - m) = sum c_k t^k` (monic, `c_N = 1`),
/// by the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(m: &Matrix) -> Vec<Complex64> {
    let n = m.dim();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let ident = Matrix::identity(n);
    let mut mk = Matrix::zeros(n);
    for k in 1..=n {
        mk = &(m * &mk) + &ident.scale(coeffs[n + 1 - k]);
        coeffs[n - k] = -(m * &mk).trace() / k as f64;
    }
    coeffs
}

// Pade(13) coefficients for the exponential.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    let a = m.as_dmatrix();
    let n = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::Overflow("non-finite exponent".into()));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if s > 1000 {
        return Err(Error::Overflow(format!("exponent norm {norm:e} too large")));
    }
    let a = a * Complex64::new(0.5f64.powi(s), 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Overflow("singular Pade denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Matrix::from_dmatrix(r).map_err(|_| Error::Overflow("exponential overflowed".into()))
}
