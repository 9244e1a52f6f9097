//! Coadjoint orbits in matrix models: the action `rho -> g rho g^-1`,
//! characteristic subspaces, and pointwise evaluation of the KKS two-form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{commutator, commutator_unchecked, pairing_unchecked, Matrix};

/// Relative singular-value threshold for ranks and null spaces.
pub const RANK_TOL: f64 = 1e-10;
/// Precondition bound on `||[x - x', rho]||` for the well-definedness check.
pub const ISOTROPY_TOL: f64 = 1e-10;

/// A point `g rho g^-1` on the coadjoint orbit through `rho`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    base: Matrix,
    group_element: Matrix,
    inverse: Matrix,
    current: Matrix,
}

impl OrbitPoint {
    pub fn new(g: Matrix, rho: Matrix) -> Result<Self> {
        if g.dim() != rho.dim() {
            return Err(Error::DimensionMismatch { left: g.dim(), right: rho.dim() });
        }
        let inverse = linalg::inverse(&g)?;
        let current = &(&g * &rho) * &inverse;
        Ok(Self { base: rho, group_element: g, inverse, current })
    }

    pub fn base(&self) -> &Matrix {
        &self.base
    }

    pub fn group_element(&self) -> &Matrix {
        &self.group_element
    }

    pub fn current(&self) -> &Matrix {
        &self.current
    }

    /// Pushes a base-point tangent generator `x` to the current point: `g x g^-1`.
    pub fn transport(&self, x: &Matrix) -> Matrix {
        &(&self.group_element * x) * &self.inverse
    }

    /// `max(||g g^-1 - I||, ||current - g rho g^-1||)` recomputed from scratch.
    pub fn consistency_defect(&self) -> f64 {
        let n = self.base.dim();
        let id_err = (&(&self.group_element * &self.inverse) - &Matrix::identity(n)).max_abs();
        let recomputed = &(&self.group_element * &self.base) * &self.inverse;
        id_err.max((&recomputed - &self.current).max_abs())
    }
}

/// `Ad*_{g^-1} rho = g rho g^-1`. Rejects singular or ill-conditioned `g`.
pub fn coadjoint_act(g: &Matrix, rho: &Matrix) -> Result<Matrix> {
    Ok(OrbitPoint::new(g.clone(), rho.clone())?.current)
}

/// Orbit tangent vector `[x, rho]`.
pub fn tangent_vector(x: &Matrix, rho: &Matrix) -> Result<Matrix> {
    commutator(x, rho)
}

/// KKS form at `rho` on the tangent vectors `[x, rho]`, `[y, rho]`: `tr(rho [x, y])`.
pub fn kks_eval(rho: &Matrix, x: &Matrix, y: &Matrix) -> Result<Complex64> {
    let c = commutator(x, y)?;
    if c.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: c.dim() });
    }
    Ok(pairing_unchecked(rho, &c))
}

/// `|kks(rho, x, y) - kks(rho, x', y)|` for generators `x`, `x'` of the same tangent vector.
pub fn kks_welldefined_defect(rho: &Matrix, x: &Matrix, x_alt: &Matrix, y: &Matrix) -> Result<f64> {
    let gap = commutator(&(x - x_alt), rho)?.max_abs();
    if gap > ISOTROPY_TOL * rho.max_abs().max(1.0) {
        return Err(Error::Precondition(format!("[x - x', rho] has size {gap:e}")));
    }
    Ok((kks_eval(rho, x, y)? - kks_eval(rho, x_alt, y)?).norm())
}

/// Matrix of `x -> [x, rho]` on the elementary basis, columns indexed row-major by `(i, j)`.
fn adjoint_action_matrix(rho: &Matrix) -> DMatrix<Complex64> {
    let n = rho.dim();
    let mut a = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let img = commutator_unchecked(&Matrix::unit(n, i, j), rho);
            for p in 0..n {
                for q in 0..n {
                    a[(p * n + q, i * n + j)] = img.get(p, q);
                }
            }
        }
    }
    a
}

/// Singular-value cutoff for maps built from `rho`. Relative to `rho` itself,
/// not to the map, so a scalar state with round-off has rank zero.
fn cutoff(rho: &Matrix) -> f64 {
    RANK_TOL * rho.frobenius_norm()
}

/// Dimension of the characteristic subspace `{[x, rho]}`, i.e. `N^2 - dim(commutant)`.
pub fn characteristic_rank(rho: &Matrix) -> Result<usize> {
    linalg::rank_above(&adjoint_action_matrix(rho), cutoff(rho))
}

/// Basis of generators `x` with `kks(rho, x, y) = 0` for every `y`, found as the
/// null space of `x -> (kks(rho, x, E_ij))_ij`.
pub fn kks_null_directions(rho: &Matrix) -> Result<Vec<Matrix>> {
    let n = rho.dim();
    let mut a = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let x = Matrix::unit(n, i, j);
            for p in 0..n {
                for q in 0..n {
                    a[(p * n + q, i * n + j)] = kks_eval(rho, &x, &Matrix::unit(n, p, q))?;
                }
            }
        }
    }
    let basis = linalg::null_space_below(&a, cutoff(rho))?;
    Ok(basis
        .into_iter()
        .map(|v| Matrix::from_fn(n, |i, j| v[i * n + j]))
        .collect())
}

/// Pure state `|psi><psi| / <psi|psi>`.
pub fn rank_one_state(psi: &[Complex64]) -> Result<Matrix> {
    if psi.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if norm_sqr == 0.0 {
        return Err(Error::InvalidArgument("zero vector".into()));
    }
    Matrix::from_dmatrix(DMatrix::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj() / norm_sqr))
}
