//! The Toda lattice at truncation `N`: the canonical equations in relative
//! coordinates `x_k = q_k - q_(k+1)`, the Flaschka map onto lower-triangular
//! Lax matrices, the Lax flow for the coinduced bracket, and the conserved
//! traces `h_k = tr((rho + a)^k) / k`.
//!
//! The Hamiltonian on the Lax side is `h = tr((rho + a)^2) / 2`, so that
//! `h o flaschka` equals [`toda_hamiltonian`] exactly. Indices that fall
//! outside `1..N` contribute nothing (free ends).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{CsvColumns, Phase};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{
    c64, commutator_unchecked, pairing_unchecked, project_lower, project_upper_plus, validate, ClassTag, Matrix,
    DEFAULT_TOL,
};
use crate::poisson::{lp_bracket, BracketSpec, Observable};

/// Exponents above this are rejected as overflow.
pub const MAX_EXPONENT: f64 = 700.0;

/// Flaschka coordinates plus the lattice weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TodaState {
    #[serde(rename = "N")]
    pub n: usize,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// `(x', p')`.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaTangent {
    pub dx: Vec<f64>,
    pub dp: Vec<f64>,
}

/// `alpha_k = lambda_k = 2^-k`, `k = 1 .. N-1`.
pub fn geometric_weights(n: usize) -> Vec<f64> {
    (1..n).map(|k| 0.5f64.powi(k as i32)).collect()
}

impl TodaState {
    pub fn new(x: Vec<f64>, p: Vec<f64>, alpha: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        let s = Self { n: p.len(), x, p, alpha, lambda };
        s.validate()?;
        Ok(s)
    }

    /// State with the default geometric weights.
    pub fn with_geometric_weights(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let w = geometric_weights(p.len());
        Self::new(x, p, w.clone(), w)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::InvalidArgument("Toda lattice needs N >= 2".into()));
        }
        for (name, len, want) in [
            ("p", self.p.len(), n),
            ("x", self.x.len(), n - 1),
            ("alpha", self.alpha.len(), n - 1),
            ("lambda", self.lambda.len(), n - 1),
        ] {
            if len != want {
                return Err(Error::InvalidArgument(format!("{name} has length {len}, expected {want}")));
            }
        }
        let all = self.x.iter().chain(&self.p).chain(&self.alpha).chain(&self.lambda);
        if !all.clone().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite Toda coordinate".into()));
        }
        if self.lambda.contains(&0.0) {
            return Err(Error::InvalidArgument("lambda_k must be nonzero".into()));
        }
        let total: f64 = self.p.iter().sum();
        if total.abs() > DEFAULT_TOL {
            return Err(Error::InvalidArgument(format!("momenta sum to {total:e}, expected 0")));
        }
        Ok(())
    }

    fn check_exponents(&self) -> Result<()> {
        match self.x.iter().position(|&x| x > MAX_EXPONENT) {
            Some(k) => Err(Error::Overflow(format!("x_{} = {} exceeds {MAX_EXPONENT}", k + 1, self.x[k]))),
            None => Ok(()),
        }
    }

    /// `lambda_k e^(x_k)`, the subdiagonal of the Lax matrix.
    pub fn couplings(&self) -> Vec<f64> {
        self.x.iter().zip(&self.lambda).map(|(x, l)| l * x.exp()).collect()
    }
}

impl Phase for TodaState {
    type Tangent = TodaTangent;
    fn advance(&self, dir: &TodaTangent, h: f64) -> Self {
        let mut s = self.clone();
        s.x.iter_mut().zip(&dir.dx).for_each(|(x, d)| *x += h * d);
        s.p.iter_mut().zip(&dir.dp).for_each(|(p, d)| *p += h * d);
        s
    }
    fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.p).all(|v| v.is_finite())
    }
    fn deviation(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let dx = self.x.iter().zip(&other.x).map(|(a, b)| (a - b).abs());
        let dp = self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs());
        Ok(dx.chain(dp).fold(0.0, f64::max))
    }
}

impl CsvColumns for TodaState {
    fn column_names(&self) -> Vec<String> {
        (1..self.n)
            .map(|k| format!("x_{k}"))
            .chain((1..=self.n).map(|k| format!("p_{k}")))
            .collect()
    }
    fn column_values(&self) -> Vec<f64> {
        self.x.iter().chain(&self.p).copied().collect()
    }
}

/// `H = sum p_k^2 / 2 + sum alpha_k lambda_k e^(x_k)`.
pub fn toda_hamiltonian(s: &TodaState) -> Result<f64> {
    s.check_exponents()?;
    let kinetic: f64 = s.p.iter().map(|p| p * p).sum::<f64>() * 0.5;
    let potential: f64 = s.alpha.iter().zip(s.couplings()).map(|(a, c)| a * c).sum();
    Ok(kinetic + potential)
}

/// Canonical equations without the overflow guard; used inside integrators,
/// where an overflow surfaces as a non-finite state.
pub fn canonical_rhs(s: &TodaState) -> TodaTangent {
    let n = s.n;
    let force: Vec<f64> = s.alpha.iter().zip(s.couplings()).map(|(a, c)| a * c).collect();
    let dx = (0..n - 1).map(|k| s.p[k] - s.p[k + 1]).collect();
    let dp = (0..n)
        .map(|k| {
            let from_left = if k > 0 { force[k - 1] } else { 0.0 };
            let from_right = if k < n - 1 { force[k] } else { 0.0 };
            from_left - from_right
        })
        .collect();
    TodaTangent { dx, dp }
}

/// `x_k' = p_k - p_(k+1)`, `p_k' = alpha_(k-1) lambda_(k-1) e^(x_(k-1)) - alpha_k lambda_k e^(x_k)`.
pub fn canonical_field(s: &TodaState) -> Result<TodaTangent> {
    s.check_exponents()?;
    Ok(canonical_rhs(s))
}

/// Lower-triangular Lax matrix `rho_-` together with the fixed shift `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxPair {
    rho_minus: Matrix,
    a: Matrix,
    l: Matrix,
}

impl LaxPair {
    pub fn new(rho_minus: Matrix, a: Matrix) -> Result<Self> {
        if rho_minus.dim() != a.dim() {
            return Err(Error::DimensionMismatch { left: rho_minus.dim(), right: a.dim() });
        }
        if !validate(ClassTag::LowerTriangular, &rho_minus, DEFAULT_TOL) {
            return Err(Error::TagViolation("lower-triangular"));
        }
        let n = a.dim();
        for i in 0..n {
            for j in 0..n {
                if j != i + 1 && a.get(i, j) != c64(0.0, 0.0) {
                    return Err(Error::InvalidArgument("a must live on the first superdiagonal".into()));
                }
            }
        }
        let l = &rho_minus + &a;
        Ok(Self { rho_minus, a, l })
    }

    /// `a = sum alpha_k E_(k, k+1)`.
    pub fn shift_from_weights(alpha: &[f64]) -> Matrix {
        let n = alpha.len() + 1;
        Matrix::from_fn(n, |i, j| if j == i + 1 { c64(alpha[i], 0.0) } else { c64(0.0, 0.0) })
    }

    pub fn rho_minus(&self) -> &Matrix {
        &self.rho_minus
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    /// `L = rho_- + a`.
    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

impl Phase for LaxPair {
    type Tangent = Matrix;
    fn advance(&self, dir: &Matrix, h: f64) -> Self {
        let rho_minus = self.rho_minus.axpy(h, dir);
        let l = &rho_minus + &self.a;
        Self { rho_minus, a: self.a.clone(), l }
    }
    fn is_finite(&self) -> bool {
        self.rho_minus.is_finite()
    }
    fn deviation(&self, other: &Self) -> Result<f64> {
        (&self.l - &other.l).op_norm()
    }
}

impl CsvColumns for LaxPair {
    fn column_names(&self) -> Vec<String> {
        self.rho_minus.column_names()
    }
    fn column_values(&self) -> Vec<f64> {
        self.rho_minus.column_values()
    }
}

/// `J(x, p) = diag(p) + sum lambda_k e^(x_k) E_(k+1, k)`, with `a` built from `alpha`.
pub fn flaschka(s: &TodaState) -> Result<LaxPair> {
    s.check_exponents()?;
    let c = s.couplings();
    let rho_minus = Matrix::from_fn(s.n, |i, j| {
        if i == j {
            c64(s.p[i], 0.0)
        } else if i == j + 1 {
            c64(c[j], 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    LaxPair::new(rho_minus, LaxPair::shift_from_weights(&s.alpha))
}

/// Recovers `(x, p)` from a Lax matrix: `x_k = log(rho_(k+1,k) / lambda_k)`.
pub fn inverse_flaschka(lp: &LaxPair, alpha: &[f64], lambda: &[f64]) -> Result<TodaState> {
    let n = lp.dim();
    let rho = lp.rho_minus();
    let p = (0..n).map(|k| rho.get(k, k).re).collect();
    let mut x = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let ratio = rho.get(k + 1, k).re / lambda[k];
        if !(ratio > 0.0) {
            return Err(Error::InvalidArgument(format!("subdiagonal entry {k} has the wrong sign")));
        }
        x.push(ratio.ln());
    }
    TodaState::new(x, p, alpha.to_vec(), lambda.to_vec())
}

/// Tangent map of the Flaschka transformation:
/// `TJ(x', p') = diag(p') + sum lambda_k e^(x_k) x_k' E_(k+1, k)`.
pub fn flaschka_tangent(s: &TodaState, v: &TodaTangent) -> Matrix {
    let c = s.couplings();
    Matrix::from_fn(s.n, |i, j| {
        if i == j {
            c64(v.dp[i], 0.0)
        } else if i == j + 1 {
            c64(c[j] * v.dx[j], 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// `h_k(rho_-) = tr((rho_- + a)^k) / k` on the lower-triangular space,
/// gradient `pi_upper_plus((rho_- + a)^(k-1))`.
pub fn toda_hk(lp: &LaxPair, k: u32) -> Result<Observable> {
    if k == 0 {
        return Err(Error::InvalidArgument("h_k needs k >= 1".into()));
    }
    let (a1, a2) = (lp.a.clone(), lp.a.clone());
    Ok(Observable::analytic(
        lp.dim(),
        move |rho| (rho + &a1).pow(k).trace() / k as f64,
        move |rho| project_upper_plus(&(rho + &a2).pow(k - 1)),
    ))
}

/// `pi_lower([rho_-, pi_upper_plus(L)])`, the Hamiltonian field of `tr(L^2)/2`.
pub fn lax_field(lp: &LaxPair) -> Matrix {
    project_lower(&commutator_unchecked(&lp.rho_minus, &project_upper_plus(&lp.l)))
}

/// The opposite composite order `pi_lower([pi_upper_plus(L), rho_-])`; equals `-lax_field`.
pub fn lax_field_reversed(lp: &LaxPair) -> Matrix {
    project_lower(&commutator_unchecked(&project_upper_plus(&lp.l), &lp.rho_minus))
}

/// `|| TJ(canonical_field(s)) - lax_field(flaschka(s)) ||` in operator norm.
pub fn intertwining_defect(s: &TodaState) -> Result<f64> {
    let up = flaschka_tangent(s, &canonical_field(s)?);
    let down = lax_field(&flaschka(s)?);
    (&up - &down).op_norm()
}

/// `|{h_j, h_k}(rho_-)|` for the coinduced lower-triangular bracket.
pub fn involution_defect(lp: &LaxPair, j: u32, k: u32) -> Result<f64> {
    let hj = toda_hk(lp, j)?;
    let hk = toda_hk(lp, k)?;
    Ok(lp_bracket(&BracketSpec::LowerCoinduced, &hj, &hk, &lp.rho_minus)?.norm())
}

/// `|tr(a [x, y])|`.
pub fn trace_condition_defect(a: &Matrix, x: &Matrix, y: &Matrix) -> f64 {
    pairing_unchecked(a, &commutator_unchecked(x, y)).norm()
}

/// Spectrum of `L`, sorted. When every product `alpha_k * L_(k+1,k)` is
/// positive the tridiagonal `L` is diagonally similar to a real symmetric
/// matrix and that form is diagonalised instead.
pub fn lax_spectrum(lp: &LaxPair) -> Result<Vec<Complex64>> {
    let n = lp.dim();
    let l = &lp.l;
    let tridiagonal = (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || l.get(i, j) == c64(0.0, 0.0)));
    let real = (0..n).all(|i| (0..n).all(|j| l.get(i, j).im == 0.0));
    let products: Vec<f64> = (0..n - 1).map(|k| (l.get(k, k + 1) * l.get(k + 1, k)).re).collect();
    if tridiagonal && real && products.iter().all(|&p| p > 0.0) {
        let sym = Matrix::from_fn(n, |i, j| {
            if i == j {
                l.get(i, i)
            } else if i.abs_diff(j) == 1 {
                c64(products[i.min(j)].sqrt(), 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        return Ok(linalg::hermitian_eigenvalues(&sym)?.into_iter().map(|v| c64(v, 0.0)).collect());
    }
    linalg::eigenvalues(l)
}
