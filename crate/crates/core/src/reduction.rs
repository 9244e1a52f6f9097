//! Quantum reduction projectors on the predual: von Neumann measurement,
//! block lower-triangularisation and finite-group averaging, together with
//! their duals and the algebraic checks that make them Poisson projections.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{trace_norm, validate, ClassTag, DecompositionOfUnity, Matrix, DEFAULT_TOL};
use crate::poisson::LinearMap;

/// Slack for the trace-norm contraction test.
pub const CONTRACTION_SLACK: f64 = 1e-10;
/// Eigenvalue floor for positivity.
pub const PSD_FLOOR: f64 = -1e-10;
/// Tolerance for group closure under products and inverses.
pub const GROUP_CLOSURE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReductionKind {
    /// `R(rho) = sum P_n rho P_n`.
    Measurement { decomposition: DecompositionOfUnity },
    /// `R(rho) = sum p_n rho q_n` with `q_n = sum_{m <= n} p_m`.
    LowerTriangularize { decomposition: DecompositionOfUnity },
    /// `R(rho) = |G|^-1 sum U rho U*` over a finite unitary group.
    GroupAverage { unitaries: Vec<Matrix> },
}

/// A validated reduction projector.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ReductionOp {
    kind: ReductionKind,
    #[serde(skip)]
    dim: usize,
    #[serde(skip)]
    partial_sums: Vec<Matrix>,
}

impl ReductionOp {
    pub fn new(kind: ReductionKind) -> Result<Self> {
        let (dim, partial_sums) = match &kind {
            ReductionKind::Measurement { decomposition } => (decomposition.dim(), Vec::new()),
            ReductionKind::LowerTriangularize { decomposition } => {
                let mut acc = Matrix::zeros(decomposition.dim());
                let sums = decomposition
                    .projectors()
                    .iter()
                    .map(|p| {
                        acc = &acc + p;
                        acc.clone()
                    })
                    .collect();
                (decomposition.dim(), sums)
            }
            ReductionKind::GroupAverage { unitaries } => (validate_group(unitaries)?, Vec::new()),
        };
        Ok(Self { kind, dim, partial_sums })
    }

    pub fn measurement(d: DecompositionOfUnity) -> Self {
        Self::new(ReductionKind::Measurement { decomposition: d }).expect("decomposition already validated")
    }

    pub fn lower_triangularize(d: DecompositionOfUnity) -> Self {
        Self::new(ReductionKind::LowerTriangularize { decomposition: d }).expect("decomposition already validated")
    }

    pub fn group_average(unitaries: Vec<Matrix>) -> Result<Self> {
        Self::new(ReductionKind::GroupAverage { unitaries })
    }

    pub fn kind(&self) -> &ReductionKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, m: &Matrix) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: m.dim() });
        }
        Ok(())
    }

    pub fn apply(&self, rho: &Matrix) -> Result<Matrix> {
        self.check_dim(rho)?;
        Ok(self.apply_unchecked(rho))
    }

    pub fn apply_dual(&self, x: &Matrix) -> Result<Matrix> {
        self.check_dim(x)?;
        Ok(self.dual_unchecked(x))
    }

    fn apply_unchecked(&self, rho: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim);
        match &self.kind {
            ReductionKind::Measurement { decomposition } => {
                for p in decomposition.projectors() {
                    out = &out + &(&(p * rho) * p);
                }
            }
            ReductionKind::LowerTriangularize { decomposition } => {
                for (p, q) in decomposition.projectors().iter().zip(&self.partial_sums) {
                    out = &out + &(&(p * rho) * q);
                }
            }
            ReductionKind::GroupAverage { unitaries } => {
                for u in unitaries {
                    out = &out + &(&(u * rho) * &u.adjoint());
                }
                out = out.scale_re(1.0 / unitaries.len() as f64);
            }
        }
        out
    }

    fn dual_unchecked(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim);
        match &self.kind {
            ReductionKind::Measurement { decomposition } => {
                for p in decomposition.projectors() {
                    out = &out + &(&(p * x) * p);
                }
            }
            ReductionKind::LowerTriangularize { decomposition } => {
                for (p, q) in decomposition.projectors().iter().zip(&self.partial_sums) {
                    out = &out + &(&(q * x) * p);
                }
            }
            ReductionKind::GroupAverage { unitaries } => {
                for u in unitaries {
                    out = &out + &(&(&u.adjoint() * x) * u);
                }
                out = out.scale_re(1.0 / unitaries.len() as f64);
            }
        }
        out
    }

    /// Operator norm of `R*(R*(X) R*(Y)) - R*(X) R*(Y)`.
    pub fn closure_defect(&self, x: &Matrix, y: &Matrix) -> Result<f64> {
        let rx = self.apply_dual(x)?;
        let ry = self.apply_dual(y)?;
        let prod = &rx * &ry;
        (&self.dual_unchecked(&prod) - &prod).op_norm()
    }

    /// True iff `||R(rho)||_1 <= ||rho||_1 + CONTRACTION_SLACK`.
    pub fn contraction_check(&self, rho: &Matrix) -> Result<bool> {
        let reduced = self.apply(rho)?;
        Ok(trace_norm(&reduced)? <= trace_norm(rho)? + CONTRACTION_SLACK)
    }

    /// For Hermitian PSD `rho`: true iff `R(rho)` is Hermitian PSD with the same trace.
    /// Not applicable to lower-triangularisation.
    pub fn positivity_check(&self, rho: &Matrix) -> Result<bool> {
        if matches!(self.kind, ReductionKind::LowerTriangularize { .. }) {
            return Err(Error::NotApplicable("positivity is not preserved by lower-triangularisation"));
        }
        self.check_dim(rho)?;
        let scale = rho.max_abs().max(1.0);
        if !validate(ClassTag::Hermitian, rho, DEFAULT_TOL * scale) {
            return Err(Error::Precondition("input state is not Hermitian".into()));
        }
        if linalg::hermitian_eigenvalues(rho)?[0] < PSD_FLOOR {
            return Err(Error::Precondition("input state is not positive semidefinite".into()));
        }
        let out = self.apply_unchecked(rho);
        let hermitian = validate(ClassTag::Hermitian, &out, DEFAULT_TOL * scale);
        let psd = linalg::hermitian_eigenvalues(&out)?[0] >= PSD_FLOOR;
        let trace_kept = (out.trace() - rho.trace()).norm() <= DEFAULT_TOL * scale;
        Ok(hermitian && psd && trace_kept)
    }
}

impl<'de> Deserialize<'de> for ReductionOp {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let kind = ReductionKind::deserialize(deserializer)?;
        ReductionOp::new(kind).map_err(serde::de::Error::custom)
    }
}

impl LinearMap for ReductionOp {
    fn source_dim(&self) -> usize {
        self.dim
    }
    fn target_dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, rho: &Matrix) -> Matrix {
        self.apply_unchecked(rho)
    }
    fn adjoint(&self, x: &Matrix) -> Matrix {
        self.dual_unchecked(x)
    }
}

fn validate_group(unitaries: &[Matrix]) -> Result<usize> {
    let first = unitaries
        .first()
        .ok_or_else(|| Error::InvalidReduction("empty group".into()))?;
    let n = first.dim();
    let ident = Matrix::identity(n);
    for (k, u) in unitaries.iter().enumerate() {
        if u.dim() != n {
            return Err(Error::DimensionMismatch { left: n, right: u.dim() });
        }
        if (&(u * &u.adjoint()) - &ident).max_abs() > DEFAULT_TOL {
            return Err(Error::InvalidReduction(format!("element {k} is not unitary")));
        }
    }
    let contains = |m: &Matrix| unitaries.iter().any(|v| (v - m).max_abs() <= GROUP_CLOSURE_TOL);
    for (a, u) in unitaries.iter().enumerate() {
        if !contains(&u.adjoint()) {
            return Err(Error::InvalidReduction(format!("inverse of element {a} missing")));
        }
        for (b, v) in unitaries.iter().enumerate() {
            if !contains(&(u * v)) {
                return Err(Error::InvalidReduction(format!("product of elements {a} and {b} missing")));
            }
        }
    }
    Ok(n)
}

/// The cyclic group generated by `diag(w^0, ..., w^(N-1))`, `w = exp(2 pi i / order)`.
pub fn cyclic_phase_group(n: usize, order: usize) -> Vec<Matrix> {
    (0..order)
        .map(|k| {
            let phases: Vec<Complex64> = (0..n)
                .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * j) as f64 / order as f64))
                .collect();
            Matrix::diag(&phases)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::c64;

    fn abcd() -> Matrix {
        Matrix::from_rows(&[vec![c64(1.0, 0.5), c64(2.0, 0.0)], vec![c64(3.0, -1.0), c64(4.0, 0.0)]]).unwrap()
    }

    fn z2() -> Vec<Matrix> {
        vec![Matrix::identity(2), Matrix::diag_real(&[1.0, -1.0])]
    }

    #[test]
    fn apply_examples() {
        let rho = abcd();
        let diag = Matrix::diag(&[rho.get(0, 0), rho.get(1, 1)]);
        let meas = ReductionOp::measurement(DecompositionOfUnity::standard(2));
        assert_eq!(meas.apply(&rho).unwrap(), diag);
        let low = ReductionOp::lower_triangularize(DecompositionOfUnity::standard(2));
        assert_eq!(low.apply(&rho).unwrap(), crate::operator::project_lower(&rho));
        let avg = ReductionOp::group_average(z2()).unwrap();
        assert_eq!(avg.apply(&rho).unwrap(), diag);
    }

    #[test]
    fn dual_examples() {
        let x = abcd();
        let meas = ReductionOp::measurement(DecompositionOfUnity::standard(2));
        let d = Matrix::diag_real(&[2.0, -7.0]);
        assert_eq!(meas.apply_dual(&d).unwrap(), d);
        let low = ReductionOp::lower_triangularize(DecompositionOfUnity::standard(2));
        assert_eq!(low.apply_dual(&x).unwrap(), crate::operator::project_upper_plus(&x));
        let avg = ReductionOp::group_average(z2()).unwrap();
        assert_eq!(avg.apply_dual(&x).unwrap(), avg.apply(&x).unwrap());
    }

    #[test]
    fn closure_of_identity() {
        let low = ReductionOp::lower_triangularize(DecompositionOfUnity::standard(3));
        let i = Matrix::identity(3);
        assert_eq!(low.closure_defect(&i, &i).unwrap(), 0.0);
    }

    #[test]
    fn invalid_groups_rejected() {
        // missing inverse/product
        let w = cyclic_phase_group(2, 4);
        assert!(ReductionOp::group_average(vec![w[0].clone(), w[1].clone()]).is_err());
        // non-unitary
        assert!(ReductionOp::group_average(vec![Matrix::identity(2).scale_re(2.0)]).is_err());
        assert!(ReductionOp::group_average(Vec::new()).is_err());
        assert!(ReductionOp::group_average(w).is_ok());
    }

    #[test]
    fn positivity_not_applicable_to_lower() {
        let low = ReductionOp::lower_triangularize(DecompositionOfUnity::standard(2));
        let err = low.positivity_check(&Matrix::identity(2)).unwrap_err();
        assert!(matches!(err, Error::NotApplicable(_)));
    }

    #[test]
    fn maximally_mixed_state_is_preserved() {
        let rho = Matrix::identity(3).scale_re(1.0 / 3.0);
        let meas = ReductionOp::measurement(DecompositionOfUnity::blocks(&[1, 2]).unwrap());
        assert!(meas.positivity_check(&rho).unwrap());
        assert!(meas.contraction_check(&Matrix::zeros(3)).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let op = ReductionOp::group_average(z2()).unwrap();
        let s = serde_json::to_string(&op).unwrap();
        assert!(s.starts_with(r#"{"kind":"group_average""#));
        let back: ReductionOp = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
        let meas = ReductionOp::measurement(DecompositionOfUnity::standard(2));
        let back: ReductionOp = serde_json::from_str(&serde_json::to_string(&meas).unwrap()).unwrap();
        assert_eq!(back, meas);
        let bad = r#"{"kind":"measurement","decomposition":{"projectors":[{"dim":1,"re":[0.5],"im":[0]}]}}"#;
        assert!(serde_json::from_str::<ReductionOp>(bad).is_err());
    }
}
