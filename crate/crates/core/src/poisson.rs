//! Lie-Poisson brackets on matrix spaces, their Hamiltonian vector fields,
//! the trace Casimirs, and defect calculators for the Poisson axioms and for
//! linear Poisson maps.
//!
//! Gradients are represented under the trace pairing: for an observable `f`
//! the representative `Df(rho)` satisfies `d/dt f(rho + t delta) = tr(Df(rho) delta)`.
//! Real-valued observables on realified spaces use `Re tr(Df delta)` instead.
//!
//! Hamiltonian field sign conventions:
//! * `Full`, `HermitianReal`: `X_h(rho) = [Dh, rho]`, so `<Dg, X_h> = {g, h}`.
//! * `LowerCoinduced`: `X_h(rho) = pi_lower([rho, pi_upper(Dh)])`, so
//!   `<Dg, X_h> = -{g, h}`. With this choice the canonical Toda flow is
//!   carried exactly onto the Lax flow by the Flaschka map; the opposite
//!   composite order gives the time-reversed flow.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{
    commutator_unchecked, pairing_unchecked, project_lower, project_upper_plus, require, skew_hermitian_part,
    ClassTag, Matrix, DEFAULT_TOL,
};

/// Step for first-order central differences.
pub const FD_STEP: f64 = 1e-5;
/// Step for differentiating a bracket that was itself built from gradients.
pub const NESTED_FD_STEP: f64 = 1e-4;

pub type EvalFn = Arc<dyn Fn(&Matrix) -> Complex64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&Matrix) -> Matrix + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradMode {
    Analytic,
    FiniteDifference { step: f64 },
}

/// A scalar function on `N x N` matrices together with a gradient
/// representative. Closures must be free of side effects.
#[derive(Clone)]
pub struct Observable {
    dim: usize,
    eval: EvalFn,
    grad: Option<GradFn>,
    mode: GradMode,
    constant_grad: Option<Matrix>,
    real_valued: bool,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("dim", &self.dim)
            .field("mode", &self.mode)
            .field("linear", &self.constant_grad.is_some())
            .field("real_valued", &self.real_valued)
            .finish()
    }
}

impl Observable {
    /// Observable with an analytic gradient.
    pub fn analytic(
        dim: usize,
        eval: impl Fn(&Matrix) -> Complex64 + Send + Sync + 'static,
        grad: impl Fn(&Matrix) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            grad: Some(Arc::new(grad)),
            mode: GradMode::Analytic,
            constant_grad: None,
            real_valued: false,
        }
    }

    /// Observable differentiated by central differences with the given step.
    pub fn finite_difference(dim: usize, step: f64, eval: impl Fn(&Matrix) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            grad: None,
            mode: GradMode::FiniteDifference { step },
            constant_grad: None,
            real_valued: false,
        }
    }

    /// `rho -> tr(a rho)`.
    pub fn linear(a: Matrix) -> Self {
        let dim = a.dim();
        let ev = a.clone();
        let gr = a.clone();
        Self {
            dim,
            eval: Arc::new(move |rho| pairing_unchecked(&ev, rho)),
            grad: Some(Arc::new(move |_| gr.clone())),
            mode: GradMode::Analytic,
            constant_grad: Some(a),
            real_valued: false,
        }
    }

    /// `rho -> Re tr(a rho)`, a real linear functional on the realified space.
    pub fn real_linear(a: Matrix) -> Self {
        let ev = a.clone();
        let mut obs = Self::linear(a);
        obs.eval = Arc::new(move |rho| Complex64::new(pairing_unchecked(&ev, rho).re, 0.0));
        obs.real_valued = true;
        obs
    }

    pub fn constant(dim: usize, value: Complex64) -> Self {
        let mut obs = Self::linear(Matrix::zeros(dim));
        obs.eval = Arc::new(move |_| value);
        obs
    }

    /// `rho -> tr(a rho b rho)`, gradient `b rho a + a rho b`.
    pub fn quadratic(a: Matrix, b: Matrix) -> Self {
        let dim = a.dim();
        let (ea, eb) = (a.clone(), b.clone());
        Self::analytic(
            dim,
            move |rho| (&(&(&ea * rho) * &eb) * rho).trace(),
            move |rho| &(&(&b * rho) * &a) + &(&(&a * rho) * &b),
        )
    }

    /// Marks the observable as real-valued, switching finite differences to
    /// the real-pairing convention.
    pub fn into_real(mut self) -> Self {
        self.real_valued = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> GradMode {
        self.mode
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    /// Constant gradient of a linear (or constant) observable.
    pub fn linear_gradient(&self) -> Option<&Matrix> {
        self.constant_grad.as_ref()
    }

    pub fn eval(&self, rho: &Matrix) -> Complex64 {
        (self.eval)(rho)
    }

    pub fn gradient(&self, rho: &Matrix) -> Matrix {
        match (&self.grad, self.mode) {
            (Some(g), _) => g(rho),
            (None, GradMode::FiniteDifference { step }) => central_difference_gradient(&*self.eval, rho, step, self.real_valued),
            (None, GradMode::Analytic) => unreachable!("analytic observable without gradient"),
        }
    }

    /// Pointwise product, gradient by the product rule.
    pub fn product(f: &Observable, g: &Observable) -> Observable {
        let (fe, ge) = (f.clone(), g.clone());
        let (fg, gg) = (f.clone(), g.clone());
        let mut obs = Observable::analytic(
            f.dim,
            move |rho| fe.eval(rho) * ge.eval(rho),
            move |rho| &fg.gradient(rho).scale(gg.eval(rho)) + &gg.gradient(rho).scale(fg.eval(rho)),
        );
        obs.real_valued = f.real_valued && g.real_valued;
        obs
    }

    /// Pullback `f o phi`, gradient `phi^*(Df(phi(rho)))`.
    pub fn pullback(f: &Observable, phi: Arc<dyn LinearMap>) -> Observable {
        let (fe, fg) = (f.clone(), f.clone());
        let (pe, pg) = (phi.clone(), phi.clone());
        let constant_grad = f.constant_grad.as_ref().map(|a| phi.adjoint(a));
        Observable {
            dim: phi.source_dim(),
            eval: Arc::new(move |rho| fe.eval(&pe.apply(rho))),
            grad: Some(Arc::new(move |rho| pg.adjoint(&fg.gradient(&pg.apply(rho))))),
            mode: GradMode::Analytic,
            constant_grad,
            real_valued: f.real_valued,
        }
    }
}

/// Central-difference gradient representative under the trace pairing.
///
/// Holomorphic observables use `(d_re - i d_im) / 2` per entry; real-valued
/// observables use `d_re - i d_im`, the representative for `Re tr(G delta)`.
pub fn central_difference_gradient(
    eval: &(dyn Fn(&Matrix) -> Complex64 + Send + Sync),
    rho: &Matrix,
    step: f64,
    real_valued: bool,
) -> Matrix {
    let n = rho.dim();
    let weight = if real_valued { 1.0 } else { 0.5 };
    Matrix::from_fn(n, |j, i| {
        // entry (j, i) of the representative pairs with rho_(i, j)
        let base = rho.get(i, j);
        let d = |h: Complex64| {
            let plus = eval(&rho.with_entry(i, j, base + h));
            let minus = eval(&rho.with_entry(i, j, base - h));
            (plus - minus) / (2.0 * step)
        };
        let d_re = d(Complex64::new(step, 0.0));
        let d_im = d(Complex64::new(0.0, step));
        if real_valued {
            Complex64::new(d_re.re, -d_im.re) * weight
        } else {
            (d_re - Complex64::i() * d_im) * weight
        }
    })
}

/// Linear (or real-linear) maps between matrix spaces with their adjoint
/// under the trace pairing: `tr(adjoint(X) rho) = tr(X apply(rho))`, or the
/// real part of it for real-linear maps.
pub trait LinearMap: Send + Sync {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn apply(&self, rho: &Matrix) -> Matrix;
    fn adjoint(&self, x: &Matrix) -> Matrix;
    fn is_real_linear(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityMap(pub usize);

impl LinearMap for IdentityMap {
    fn source_dim(&self) -> usize {
        self.0
    }
    fn target_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, rho: &Matrix) -> Matrix {
        rho.clone()
    }
    fn adjoint(&self, x: &Matrix) -> Matrix {
        x.clone()
    }
}

/// `pi_lower`, the surjection onto lower-triangular matrices; adjoint `pi_upper_plus`.
#[derive(Clone, Copy, Debug)]
pub struct LowerProjection(pub usize);

impl LinearMap for LowerProjection {
    fn source_dim(&self) -> usize {
        self.0
    }
    fn target_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, rho: &Matrix) -> Matrix {
        project_lower(rho)
    }
    fn adjoint(&self, x: &Matrix) -> Matrix {
        project_upper_plus(x)
    }
}

/// The inclusion of lower-triangular matrices into all matrices. Its adjoint
/// restricts a functional to the lower-triangular subspace, represented in `L_+`.
#[derive(Clone, Copy, Debug)]
pub struct LowerInclusion(pub usize);

impl LinearMap for LowerInclusion {
    fn source_dim(&self) -> usize {
        self.0
    }
    fn target_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, rho: &Matrix) -> Matrix {
        rho.clone()
    }
    fn adjoint(&self, x: &Matrix) -> Matrix {
        project_upper_plus(x)
    }
}

/// `R = (id + sigma) / 2` with `sigma rho = -rho*`; real-linear and self-adjoint
/// under `Re tr`.
#[derive(Clone, Copy, Debug)]
pub struct SkewHermitianProjection(pub usize);

impl LinearMap for SkewHermitianProjection {
    fn source_dim(&self) -> usize {
        self.0
    }
    fn target_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, rho: &Matrix) -> Matrix {
        skew_hermitian_part(rho)
    }
    fn adjoint(&self, x: &Matrix) -> Matrix {
        skew_hermitian_part(x)
    }
    fn is_real_linear(&self) -> bool {
        true
    }
}

/// Block inclusion into a product: `i_1(b) = (b, 0)` or `i_2(b) = (0, b)`,
/// with products realised as block-diagonal matrices.
#[derive(Clone, Copy, Debug)]
pub struct BlockInclusion {
    pub left: usize,
    pub right: usize,
    pub second: bool,
}

impl LinearMap for BlockInclusion {
    fn source_dim(&self) -> usize {
        if self.second {
            self.right
        } else {
            self.left
        }
    }
    fn target_dim(&self) -> usize {
        self.left + self.right
    }
    fn apply(&self, rho: &Matrix) -> Matrix {
        if self.second {
            Matrix::block_diag(&Matrix::zeros(self.left), rho)
        } else {
            Matrix::block_diag(rho, &Matrix::zeros(self.right))
        }
    }
    fn adjoint(&self, x: &Matrix) -> Matrix {
        if self.second {
            x.block(self.left, self.right)
        } else {
            x.block(0, self.left)
        }
    }
}

/// Block projection from a product onto one factor.
#[derive(Clone, Copy, Debug)]
pub struct BlockProjection {
    pub left: usize,
    pub right: usize,
    pub second: bool,
}

impl LinearMap for BlockProjection {
    fn source_dim(&self) -> usize {
        self.left + self.right
    }
    fn target_dim(&self) -> usize {
        if self.second {
            self.right
        } else {
            self.left
        }
    }
    fn apply(&self, rho: &Matrix) -> Matrix {
        BlockInclusion { left: self.left, right: self.right, second: self.second }.adjoint(rho)
    }
    fn adjoint(&self, x: &Matrix) -> Matrix {
        BlockInclusion { left: self.left, right: self.right, second: self.second }.apply(x)
    }
}

/// Which Poisson structure is in force.
#[derive(Clone, Debug, PartialEq)]
pub enum BracketSpec {
    /// `tr([Df, Dg] rho)` on all matrices.
    Full,
    /// Coinduced bracket on lower-triangular matrices, gradients in `L_+`.
    LowerCoinduced,
    /// Real bracket `Re tr([R*Df, R*Dg] rho)` on skew-Hermitian matrices.
    HermitianReal,
    /// Product structure on block-diagonal states `diag(rho_1, rho_2)`, with
    /// `split` the size of the first block.
    Product { left: Box<BracketSpec>, right: Box<BracketSpec>, split: usize },
}

impl BracketSpec {
    pub fn product(left: BracketSpec, right: BracketSpec, split: usize) -> Self {
        BracketSpec::Product { left: Box::new(left), right: Box::new(right), split }
    }

    pub fn is_real(&self) -> bool {
        match self {
            BracketSpec::HermitianReal => true,
            BracketSpec::Full | BracketSpec::LowerCoinduced => false,
            BracketSpec::Product { left, right, .. } => left.is_real() && right.is_real(),
        }
    }

    /// Sign `s` with `<Dg, X_h> = s {g, h}`; `None` for mixed products.
    pub fn field_sign(&self) -> Option<f64> {
        match self {
            BracketSpec::Full | BracketSpec::HermitianReal => Some(1.0),
            BracketSpec::LowerCoinduced => Some(-1.0),
            BracketSpec::Product { left, right, .. } => {
                let (l, r) = (left.field_sign()?, right.field_sign()?);
                (l == r).then_some(l)
            }
        }
    }

    /// Checks that `rho` lies in the phase space of this structure.
    pub fn check_state(&self, rho: &Matrix, tol: f64) -> Result<()> {
        match self {
            BracketSpec::Full => Ok(()),
            BracketSpec::LowerCoinduced => require(ClassTag::LowerTriangular, rho, tol),
            BracketSpec::HermitianReal => require(ClassTag::SkewHermitian, rho, tol),
            BracketSpec::Product { left, right, split } => {
                let n = rho.dim();
                if *split == 0 || *split >= n {
                    return Err(Error::DimensionMismatch { left: *split, right: n });
                }
                for i in 0..n {
                    for j in 0..n {
                        if (i < *split) != (j < *split) && rho.get(i, j).norm() > tol {
                            return Err(Error::TagViolation("block-diagonal"));
                        }
                    }
                }
                left.check_state(&rho.block(0, *split), tol)?;
                right.check_state(&rho.block(*split, n - split), tol)
            }
        }
    }

    /// Representative of a gradient in the dual of the phase space.
    pub fn project_gradient(&self, g: &Matrix) -> Matrix {
        match self {
            BracketSpec::Full => g.clone(),
            BracketSpec::LowerCoinduced => project_upper_plus(g),
            BracketSpec::HermitianReal => skew_hermitian_part(g),
            BracketSpec::Product { left, right, split } => {
                let n = g.dim();
                Matrix::block_diag(&left.project_gradient(&g.block(0, *split)), &right.project_gradient(&g.block(*split, n - split)))
            }
        }
    }

    /// Bracket of two gradient representatives at `rho`, without tag checks.
    pub fn bracket_of_gradients(&self, df: &Matrix, dg: &Matrix, rho: &Matrix) -> Complex64 {
        match self {
            BracketSpec::Full => pairing_unchecked(&commutator_unchecked(df, dg), rho),
            BracketSpec::LowerCoinduced => {
                pairing_unchecked(&commutator_unchecked(&project_upper_plus(df), &project_upper_plus(dg)), rho)
            }
            BracketSpec::HermitianReal => {
                let c = commutator_unchecked(&skew_hermitian_part(df), &skew_hermitian_part(dg));
                Complex64::new(pairing_unchecked(&c, rho).re, 0.0)
            }
            BracketSpec::Product { left, right, split } => {
                let n = rho.dim();
                let m = n - split;
                left.bracket_of_gradients(&df.block(0, *split), &dg.block(0, *split), &rho.block(0, *split))
                    + right.bracket_of_gradients(&df.block(*split, m), &dg.block(*split, m), &rho.block(*split, m))
            }
        }
    }

    /// Gradient of `rho -> bracket_of_gradients(a, b, rho)` for constant `a`, `b`.
    pub fn linear_bracket_gradient(&self, a: &Matrix, b: &Matrix) -> Matrix {
        match self {
            BracketSpec::Product { left, right, split } => {
                let n = a.dim();
                let m = n - split;
                Matrix::block_diag(
                    &left.linear_bracket_gradient(&a.block(0, *split), &b.block(0, *split)),
                    &right.linear_bracket_gradient(&a.block(*split, m), &b.block(*split, m)),
                )
            }
            _ => {
                let (pa, pb) = (self.project_gradient(a), self.project_gradient(b));
                commutator_unchecked(&pa, &pb)
            }
        }
    }

    /// Hamiltonian vector field for a gradient representative, without tag checks.
    pub fn field_of_gradient(&self, dh: &Matrix, rho: &Matrix) -> Matrix {
        match self {
            BracketSpec::Full => commutator_unchecked(dh, rho),
            BracketSpec::LowerCoinduced => project_lower(&commutator_unchecked(rho, &project_upper_plus(dh))),
            BracketSpec::HermitianReal => commutator_unchecked(&skew_hermitian_part(dh), rho),
            BracketSpec::Product { left, right, split } => {
                let n = rho.dim();
                let m = n - split;
                Matrix::block_diag(
                    &left.field_of_gradient(&dh.block(0, *split), &rho.block(0, *split)),
                    &right.field_of_gradient(&dh.block(*split, m), &rho.block(*split, m)),
                )
            }
        }
    }
}

fn check_dims(f: &Observable, rho: &Matrix) -> Result<()> {
    if f.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { left: f.dim(), right: rho.dim() });
    }
    Ok(())
}

/// `{f, g}(rho)` for the chosen structure.
pub fn lp_bracket(spec: &BracketSpec, f: &Observable, g: &Observable, rho: &Matrix) -> Result<Complex64> {
    check_dims(f, rho)?;
    check_dims(g, rho)?;
    spec.check_state(rho, DEFAULT_TOL)?;
    Ok(spec.bracket_of_gradients(&f.gradient(rho), &g.gradient(rho), rho))
}

/// Hamiltonian vector field `X_h(rho)`; see the module docs for the sign convention.
pub fn ham_field(spec: &BracketSpec, h: &Observable, rho: &Matrix) -> Result<Matrix> {
    check_dims(h, rho)?;
    spec.check_state(rho, DEFAULT_TOL)?;
    Ok(spec.field_of_gradient(&h.gradient(rho), rho))
}

/// Trace Casimir `T_k(rho) = tr(rho^k) / k`, gradient `rho^(k-1)`.
pub fn casimir(k: u32, dim: usize) -> Result<Observable> {
    if k == 0 {
        return Err(Error::InvalidArgument("Casimir order must be >= 1".into()));
    }
    Ok(Observable::analytic(
        dim,
        move |rho| rho.pow(k).trace() / k as f64,
        move |rho| rho.pow(k - 1),
    ))
}

/// The bracket `{f, g}` as a new observable. Exact gradient when both inputs
/// are linear, central differences with [`NESTED_FD_STEP`] otherwise.
pub fn bracket_observable(spec: &BracketSpec, f: &Observable, g: &Observable) -> Observable {
    let (s, fe, ge) = (spec.clone(), f.clone(), g.clone());
    let eval = move |rho: &Matrix| s.bracket_of_gradients(&fe.gradient(rho), &ge.gradient(rho), rho);
    match (f.linear_gradient(), g.linear_gradient()) {
        (Some(a), Some(b)) => {
            let c = spec.linear_bracket_gradient(a, b);
            let gc = c.clone();
            let mut obs = Observable::analytic(f.dim(), eval, move |_| gc.clone());
            obs.constant_grad = Some(c);
            obs.real_valued = spec.is_real();
            obs
        }
        _ => {
            let mut obs = Observable::finite_difference(f.dim(), NESTED_FD_STEP, eval);
            obs.real_valued = spec.is_real();
            obs
        }
    }
}

/// `|{{f,g},h} + {{g,h},f} + {{h,f},g}|(rho)`.
pub fn jacobi_defect(spec: &BracketSpec, f: &Observable, g: &Observable, h: &Observable, rho: &Matrix) -> Result<f64> {
    let fg = bracket_observable(spec, f, g);
    let gh = bracket_observable(spec, g, h);
    let hf = bracket_observable(spec, h, f);
    let total = lp_bracket(spec, &fg, h, rho)? + lp_bracket(spec, &gh, f, rho)? + lp_bracket(spec, &hf, g, rho)?;
    Ok(total.norm())
}

/// `|{fg, h} - f{g, h} - g{f, h}|(rho)`.
pub fn leibniz_defect(spec: &BracketSpec, f: &Observable, g: &Observable, h: &Observable, rho: &Matrix) -> Result<f64> {
    let fg = Observable::product(f, g);
    let lhs = lp_bracket(spec, &fg, h, rho)?;
    let rhs = f.eval(rho) * lp_bracket(spec, g, h, rho)? + g.eval(rho) * lp_bracket(spec, f, h, rho)?;
    Ok((lhs - rhs).norm())
}

/// `|{f o phi, g o phi}_src(rho) - {f, g}_dst(phi(rho))|`.
pub fn poisson_map_defect(
    phi: Arc<dyn LinearMap>,
    src: &BracketSpec,
    dst: &BracketSpec,
    f: &Observable,
    g: &Observable,
    rho: &Matrix,
) -> Result<f64> {
    if rho.dim() != phi.source_dim() {
        return Err(Error::DimensionMismatch { left: phi.source_dim(), right: rho.dim() });
    }
    let image = phi.apply(rho);
    let rhs = lp_bracket(dst, f, g, &image)?;
    let fp = Observable::pullback(f, phi.clone());
    let gp = Observable::pullback(g, phi);
    let lhs = lp_bracket(src, &fp, &gp, rho)?;
    Ok((lhs - rhs).norm())
}

/// Largest violation of `R(R(E)) = R(E)` over the elementary basis
/// (and its imaginary multiples for real-linear maps).
pub fn idempotence_defect(r: &dyn LinearMap) -> f64 {
    let n = r.source_dim();
    let mut worst = 0.0f64;
    let scalars: &[Complex64] =
        if r.is_real_linear() { &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] } else { &[Complex64::new(1.0, 0.0)] };
    for i in 0..n {
        for j in 0..n {
            for &s in scalars {
                let e = Matrix::unit(n, i, j).scale(s);
                let once = r.apply(&e);
                let twice = r.apply(&once);
                worst = worst.max((&twice - &once).max_abs());
            }
        }
    }
    worst
}

/// Bracket coinduced on `im R`: `tr([R* Df, R* Dg] rho)` for `rho` in the image
/// (real part for real-linear `R`).
pub fn coinduced_bracket(r: &dyn LinearMap, f: &Observable, g: &Observable, rho: &Matrix) -> Result<Complex64> {
    check_dims(f, rho)?;
    check_dims(g, rho)?;
    let a = r.adjoint(&f.gradient(rho));
    let b = r.adjoint(&g.gradient(rho));
    let z = pairing_unchecked(&commutator_unchecked(&a, &b), rho);
    Ok(if r.is_real_linear() { Complex64::new(z.re, 0.0) } else { z })
}

/// `|{f o R, g o R}(rho) - {f, g}_{im R}(R rho)|`, the linear instance of the
/// Poisson reduction condition. Fails if `R` is not idempotent.
pub fn reduction_condition_defect(r: Arc<dyn LinearMap>, f: &Observable, g: &Observable, rho: &Matrix) -> Result<f64> {
    let idem = idempotence_defect(&*r);
    if idem > DEFAULT_TOL {
        return Err(Error::NotIdempotent(idem));
    }
    let real = r.is_real_linear();
    let reduced = r.apply(rho);
    let rhs = coinduced_bracket(&*r, f, g, &reduced)?;
    let fe = Observable::pullback(f, r.clone());
    let ge = Observable::pullback(g, r);
    let lhs = lp_bracket(&BracketSpec::Full, &fe, &ge, rho)?;
    let lhs = if real { Complex64::new(lhs.re, 0.0) } else { lhs };
    Ok((lhs - rhs).norm())
}
