//! The invariant suite behind `verify`: every identity the library promises,
//! evaluated on seeded random instances and reported as
//! `{name, defect, tol, pass}` records.
//!
//! A check normally passes when `defect <= tol`. Checks whose name ends in
//! `.exceeds` are negative controls and pass when `defect > tol`.
//!
//! Each check draws from its own ChaCha stream (`check id`, `instance`), so
//! instances are independent of evaluation order and of other checks.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::batch;
use crate::dynamics::{
    advance, collective_defect, evolve, isospectral_step, noether_drift, relative_drift, rk4_step, IntegratorConfig,
    IsospectralExp, Monitor, Rk4, Scheme,
};
use crate::error::{Error, Result};
use crate::fixtures::{
    random_general, random_hermitian, random_lower, random_psd, random_skew_hermitian, random_toda, random_unitary,
    random_vector, seeded_random_state, FixtureKind,
};
use crate::linalg;
use crate::operator::{
    c64, commutator, project_lower, project_strictly_lower, project_strictly_upper, project_upper_plus,
    skew_hermitian_part, trace_norm, trace_pairing, validate, validate_decomposition, ClassTag, DecompositionOfUnity,
    Matrix, DEFAULT_TOL,
};
use crate::orbit::{
    characteristic_rank, coadjoint_act, kks_eval, kks_null_directions, kks_welldefined_defect, rank_one_state,
    tangent_vector, OrbitPoint,
};
use crate::poisson::{
    casimir, ham_field, jacobi_defect, leibniz_defect, lp_bracket, poisson_map_defect, reduction_condition_defect,
    BlockInclusion, BracketSpec, IdentityMap, LinearMap, LowerInclusion, LowerProjection, Observable,
    SkewHermitianProjection, FD_STEP,
};
use crate::reduction::{cyclic_phase_group, ReductionOp, CONTRACTION_SLACK};
use crate::toda::{
    canonical_field, canonical_rhs, flaschka, flaschka_tangent, intertwining_defect, inverse_flaschka,
    involution_defect, lax_field, lax_field_reversed, lax_spectrum, toda_hamiltonian, toda_hk,
    trace_condition_defect, LaxPair, TodaState,
};

/// Every operation the suite must exercise, as `module.op`.
pub const REQUIRED_OPS: &[&str] = &[
    "operator_core.commutator",
    "operator_core.trace_pairing",
    "operator_core.trace_norm",
    "operator_core.project_lower",
    "operator_core.project_upper_plus",
    "operator_core.project_strictly_lower",
    "operator_core.skew_hermitian_part",
    "operator_core.validate",
    "operator_core.validate_decomposition",
    "poisson_core.lp_bracket",
    "poisson_core.ham_field",
    "poisson_core.casimir",
    "poisson_core.jacobi_defect",
    "poisson_core.leibniz_defect",
    "poisson_core.poisson_map_defect",
    "poisson_core.reduction_condition_defect",
    "reduction.apply",
    "reduction.apply_dual",
    "reduction.closure_defect",
    "reduction.contraction_check",
    "reduction.positivity_check",
    "orbit.coadjoint_act",
    "orbit.tangent_vector",
    "orbit.kks_eval",
    "orbit.kks_welldefined_defect",
    "orbit.characteristic_rank",
    "orbit.rank_one_state",
    "dynamics.rk4_step",
    "dynamics.isospectral_step",
    "dynamics.evolve",
    "dynamics.noether_drift",
    "dynamics.collective_defect",
    "toda.toda_hamiltonian",
    "toda.canonical_field",
    "toda.flaschka",
    "toda.toda_hk",
    "toda.lax_field",
    "toda.intertwining_defect",
    "toda.involution_defect",
    "cli.run",
    "cli.seeded_random_state",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub defect: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sizes and counts for the suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random instances per randomized check.
    pub samples: usize,
    /// Matrix sizes cycle through `2..=max_dim`.
    pub max_dim: usize,
    pub toda_dim: usize,
    /// Length and step of the conservation runs.
    pub t_end: f64,
    pub dt: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 0, samples: 100, max_dim: 6, toda_dim: 8, t_end: 10.0, dt: 1e-3 }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        if self.max_dim < 2 || self.max_dim > 64 {
            return Err(Error::InvalidArgument("max_dim must lie in 2..=64".into()));
        }
        if self.toda_dim < 2 || self.toda_dim > 64 {
            return Err(Error::InvalidArgument("toda_dim must lie in 2..=64".into()));
        }
        IntegratorConfig::new(Scheme::Rk4, self.dt, self.t_end, 1).map(|_| ())
    }

    fn dim(&self, i: usize) -> usize {
        2 + i % (self.max_dim - 1)
    }
}

fn instance_rng(seed: u64, check: u64, instance: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1 << 48) | (check << 24) | instance as u64);
    rng
}

/// Largest value; NaN if any instance produced NaN; first error wins.
fn fold_max(values: Vec<Result<f64>>) -> Result<f64> {
    let mut worst = 0.0f64;
    for v in values {
        let v = v?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

fn worst<F>(cfg: &VerifyConfig, check: u64, count: usize, f: F) -> Result<f64>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<f64> + Sync + Send,
{
    let seed = cfg.seed;
    fold_max(batch::map_indices(count, |i| f(&mut instance_rng(seed, check, i), i)))
}

// Random matrices scaled by 1/sqrt(N) so operator norms stay O(1) across sizes.
fn gen(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    random_general(rng, n).scale_re(1.0 / (n as f64).sqrt())
}

fn herm(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    random_hermitian(rng, n).scale_re(1.0 / (n as f64).sqrt())
}

fn lower(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    random_lower(rng, n).scale_re(1.0 / (n as f64).sqrt())
}

fn skew(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    random_skew_hermitian(rng, n).scale_re(1.0 / (n as f64).sqrt())
}

fn diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).max_abs()
}

fn random_sizes(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut left = n;
    let mut sizes = Vec::new();
    while left > 0 {
        let s = rng.random_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    sizes
}

fn random_decomposition(rng: &mut ChaCha8Rng, n: usize) -> Result<DecompositionOfUnity> {
    let u = random_unitary(rng, n);
    let sizes = random_sizes(rng, n);
    DecompositionOfUnity::from_unitary_columns(&u, &sizes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Measurement,
    LowerTriangularize,
    GroupAverage,
}

impl Kind {
    const ALL: [Kind; 3] = [Kind::Measurement, Kind::LowerTriangularize, Kind::GroupAverage];

    fn name(self) -> &'static str {
        match self {
            Kind::Measurement => "measurement",
            Kind::LowerTriangularize => "lower_triangularize",
            Kind::GroupAverage => "group_average",
        }
    }

    fn random(self, rng: &mut ChaCha8Rng, n: usize) -> Result<ReductionOp> {
        match self {
            Kind::Measurement => Ok(ReductionOp::measurement(random_decomposition(rng, n)?)),
            Kind::LowerTriangularize => Ok(ReductionOp::lower_triangularize(random_decomposition(rng, n)?)),
            Kind::GroupAverage => {
                let v = random_unitary(rng, n);
                let order = rng.random_range(2..=4);
                let group = cyclic_phase_group(n, order).iter().map(|g| &(&v * g) * &v.adjoint()).collect();
                ReductionOp::group_average(group)
            }
        }
    }
}

struct Suite {
    checks: Vec<Check>,
    covered: BTreeSet<&'static str>,
}

impl Suite {
    fn push(&mut self, name: impl Into<String>, defect: Result<f64>, tol: f64, ops: &[&'static str], negative: bool) {
        self.covered.extend(ops.iter().copied());
        let (defect, pass) = match defect {
            Ok(d) if negative => (d, d > tol),
            Ok(d) => (d, d <= tol),
            Err(_) => (f64::NAN, false),
        };
        self.checks.push(Check { name: name.into(), defect, tol, pass });
    }

    fn upper(&mut self, name: impl Into<String>, defect: Result<f64>, tol: f64, ops: &[&'static str]) {
        self.push(name, defect, tol, ops, false);
    }

    fn exceeds(&mut self, name: impl Into<String>, value: Result<f64>, bound: f64, ops: &[&'static str]) {
        self.push(name, value, bound, ops, true);
    }
}

/// Runs the full suite. `extra_covered` names operations exercised by the
/// caller (the CLI adds its own `run`).
pub fn verify(cfg: &VerifyConfig, extra_covered: &[&'static str]) -> Result<Report> {
    cfg.validate()?;
    let mut suite = Suite { checks: Vec::new(), covered: extra_covered.iter().copied().collect() };
    operator_checks(cfg, &mut suite);
    poisson_checks(cfg, &mut suite);
    reduction_checks(cfg, &mut suite);
    orbit_checks(cfg, &mut suite);
    dynamics_checks(cfg, &mut suite);
    toda_checks(cfg, &mut suite);
    fixture_checks(cfg, &mut suite);
    let missing = REQUIRED_OPS.iter().filter(|op| !suite.covered.contains(*op)).count();
    suite.upper("coverage.operations_missing", Ok(missing as f64), 0.0, &[]);
    let pass = suite.checks.iter().all(|c| c.pass);
    Ok(Report { checks: suite.checks, pass })
}

fn operator_checks(cfg: &VerifyConfig, s: &mut Suite) {
    let n = cfg.samples;
    s.upper(
        "operator.commutator.bilinear_antisymmetric_jacobi",
        worst(cfg, 1, n, |r, i| {
            let d = cfg.dim(i);
            let (x, y, z) = (gen(r, d), gen(r, d), gen(r, d));
            let (a, b) = (r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0);
            let lin = diff(
                &commutator(&(&x.scale_re(a) + &y.scale_re(b)), &z)?,
                &(&commutator(&x, &z)?.scale_re(a) + &commutator(&y, &z)?.scale_re(b)),
            );
            let anti = (&commutator(&x, &y)? + &commutator(&y, &x)?).max_abs();
            let jac = (&(&commutator(&commutator(&x, &y)?, &z)? + &commutator(&commutator(&y, &z)?, &x)?)
                + &commutator(&commutator(&z, &x)?, &y)?)
                .max_abs();
            Ok(lin.max(anti).max(jac))
        }),
        DEFAULT_TOL,
        &["operator_core.commutator"],
    );
    s.upper(
        "operator.trace_pairing.ad_invariance",
        worst(cfg, 2, n, |r, i| {
            let d = cfg.dim(i);
            let (x, y, rho) = (gen(r, d), gen(r, d), gen(r, d));
            Ok((trace_pairing(&commutator(&x, &y)?, &rho)? - trace_pairing(&x, &commutator(&y, &rho)?)?).norm())
        }),
        DEFAULT_TOL,
        &["operator_core.trace_pairing", "operator_core.commutator"],
    );
    s.upper(
        "operator.trace_norm.eigenvalue_oracle_relative",
        worst(cfg, 3, n, |r, i| {
            let a = gen(r, cfg.dim(i));
            let eig = linalg::hermitian_eigenvalues(&(&a.adjoint() * &a))?;
            let oracle: f64 = eig.iter().map(|v| v.max(0.0).sqrt()).sum();
            let tn = trace_norm(&a)?;
            Ok((tn - oracle).abs() / tn.max(1.0))
        }),
        1e-10,
        &["operator_core.trace_norm"],
    );
    s.upper(
        "operator.trace_norm.lower_projection_contraction",
        worst(cfg, 4, n, |r, i| {
            let rho = gen(r, cfg.dim(i));
            Ok((trace_norm(&project_lower(&rho))? - trace_norm(&rho)?).max(0.0))
        }),
        CONTRACTION_SLACK,
        &["operator_core.trace_norm", "operator_core.project_lower"],
    );
    s.upper(
        "operator.splittings.reassembly_and_idempotence",
        worst(cfg, 5, n, |r, i| {
            let x = gen(r, cfg.dim(i));
            let lo = project_lower(&x);
            let up = project_upper_plus(&x);
            let d1 = diff(&(&lo + &project_strictly_upper(&x)), &x);
            let d2 = diff(&(&up + &project_strictly_lower(&x)), &x);
            let d3 = diff(&project_lower(&lo), &lo).max(diff(&project_upper_plus(&up), &up));
            Ok(d1.max(d2).max(d3))
        }),
        0.0,
        &["operator_core.project_lower", "operator_core.project_upper_plus", "operator_core.project_strictly_lower"],
    );
    s.upper(
        "operator.splittings.pairing_duality",
        worst(cfg, 6, n, |r, i| {
            let d = cfg.dim(i);
            let (x, rho, low) = (gen(r, d), gen(r, d), lower(r, d));
            let restricted = (trace_pairing(&project_upper_plus(&x), &low)? - trace_pairing(&x, &low)?).norm();
            let mutual =
                (trace_pairing(&project_upper_plus(&x), &rho)? - trace_pairing(&x, &project_lower(&rho))?).norm();
            Ok(restricted.max(mutual))
        }),
        DEFAULT_TOL,
        &["operator_core.project_upper_plus", "operator_core.trace_pairing"],
    );
    s.upper(
        "operator.skew_hermitian_part.projection",
        worst(cfg, 7, n, |r, i| {
            let d = cfg.dim(i);
            let (a, h) = (gen(r, d), herm(r, d));
            let sk = skew_hermitian_part(&a);
            let tag: f64 = if validate(ClassTag::SkewHermitian, &sk, DEFAULT_TOL) { 0.0 } else { 1.0 };
            let formula = diff(&sk, &(&a - &a.adjoint()).scale_re(0.5));
            Ok(tag.max(formula).max(diff(&skew_hermitian_part(&sk), &sk)).max(skew_hermitian_part(&h).max_abs()))
        }),
        DEFAULT_TOL,
        &["operator_core.skew_hermitian_part", "operator_core.validate"],
    );
    s.upper(
        "operator.validate.tag_and_decomposition_verdicts",
        worst(cfg, 8, n, |r, i| {
            let d = cfg.dim(i);
            let mut wrong = 0usize;
            wrong += !validate(ClassTag::LowerTriangular, &lower(r, d), DEFAULT_TOL) as usize;
            wrong += !validate(ClassTag::Hermitian, &herm(r, d), DEFAULT_TOL) as usize;
            wrong += validate(ClassTag::Hermitian, &skew(r, d), DEFAULT_TOL) as usize;
            wrong += !validate(ClassTag::SkewHermitian, &skew(r, d), DEFAULT_TOL) as usize;
            wrong += validate(ClassTag::StrictlyUpper, &lower(r, d), DEFAULT_TOL) as usize;
            let g = gen(r, d);
            wrong += !validate(ClassTag::TraceClass, &g, DEFAULT_TOL) as usize;
            wrong += !validate(ClassTag::Bounded, &g, DEFAULT_TOL) as usize;
            wrong += !validate_decomposition(&random_decomposition(r, d)?, DEFAULT_TOL) as usize;
            wrong += !validate_decomposition(&DecompositionOfUnity::standard(d), DEFAULT_TOL) as usize;
            Ok(wrong as f64)
        }),
        0.0,
        &["operator_core.validate", "operator_core.validate_decomposition"],
    );
}

/// State of the right class for `spec` and the given instance size.
fn state_for(spec: &BracketSpec, r: &mut ChaCha8Rng, d: usize) -> Matrix {
    match spec {
        BracketSpec::Full => gen(r, d),
        BracketSpec::LowerCoinduced => lower(r, d),
        BracketSpec::HermitianReal => skew(r, d),
        BracketSpec::Product { left, right, split } => {
            let a = state_for(left, r, *split);
            let b = state_for(right, r, d - split);
            Matrix::block_diag(&a, &b)
        }
    }
}

/// Generator for linear observables; the real bracket needs real-valued ones, hence skew-Hermitian.
fn obs_gen(spec: &BracketSpec, r: &mut ChaCha8Rng, d: usize) -> Matrix {
    match spec {
        BracketSpec::HermitianReal => skew(r, d),
        _ => gen(r, d),
    }
}

fn specs(d: usize) -> Vec<(&'static str, BracketSpec)> {
    let split = d / 2;
    vec![
        ("full", BracketSpec::Full),
        ("lower_coinduced", BracketSpec::LowerCoinduced),
        ("hermitian_real", BracketSpec::HermitianReal),
        ("product", BracketSpec::product(BracketSpec::Full, BracketSpec::LowerCoinduced, split)),
    ]
}

fn spec_index_check<F>(cfg: &VerifyConfig, s: &mut Suite, base: &str, id: u64, tol: f64, ops: &[&'static str], f: F)
where
    F: Fn(&BracketSpec, &mut ChaCha8Rng, usize) -> Result<f64> + Sync + Send,
{
    for (k, name) in ["full", "lower_coinduced", "hermitian_real", "product"].iter().enumerate() {
        let defect = worst(cfg, id * 16 + k as u64, cfg.samples, |r, i| {
            let d = cfg.dim(i);
            let spec = specs(d).swap_remove(k).1;
            f(&spec, r, d)
        });
        s.upper(format!("{base}.{name}"), defect, tol, ops);
    }
}

fn poisson_checks(cfg: &VerifyConfig, s: &mut Suite) {
    let n = cfg.samples;
    spec_index_check(cfg, s, "poisson.lp_bracket.antisymmetry", 20, DEFAULT_TOL, &["poisson_core.lp_bracket"], |spec, r, d| {
        let rho = state_for(spec, r, d);
        let f = Observable::quadratic(gen(r, d), gen(r, d));
        let g = Observable::quadratic(gen(r, d), gen(r, d));
        Ok((lp_bracket(spec, &f, &g, &rho)? + lp_bracket(spec, &g, &f, &rho)?).norm())
    });
    spec_index_check(cfg, s, "poisson.ham_field.defining_identity", 21, DEFAULT_TOL, &["poisson_core.ham_field"], |spec, r, d| {
        let rho = state_for(spec, r, d);
        let h = Observable::quadratic(gen(r, d), gen(r, d));
        let field = ham_field(spec, &h, &rho)?;
        let sign = spec.field_sign().unwrap_or(1.0);
        let mut worst = 0.0f64;
        for _ in 0..4 {
            let a = gen(r, d);
            let g = Observable::linear(a.clone());
            let mut lhs = trace_pairing(&a, &field)?;
            let rhs = lp_bracket(spec, &g, &h, &rho)? * sign;
            if spec.is_real() {
                lhs = c64(lhs.re, 0.0);
            }
            if spec.field_sign().is_some() {
                worst = worst.max((lhs - rhs).norm());
            }
        }
        Ok(worst)
    });
    s.upper(
        "poisson.casimir.zero_field_k1_to_5",
        worst(cfg, 22, n, |r, i| {
            let d = cfg.dim(i);
            let rho = gen(r, d);
            let mut w = 0.0f64;
            for k in 1..=5 {
                w = w.max(ham_field(&BracketSpec::Full, &casimir(k, d)?, &rho)?.max_abs());
            }
            Ok(w)
        }),
        DEFAULT_TOL,
        &["poisson_core.casimir", "poisson_core.ham_field"],
    );
    s.upper(
        "poisson.casimir.gradient_vs_finite_difference",
        worst(cfg, 23, n, |r, i| {
            let d = cfg.dim(i);
            let rho = gen(r, d);
            let c = casimir(3, d)?;
            let ce = c.clone();
            let fd = Observable::finite_difference(d, FD_STEP, move |m| ce.eval(m));
            Ok(diff(&c.gradient(&rho), &fd.gradient(&rho)))
        }),
        1e-6,
        &["poisson_core.casimir"],
    );
    spec_index_check(cfg, s, "poisson.jacobi.linear", 24, DEFAULT_TOL, &["poisson_core.jacobi_defect"], |spec, r, d| {
        let rho = state_for(spec, r, d);
        let (f, g, h) = (Observable::linear(gen(r, d)), Observable::linear(gen(r, d)), Observable::linear(gen(r, d)));
        jacobi_defect(spec, &f, &g, &h, &rho)
    });
    s.upper(
        "poisson.jacobi.quadratic_nested_fd.full",
        worst(cfg, 25, n, |r, _| {
            let d = 4;
            let rho = gen(r, d);
            let f = Observable::quadratic(gen(r, d), gen(r, d));
            let g = Observable::quadratic(gen(r, d), gen(r, d));
            let h = Observable::quadratic(gen(r, d), gen(r, d));
            jacobi_defect(&BracketSpec::Full, &f, &g, &h, &rho)
        }),
        1e-5,
        &["poisson_core.jacobi_defect"],
    );
    spec_index_check(cfg, s, "poisson.leibniz.linear_and_quadratic", 26, DEFAULT_TOL, &["poisson_core.leibniz_defect"], |spec, r, d| {
        let rho = state_for(spec, r, d);
        let lin = leibniz_defect(
            spec,
            &Observable::linear(obs_gen(spec, r, d)),
            &Observable::linear(obs_gen(spec, r, d)),
            &Observable::linear(obs_gen(spec, r, d)),
            &rho,
        )?;
        let quad = leibniz_defect(
            spec,
            &Observable::quadratic(obs_gen(spec, r, d), obs_gen(spec, r, d)),
            &Observable::linear(obs_gen(spec, r, d)),
            &Observable::quadratic(obs_gen(spec, r, d), obs_gen(spec, r, d)),
            &rho,
        )?;
        Ok(lin.max(quad))
    });
    s.upper(
        "poisson.poisson_map.identity",
        worst(cfg, 27, n, |r, i| {
            let d = cfg.dim(i);
            let rho = gen(r, d);
            let f = Observable::quadratic(gen(r, d), gen(r, d));
            let g = Observable::quadratic(gen(r, d), gen(r, d));
            poisson_map_defect(Arc::new(IdentityMap(d)), &BracketSpec::Full, &BracketSpec::Full, &f, &g, &rho)
        }),
        DEFAULT_TOL,
        &["poisson_core.poisson_map_defect"],
    );
    s.upper(
        "poisson.poisson_map.lower_projection_coinduction",
        worst(cfg, 28, n, |r, i| {
            let d = cfg.dim(i);
            let rho = gen(r, d);
            let (f, g) = (Observable::linear(gen(r, d)), Observable::linear(gen(r, d)));
            poisson_map_defect(Arc::new(LowerProjection(d)), &BracketSpec::Full, &BracketSpec::LowerCoinduced, &f, &g, &rho)
        }),
        DEFAULT_TOL,
        &["poisson_core.poisson_map_defect"],
    );
    s.upper(
        "poisson.poisson_map.product_inclusion",
        worst(cfg, 29, n, |r, i| {
            let d = cfg.dim(i);
            let (left, right) = (d, 1 + i % 3);
            let rho = gen(r, left);
            let total = left + right;
            let (f, g) = (Observable::linear(gen(r, total)), Observable::linear(gen(r, total)));
            let phi = Arc::new(BlockInclusion { left, right, second: false });
            let dst = BracketSpec::product(BracketSpec::Full, BracketSpec::Full, left);
            poisson_map_defect(phi, &BracketSpec::Full, &dst, &f, &g, &rho)
        }),
        DEFAULT_TOL,
        &["poisson_core.poisson_map_defect"],
    );
    s.exceeds(
        "poisson.poisson_map.lower_inclusion_negative_control.exceeds",
        poisson_map_defect(
            Arc::new(LowerInclusion(2)),
            &BracketSpec::LowerCoinduced,
            &BracketSpec::Full,
            &Observable::linear(Matrix::unit(2, 1, 0)),
            &Observable::linear(Matrix::unit(2, 0, 1)),
            &Matrix::unit(2, 0, 0),
        ),
        1e-3,
        &["poisson_core.poisson_map_defect"],
    );
    s.upper(
        "poisson.reduction_condition.identity",
        worst(cfg, 30, n, |r, i| {
            let d = cfg.dim(i);
            let rho = gen(r, d);
            let (f, g) = (Observable::linear(gen(r, d)), Observable::linear(gen(r, d)));
            reduction_condition_defect(Arc::new(IdentityMap(d)), &f, &g, &rho)
        }),
        DEFAULT_TOL,
        &["poisson_core.reduction_condition_defect"],
    );
    s.upper(
        "poisson.reduction_condition.measurement",
        worst(cfg, 31, n, |r, i| {
            let d = cfg.dim(i);
            let op: Arc<dyn LinearMap> = Arc::new(ReductionOp::measurement(random_decomposition(r, d)?));
            let rho = gen(r, d);
            let (f, g) = (Observable::linear(gen(r, d)), Observable::linear(gen(r, d)));
            reduction_condition_defect(op, &f, &g, &rho)
        }),
        DEFAULT_TOL,
        &["poisson_core.reduction_condition_defect"],
    );
    s.upper(
        "poisson.reduction_condition.skew_hermitian",
        worst(cfg, 32, n, |r, i| {
            let d = cfg.dim(i);
            let rho = gen(r, d);
            let (f, g) = (Observable::real_linear(gen(r, d)), Observable::real_linear(gen(r, d)));
            reduction_condition_defect(Arc::new(SkewHermitianProjection(d)), &f, &g, &rho)
        }),
        DEFAULT_TOL,
        &["poisson_core.reduction_condition_defect"],
    );
}

fn reduction_checks(cfg: &VerifyConfig, s: &mut Suite) {
    let n = cfg.samples;
    for (k, kind) in Kind::ALL.into_iter().enumerate() {
        let id = 40 + 8 * k as u64;
        let name = kind.name();
        s.upper(
            format!("reduction.{name}.idempotence"),
            worst(cfg, id, n, |r, i| {
                let d = cfg.dim(i);
                let op = kind.random(r, d)?;
                let once = op.apply(&gen(r, d))?;
                Ok(diff(&op.apply(&once)?, &once))
            }),
            DEFAULT_TOL,
            &["reduction.apply"],
        );
        s.upper(
            format!("reduction.{name}.adjointness_on_basis"),
            worst(cfg, id + 1, n, |r, i| {
                let d = cfg.dim(i);
                let op = kind.random(r, d)?;
                let x = gen(r, d);
                let dual = op.apply_dual(&x)?;
                let mut w = 0.0f64;
                for a in 0..d {
                    for b in 0..d {
                        let e = Matrix::unit(d, a, b);
                        w = w.max((trace_pairing(&dual, &e)? - trace_pairing(&x, &op.apply(&e)?)?).norm());
                    }
                }
                Ok(w)
            }),
            DEFAULT_TOL,
            &["reduction.apply", "reduction.apply_dual"],
        );
        s.upper(
            format!("reduction.{name}.dual_image_closure"),
            worst(cfg, id + 2, n, |r, i| {
                let d = cfg.dim(i);
                let op = kind.random(r, d)?;
                op.closure_defect(&gen(r, d), &gen(r, d))
            }),
            DEFAULT_TOL,
            &["reduction.closure_defect"],
        );
        s.upper(
            format!("reduction.{name}.trace_norm_contraction"),
            worst(cfg, id + 3, n, |r, i| {
                let d = 2 + i % 7;
                let op = kind.random(r, d)?;
                let rho = gen(r, d);
                let excess = trace_norm(&op.apply(&rho)?)? - trace_norm(&rho)?;
                let verdict = op.contraction_check(&rho)?;
                if verdict != (excess <= CONTRACTION_SLACK) {
                    return Err(Error::InvalidArgument("contraction verdict disagrees with its definition".into()));
                }
                Ok(excess.max(0.0))
            }),
            CONTRACTION_SLACK,
            &["reduction.contraction_check"],
        );
        s.upper(
            format!("reduction.{name}.poisson_projection"),
            worst(cfg, id + 4, n, |r, i| {
                let d = cfg.dim(i);
                let op = kind.random(r, d)?;
                let f = Observable::linear(op.apply_dual(&gen(r, d))?);
                let g = Observable::linear(op.apply_dual(&gen(r, d))?);
                let rho = gen(r, d);
                poisson_map_defect(Arc::new(op), &BracketSpec::Full, &BracketSpec::Full, &f, &g, &rho)
            }),
            DEFAULT_TOL,
            &["poisson_core.poisson_map_defect", "reduction.apply_dual"],
        );
        s.upper(
            format!("reduction.{name}.image_kernel_splitting"),
            worst(cfg, id + 5, n, |r, i| {
                let d = cfg.dim(i);
                let op = kind.random(r, d)?;
                let rho = gen(r, d);
                let image = op.apply(&rho)?;
                let kernel = &rho - &image;
                Ok(diff(&(&image + &kernel), &rho).max(op.apply(&kernel)?.max_abs()))
            }),
            DEFAULT_TOL,
            &["reduction.apply"],
        );
        let positivity = worst(cfg, id + 6, n, |r, i| {
            let d = cfg.dim(i);
            let op = kind.random(r, d)?;
            let rho = random_psd(r, d);
            match (kind, op.positivity_check(&rho)) {
                (Kind::LowerTriangularize, Err(Error::NotApplicable(_))) => Ok(0.0),
                (Kind::LowerTriangularize, _) => Ok(1.0),
                (_, Ok(ok)) => Ok(if ok { 0.0 } else { 1.0 }),
                (_, Err(e)) => Err(e),
            }
        });
        let label = if kind == Kind::LowerTriangularize { "positivity_not_applicable" } else { "positivity_and_trace" };
        s.upper(format!("reduction.{name}.{label}"), positivity, 0.0, &["reduction.positivity_check"]);
    }
}

/// Matrices with nontrivial commutants: random spectra with forced repeats,
/// conjugated by a random unitary, plus generic and nilpotent cases.
fn orbit_state(r: &mut ChaCha8Rng, d: usize, i: usize) -> Matrix {
    match i % 4 {
        0 => gen(r, d),
        1 => {
            let distinct = 1 + r.random_range(0..d);
            let values: Vec<f64> = (0..distinct).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
            let spec: Vec<f64> = (0..d).map(|k| values[k % distinct]).collect();
            let u = random_unitary(r, d);
            &(&u * &Matrix::diag_real(&spec)) * &u.adjoint()
        }
        2 => project_strictly_upper(&gen(r, d)),
        _ => Matrix::unit(d, 0, d - 1),
    }
}

fn orbit_checks(cfg: &VerifyConfig, s: &mut Suite) {
    let n = cfg.samples;
    s.upper(
        "orbit.kks.bilinear_antisymmetric",
        worst(cfg, 70, n, |r, i| {
            let d = cfg.dim(i);
            let (rho, x, y, z) = (gen(r, d), gen(r, d), gen(r, d), gen(r, d));
            let a = c64(r.random::<f64>(), r.random::<f64>());
            let lin = (kks_eval(&rho, &(&x.scale(a) + &z), &y)? - (kks_eval(&rho, &x, &y)? * a + kks_eval(&rho, &z, &y)?)).norm();
            let anti = (kks_eval(&rho, &x, &y)? + kks_eval(&rho, &y, &x)?).norm();
            let tangent = diff(&tangent_vector(&x, &rho)?, &commutator(&x, &rho)?);
            Ok(lin.max(anti).max(tangent))
        }),
        DEFAULT_TOL,
        &["orbit.kks_eval", "orbit.tangent_vector"],
    );
    s.upper(
        "orbit.kks.welldefined_under_commutant_shift",
        worst(cfg, 71, n, |r, i| {
            let d = cfg.dim(i);
            let rho = orbit_state(r, d, i);
            let (x, y) = (gen(r, d), gen(r, d));
            let (c0, c1, c2) = (r.random::<f64>(), r.random::<f64>(), r.random::<f64>());
            let z = &(&Matrix::identity(d).scale_re(c0) + &rho.scale_re(c1)) + &rho.pow(2).scale_re(c2);
            kks_welldefined_defect(&rho, &x, &(&x + &z), &y)
        }),
        1e-10,
        &["orbit.kks_welldefined_defect"],
    );
    s.upper(
        "orbit.kks.conjugation_invariance",
        worst(cfg, 72, n, |r, i| {
            let d = cfg.dim(i);
            let (rho, x, y) = (gen(r, d), gen(r, d), gen(r, d));
            let point = OrbitPoint::new(random_unitary(r, d), rho.clone())?;
            let moved = kks_eval(point.current(), &point.transport(&x), &point.transport(&y))?;
            let act = diff(&coadjoint_act(point.group_element(), &rho)?, point.current());
            Ok((moved - kks_eval(&rho, &x, &y)?).norm().max(act).max(point.consistency_defect()))
        }),
        1e-10,
        &["orbit.coadjoint_act", "orbit.kks_eval"],
    );
    s.upper(
        "orbit.kks.bracket_consistency",
        worst(cfg, 73, n, |r, i| {
            let d = cfg.dim(i);
            let (rho, a, b) = (gen(r, d), gen(r, d), gen(r, d));
            let lp = lp_bracket(&BracketSpec::Full, &Observable::linear(a.clone()), &Observable::linear(b.clone()), &rho)?;
            Ok((lp - kks_eval(&rho, &a, &b)?).norm())
        }),
        DEFAULT_TOL,
        &["orbit.kks_eval", "poisson_core.lp_bracket"],
    );
    s.upper(
        "orbit.characteristic_rank.commutant_oracle",
        worst(cfg, 74, n, |r, i| {
            let d = cfg.dim(i);
            let rho = orbit_state(r, d, i);
            let rank = characteristic_rank(&rho)?;
            let commutant = kks_null_directions(&rho)?.len();
            Ok((rank as f64 - (d * d - commutant) as f64).abs())
        }),
        0.0,
        &["orbit.characteristic_rank"],
    );
    s.upper(
        "orbit.kks.weak_nondegeneracy",
        worst(cfg, 75, n, |r, i| {
            let d = cfg.dim(i);
            let rho = orbit_state(r, d, i);
            let scale = rho.max_abs().max(1.0);
            let mut w = 0.0f64;
            for x in kks_null_directions(&rho)? {
                w = w.max(commutator(&x, &rho)?.max_abs() / scale);
            }
            Ok(w)
        }),
        1e-10,
        &["orbit.kks_eval"],
    );
    s.upper(
        "orbit.coadjoint_act.characteristic_polynomial_relative",
        worst(cfg, 76, n, |r, i| {
            let d = cfg.dim(i);
            let rho = gen(r, d);
            let g = &Matrix::identity(d) + &gen(r, d).scale_re(0.3);
            let before = linalg::characteristic_polynomial(&rho);
            let after = linalg::characteristic_polynomial(&coadjoint_act(&g, &rho)?);
            Ok(before.iter().zip(&after).map(|(a, b)| (a - b).norm() / a.norm().max(1.0)).fold(0.0, f64::max))
        }),
        1e-8,
        &["orbit.coadjoint_act"],
    );
    s.upper(
        "orbit.coadjoint_act.composition",
        worst(cfg, 77, n, |r, i| {
            let d = cfg.dim(i);
            let rho = gen(r, d);
            let g = &Matrix::identity(d) + &gen(r, d).scale_re(0.3);
            let h = &Matrix::identity(d) + &gen(r, d).scale_re(0.3);
            Ok(diff(&coadjoint_act(&g, &coadjoint_act(&h, &rho)?)?, &coadjoint_act(&(&g * &h), &rho)?))
        }),
        1e-10,
        &["orbit.coadjoint_act"],
    );
    s.upper(
        "orbit.rank_one_state.projector",
        worst(cfg, 78, n, |r, i| {
            let d = cfg.dim(i);
            let rho = rank_one_state(&random_vector(r, d))?;
            let idem = diff(&(&rho * &rho), &rho);
            let trace = (rho.trace() - c64(1.0, 0.0)).norm();
            let herm = diff(&rho, &rho.adjoint());
            Ok(idem.max(trace).max(herm))
        }),
        DEFAULT_TOL,
        &["orbit.rank_one_state"],
    );
}

/// `rho' = [-iH, rho]`.
fn lvn_generator(h: &Matrix) -> Matrix {
    h.scale(c64(0.0, -1.0))
}

fn rk4_error(field: &(dyn Fn(&Matrix) -> Matrix + Sync), rho: &Matrix, exact: &Matrix, dt: f64, steps: usize) -> Result<f64> {
    let end = advance(&Rk4(|m: &Matrix| field(m)), rho, dt, steps)?;
    (&end - exact).op_norm()
}

fn spectrum_drift(states: &[Matrix]) -> Result<f64> {
    let first = linalg::hermitian_eigenvalues(&states[0])?;
    let mut w = 0.0f64;
    for st in &states[1..] {
        let ev = linalg::hermitian_eigenvalues(st)?;
        w = w.max(ev.iter().zip(&first).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    Ok(w)
}

fn trace_monitors(n: usize) -> Result<Vec<Monitor<Matrix>>> {
    (1..=4u32)
        .map(|k| {
            let c = casimir(k, n)?;
            Ok(Monitor::new(format!("T{k}"), move |m: &Matrix| c.eval(m).re))
        })
        .collect()
}

fn dynamics_checks(cfg: &VerifyConfig, s: &mut Suite) {
    s.upper(
        "dynamics.rk4.scalar_exponential_step",
        Ok((rk4_step(|x: &f64| *x, &1.0, 0.1) - 1.1051708333333333).abs()),
        1e-15,
        &["dynamics.rk4_step"],
    );
    let mut r = instance_rng(cfg.seed, 90, 0);
    let d = 4;
    let h = herm(&mut r, d);
    let rho0 = random_psd(&mut r, d);
    let gen_h = lvn_generator(&h);
    let u = linalg::expm(&gen_h);
    let exact = u.map(|u| &(&u * &rho0) * &u.adjoint());
    let field = |m: &Matrix| commutator(&gen_h, m).expect("square");
    let order = exact.clone().and_then(|ex| {
        let e1 = rk4_error(&field, &rho0, &ex, 0.1, 10)?;
        let e2 = rk4_error(&field, &rho0, &ex, 0.05, 20)?;
        Ok(((e1 / e2) - 16.0).abs() / 16.0)
    });
    s.upper("dynamics.rk4.order_ratio_deviation", order, 0.2, &["dynamics.rk4_step"]);

    let b = herm(&mut r, d);
    let nonlinear = {
        let (h, b) = (h.clone(), b.clone());
        move |m: &Matrix| (&h + &(&(&b * m) * &b)).scale(c64(0.0, -1.0))
    };
    let iso_order = (|| {
        let nl = nonlinear.clone();
        let reference = advance(&Rk4(move |m: &Matrix| commutator(&nl(m), m).expect("square")), &rho0, 1e-4, 10_000)?;
        let run = |dt: f64, steps: usize| -> Result<f64> {
            let end = advance(&IsospectralExp(nonlinear.clone()), &rho0, dt, steps)?;
            (&end - &reference).op_norm()
        };
        let (e1, e2) = (run(0.05, 20)?, run(0.025, 40)?);
        Ok(((e1 / e2) - 4.0).abs() / 4.0)
    })();
    s.upper("dynamics.isospectral.order_ratio_deviation", iso_order, 0.2, &["dynamics.isospectral_step"]);

    let closed = exact.clone().and_then(|ex| {
        let g = gen_h.clone();
        let end = advance(&IsospectralExp(move |_: &Matrix| g.clone()), &rho0, 1e-2, 100)?;
        (&end - &ex).op_norm()
    });
    s.upper("dynamics.isospectral.constant_generator_closed_form", closed, 1e-10, &["dynamics.isospectral_step"]);
    let trivial = isospectral_step(|m: &Matrix| Matrix::zeros(m.dim()), &rho0, 0.1).map(|m| diff(&m, &rho0));
    s.upper("dynamics.isospectral.zero_generator_fixed_point", trivial, 0.0, &["dynamics.isospectral_step"]);

    // Liouville-von Neumann conservation at N = 6 over the configured horizon.
    let mut r = instance_rng(cfg.seed, 91, 0);
    let n6 = 6;
    let h6 = lvn_generator(&herm(&mut r, n6));
    let rho6 = random_psd(&mut r, n6);
    let stride = ((cfg.t_end / cfg.dt).round() as usize / 1000).max(1);
    let lvn_rk4 = (|| {
        let run = IntegratorConfig::new(Scheme::Rk4, cfg.dt, cfg.t_end, stride)?;
        let g = h6.clone();
        let traj = evolve(&Rk4(move |m: &Matrix| commutator(&g, m).expect("square")), &rho6, &run, &trace_monitors(n6)?)?;
        Ok(traj.monitors.iter().map(|(_, v)| relative_drift(v)).fold(0.0, f64::max))
    })();
    s.upper("dynamics.lvn.rk4_trace_power_drift", lvn_rk4, 1e-8, &["dynamics.evolve"]);
    let lvn_iso = (|| {
        let run = IntegratorConfig::new(Scheme::IsospectralExp, cfg.dt, cfg.t_end, stride)?;
        let g = h6.clone();
        let traj = evolve(&IsospectralExp(move |_: &Matrix| g.clone()), &rho6, &run, &trace_monitors(n6)?)?;
        let eig = spectrum_drift(&traj.states)?;
        let traces = traj.monitors.iter().map(|(_, v)| relative_drift(v)).fold(0.0, f64::max);
        Ok((eig, traces))
    })();
    s.upper("dynamics.lvn.isospectral_eigenvalue_drift", lvn_iso.clone().map(|p| p.0), 1e-11, &["dynamics.evolve"]);
    s.upper("dynamics.lvn.isospectral_trace_power_drift", lvn_iso.map(|p| p.1), 1e-11, &["dynamics.evolve"]);
    let per_step = (|| {
        let nl = nonlinear.clone();
        let mut rho = rho0.clone();
        let mut w = 0.0f64;
        for _ in 0..50 {
            let next = isospectral_step(&nl, &rho, 0.05)?;
            let a = linalg::hermitian_eigenvalues(&rho)?;
            let b = linalg::hermitian_eigenvalues(&next)?;
            w = w.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            for k in 1..=5 {
                w = w.max((rho.pow(k).trace() - next.pow(k).trace()).norm());
            }
            rho = next;
        }
        Ok(w)
    })();
    s.upper("dynamics.isospectral.per_step_spectrum_and_traces", per_step, 1e-11, &["dynamics.isospectral_step"]);

    let records = (|| {
        let one = IntegratorConfig::new(Scheme::Rk4, 0.1, 0.1, 1)?;
        let t = evolve(&Rk4(|m: &Matrix| m.clone()), &rho0, &one, &[])?;
        Ok((t.len() as f64 - 2.0).abs())
    })();
    s.upper("dynamics.evolve.single_step_two_records", records, 0.0, &["dynamics.evolve"]);
    let reversal = exact.and_then(|ex| {
        let g = gen_h.clone();
        let fwd = advance(&Rk4(|m: &Matrix| commutator(&g, m).expect("square")), &rho0, 0.05, 20)?;
        let fwd_err = (&fwd - &ex).op_norm()?;
        let back = advance(&Rk4(|m: &Matrix| -&commutator(&g, m).expect("square")), &fwd, 0.05, 20)?;
        Ok((&back - &rho0).op_norm()? / (10.0 * fwd_err))
    });
    s.upper("dynamics.evolve.time_reversal_over_10x_forward_error", reversal, 1.0, &["dynamics.evolve"]);
    let determinism = (|| {
        let run = IntegratorConfig::new(Scheme::Rk4, 0.01, 1.0, 7)?;
        let nl = nonlinear.clone();
        let field = Rk4(move |m: &Matrix| commutator(&nl(m), m).expect("square"));
        let a = evolve(&field, &rho0, &run, &trace_monitors(d)?)?;
        let b = evolve(&field, &rho0, &run, &trace_monitors(d)?)?;
        Ok(if a == b { 0.0 } else { 1.0 })
    })();
    s.upper("dynamics.evolve.bitwise_determinism", determinism, 0.0, &["dynamics.evolve"]);
    let noether_trivial = (|| {
        let run = IntegratorConfig::new(Scheme::Rk4, 0.1, 1.0, 1)?;
        let traj = evolve(&Rk4(|m: &Matrix| Matrix::zeros(m.dim())), &rho0, &run, &[])?;
        let constant = noether_drift(|_: &Matrix| Matrix::identity(2), &traj)?;
        Ok(constant.max(noether_drift(|m: &Matrix| m.clone(), &traj)?))
    })();
    s.upper("dynamics.noether.trivial_maps", noether_trivial, 0.0, &["dynamics.noether_drift"]);
    let identity_collective = collective_defect(
        |m: &Matrix| Ok(m.clone()),
        &Rk4(|m: &Matrix| commutator(&gen_h, m).expect("square")),
        &Rk4(|m: &Matrix| commutator(&gen_h, m).expect("square")),
        &rho0,
        1.0,
        0.01,
    );
    s.upper("dynamics.collective.identity_map", identity_collective, DEFAULT_TOL, &["dynamics.collective_defect"]);
}

/// `Re tr(L^k) / k` for `k = 1..=4` through the `h_k` observables.
fn hk_values(lp: &LaxPair) -> Result<Vec<f64>> {
    (1..=4).map(|k| Ok(toda_hk(lp, k)?.eval(lp.rho_minus()).re)).collect()
}

fn spectrum_relative_drift(series: &[Vec<Complex64>]) -> f64 {
    let first = &series[0];
    let scale = first.iter().map(|z| z.norm()).fold(1.0, f64::max);
    series
        .iter()
        .flat_map(|ev| ev.iter().zip(first).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max)
        / scale
}

/// `((canonical h drift, spectrum drift), (lax h drift, spectrum drift), noether drift)`.
type FlowDrifts = ((f64, f64), (f64, f64), f64);

fn toda_flows(cfg: &VerifyConfig, s0: &TodaState) -> Result<FlowDrifts> {
    let stride = ((cfg.t_end / cfg.dt).round() as usize / 1000).max(1);
    let run = IntegratorConfig::new(Scheme::Rk4, cfg.dt, cfg.t_end, stride)?;
    let lp0 = flaschka(s0)?;
    let observables: Vec<Observable> = (1..=4).map(|k| toda_hk(&lp0, k)).collect::<Result<_>>()?;

    let canonical_monitors: Vec<Monitor<TodaState>> = observables
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let h = h.clone();
            Monitor::new(format!("h{}", k + 1), move |s: &TodaState| {
                flaschka(s).map(|lp| h.eval(lp.rho_minus()).re).unwrap_or(f64::NAN)
            })
        })
        .collect();
    let up = evolve(&Rk4(canonical_rhs), s0, &run, &canonical_monitors)?;
    let up_h = up.monitors.iter().map(|(_, v)| relative_drift(v)).fold(0.0, f64::max);
    let up_spec: Vec<Vec<Complex64>> =
        up.states.iter().map(|s| lax_spectrum(&flaschka(s)?)).collect::<Result<_>>()?;
    let noether = noether_drift(
        |s: &TodaState| flaschka(s).and_then(|lp| hk_values(&lp)).map(|v| Matrix::diag_real(&v)).unwrap_or_else(|_| Matrix::identity(4).scale_re(f64::NAN)),
        &up,
    )? / hk_values(&lp0)?.iter().map(|v| v.abs()).fold(1.0, f64::max);

    let lax_monitors: Vec<Monitor<LaxPair>> = observables
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let h = h.clone();
            Monitor::new(format!("h{}", k + 1), move |lp: &LaxPair| h.eval(lp.rho_minus()).re)
        })
        .collect();
    let down = evolve(&Rk4(lax_field), &lp0, &run, &lax_monitors)?;
    let down_h = down.monitors.iter().map(|(_, v)| relative_drift(v)).fold(0.0, f64::max);
    let down_spec: Vec<Vec<Complex64>> = down.states.iter().map(lax_spectrum).collect::<Result<_>>()?;
    Ok((
        (up_h, spectrum_relative_drift(&up_spec)),
        (down_h, spectrum_relative_drift(&down_spec)),
        noether,
    ))
}

fn toda_checks(cfg: &VerifyConfig, s: &mut Suite) {
    let n = cfg.samples;
    let nt = cfg.toda_dim;
    s.upper(
        "toda.hamiltonian.summation_oracle_relative",
        worst(cfg, 100, n, |r, _| {
            let st = random_toda(r, nt);
            let mut oracle = 0.0;
            for k in (0..nt - 1).rev() {
                oracle += st.alpha[k] * st.lambda[k] * st.x[k].exp();
            }
            for k in (0..nt).rev() {
                oracle += 0.5 * st.p[k] * st.p[k];
            }
            let h = toda_hamiltonian(&st)?;
            Ok((h - oracle).abs() / h.abs().max(1.0))
        }),
        1e-14,
        &["toda.toda_hamiltonian"],
    );
    s.upper(
        "toda.hamiltonian.equals_half_trace_square",
        worst(cfg, 101, n, |r, _| {
            let st = random_toda(r, nt);
            let lp = flaschka(&st)?;
            let h2 = toda_hk(&lp, 2)?.eval(lp.rho_minus());
            let h = toda_hamiltonian(&st)?;
            Ok((h2 - c64(h, 0.0)).norm() / h.abs().max(1.0))
        }),
        DEFAULT_TOL,
        &["toda.toda_hamiltonian", "toda.flaschka", "toda.toda_hk"],
    );
    s.upper(
        "toda.canonical_field.momentum_balance",
        worst(cfg, 102, n, |r, _| {
            let st = random_toda(r, nt);
            Ok(canonical_field(&st)?.dp.iter().sum::<f64>().abs())
        }),
        DEFAULT_TOL,
        &["toda.canonical_field"],
    );
    s.upper(
        "toda.intertwining",
        worst(cfg, 103, n, |r, _| intertwining_defect(&random_toda(r, nt))),
        DEFAULT_TOL,
        &["toda.intertwining_defect"],
    );
    s.upper(
        "toda.involution_j_k_le_5",
        worst(cfg, 104, n.div_ceil(2), |r, _| {
            let lp = flaschka(&random_toda(r, nt))?;
            let mut w = 0.0f64;
            for j in 1..=5 {
                for k in 1..=5 {
                    w = w.max(involution_defect(&lp, j, k)?);
                }
            }
            Ok(w)
        }),
        1e-10,
        &["toda.involution_defect"],
    );
    s.upper(
        "toda.lax_field.reversed_order_is_time_reversal",
        worst(cfg, 105, n, |r, _| {
            let st = random_toda(r, nt);
            let lp = flaschka(&st)?;
            let up = flaschka_tangent(&st, &canonical_field(&st)?);
            Ok(diff(&lax_field_reversed(&lp), &-&lax_field(&lp)).max(diff(&lax_field_reversed(&lp), &-&up)))
        }),
        DEFAULT_TOL,
        &["toda.lax_field"],
    );
    s.upper(
        "toda.lax_field.lower_and_traceless",
        worst(cfg, 106, n, |r, _| {
            let lp = flaschka(&random_toda(r, nt))?;
            let f = lax_field(&lp);
            Ok(diff(&project_lower(&f), &f).max(f.trace().norm()))
        }),
        DEFAULT_TOL,
        &["toda.lax_field"],
    );
    s.upper(
        "toda.trace_condition",
        worst(cfg, 107, n, |r, _| {
            let a = LaxPair::shift_from_weights(&random_toda(r, nt).alpha);
            let (x, y) = (gen(r, nt), gen(r, nt));
            let lower_pair = trace_condition_defect(&a, &project_strictly_lower(&x), &project_strictly_lower(&y));
            let upper_pair = trace_condition_defect(&a, &project_upper_plus(&x), &project_upper_plus(&y));
            Ok(lower_pair.max(upper_pair))
        }),
        DEFAULT_TOL,
        &[],
    );
    s.upper(
        "toda.hk.gradient_vs_lower_finite_difference",
        worst(cfg, 108, n, |r, _| {
            let st = random_toda(r, nt);
            let lp = flaschka(&st)?;
            let k = 1 + r.random_range(1..5u32);
            let hk = toda_hk(&lp, k)?;
            let rho = lp.rho_minus();
            let grad = hk.gradient(rho);
            let t = FD_STEP;
            let mut w = 0.0f64;
            for i in 0..nt {
                for j in 0..=i {
                    let e = Matrix::unit(nt, i, j);
                    let fd = (hk.eval(&rho.axpy(t, &e)) - hk.eval(&rho.axpy(-t, &e))) / (2.0 * t);
                    w = w.max((fd - grad.get(j, i)).norm() / grad.get(j, i).norm().max(1.0));
                }
            }
            Ok(w)
        }),
        1e-6,
        &["toda.toda_hk"],
    );
    s.upper(
        "toda.flaschka.inverse_round_trip",
        worst(cfg, 109, n, |r, _| {
            let st = random_toda(r, nt);
            let back = inverse_flaschka(&flaschka(&st)?, &st.alpha, &st.lambda)?;
            let dx = back.x.iter().zip(&st.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let dp = back.p.iter().zip(&st.p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok(dx.max(dp))
        }),
        DEFAULT_TOL,
        &["toda.flaschka"],
    );
    let mut r = instance_rng(cfg.seed, 110, 0);
    let s0 = random_toda(&mut r, nt);
    let flows = toda_flows(cfg, &s0);
    let pick = |f: fn(&FlowDrifts) -> f64| flows.as_ref().map(f).map_err(Clone::clone);
    s.upper("toda.conservation.canonical_hk_drift", pick(|f| f.0 .0), 1e-8, &["dynamics.evolve", "toda.canonical_field"]);
    s.upper("toda.conservation.canonical_spectrum_drift", pick(|f| f.0 .1), 1e-8, &["dynamics.evolve"]);
    s.upper("toda.conservation.lax_hk_drift", pick(|f| f.1 .0), 1e-8, &["dynamics.evolve", "toda.lax_field"]);
    s.upper("toda.conservation.lax_spectrum_drift", pick(|f| f.1 .1), 1e-8, &["dynamics.evolve"]);
    s.upper("toda.noether.hk_momentum_drift_relative", pick(|f| f.2), 1e-8, &["dynamics.noether_drift"]);
    let collective = collective_defect(flaschka, &Rk4(lax_field), &Rk4(canonical_rhs), &s0, 1.0, 1e-3);
    s.upper("toda.collective.flaschka_commutes_with_flows", collective, 1e-6, &["dynamics.collective_defect"]);
}

fn fixture_checks(cfg: &VerifyConfig, s: &mut Suite) {
    let mut mismatches = 0usize;
    for kind in FixtureKind::ALL {
        for d in [2, 5] {
            mismatches += (seeded_random_state(cfg.seed, kind, d) != seeded_random_state(cfg.seed, kind, d)) as usize;
        }
    }
    s.upper("fixtures.determinism", Ok(mismatches as f64), 0.0, &["cli.seeded_random_state"]);
    let psd = (|| {
        let mut w = 0.0f64;
        for d in 2..=cfg.max_dim {
            let m = seeded_random_state(cfg.seed, FixtureKind::Psd, d).into_matrix().expect("matrix kind");
            w = w.max(-linalg::hermitian_eigenvalues(&m)?[0]);
        }
        Ok(w.max(0.0))
    })();
    s.upper("fixtures.psd_min_eigenvalue_nonnegative", psd, 1e-12, &["cli.seeded_random_state"]);
    let toda = seeded_random_state(cfg.seed, FixtureKind::Toda, cfg.toda_dim)
        .into_toda()
        .map(|t| t.p.iter().sum::<f64>().abs())
        .ok_or(Error::InvalidArgument("toda fixture".into()));
    s.upper("fixtures.toda_momentum_sum", toda, DEFAULT_TOL, &["cli.seeded_random_state"]);
}
