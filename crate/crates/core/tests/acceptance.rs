//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! console. The process exits non-zero when any criterion's verdict differs
//! from `EXPECTED_FAIL` (empty except for criterion 3, see below).

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lie_poisson_core::dynamics::{
    advance, collective_defect, evolve, isospectral_step, relative_drift, IntegratorConfig, IsospectralExp, Monitor, Rk4,
    Scheme,
};
use lie_poisson_core::fixtures::{
    random_general, random_hermitian, random_lower, random_psd, random_skew_hermitian, random_toda, random_unitary,
    stream_rng,
};
use lie_poisson_core::operator::{commutator, trace_norm, DEFAULT_TOL};
use lie_poisson_core::orbit::{characteristic_rank, kks_eval, kks_welldefined_defect, OrbitPoint};
use lie_poisson_core::poisson::{
    jacobi_defect, leibniz_defect, lp_bracket, poisson_map_defect, reduction_condition_defect, BracketSpec,
    LowerInclusion, Observable, SkewHermitianProjection,
};
use lie_poisson_core::reduction::{cyclic_phase_group, ReductionOp, CONTRACTION_SLACK};
use lie_poisson_core::toda::{
    canonical_rhs, flaschka, intertwining_defect, involution_defect, lax_field, lax_spectrum, toda_hk, LaxPair,
};
use lie_poisson_core::{c64, linalg, Complex64, DecompositionOfUnity, Matrix, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Triangular truncation is not a trace-norm contraction: `[[1,1],[1,1]]` has
/// trace norm 2 while its lower part `[[1,0],[1,1]]` has trace norm sqrt(5).
/// Criterion 3 demands contraction for all three reduction kinds, so it fails
/// for that kind. Every other part of criterion 3 is still measured.
const EXPECTED_FAIL: &[u32] = &[3];

const SEED: u64 = 20_240_601;

struct Measure {
    label: String,
    value: f64,
    tol: f64,
    /// `true`: pass iff value <= tol; `false`: pass iff value > tol.
    upper: bool,
}

impl Measure {
    fn pass(&self) -> bool {
        if self.upper { self.value <= self.tol } else { self.value > self.tol }
    }
}

#[derive(Default)]
struct Criterion {
    measures: Vec<Measure>,
}

impl Criterion {
    fn upper(&mut self, label: impl Into<String>, value: Result<f64>, tol: f64) {
        let value = value.unwrap_or(f64::NAN);
        self.measures.push(Measure { label: label.into(), value, tol, upper: true });
    }

    fn exceeds(&mut self, label: impl Into<String>, value: Result<f64>, bound: f64) {
        let value = value.unwrap_or(f64::NAN);
        self.measures.push(Measure { label: label.into(), value, tol: bound, upper: false });
    }

    fn runtime(&mut self, label: &str, elapsed: Duration, budget: f64) {
        self.upper(format!("{label} runtime [s]"), Ok(elapsed.as_secs_f64()), budget);
    }

    fn pass(&self) -> bool {
        self.measures.iter().all(Measure::pass)
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    stream_rng(SEED, 1000 + stream)
}

fn scaled(m: Matrix) -> Matrix {
    let n = m.dim() as f64;
    m.scale_re(1.0 / n.sqrt())
}

fn gen(r: &mut ChaCha8Rng, d: usize) -> Matrix {
    scaled(random_general(r, d))
}

fn worst(count: usize, mut f: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
    let mut w = 0.0f64;
    for i in 0..count {
        let v = f(i)?;
        w = if v.is_nan() { f64::NAN } else { w.max(v) };
    }
    Ok(w)
}

// ---------------------------------------------------------------- criterion 1

fn specs(d: usize) -> [(&'static str, BracketSpec); 4] {
    [
        ("full", BracketSpec::Full),
        ("lower_coinduced", BracketSpec::LowerCoinduced),
        ("hermitian_real", BracketSpec::HermitianReal),
        ("product", BracketSpec::product(BracketSpec::Full, BracketSpec::LowerCoinduced, d / 2)),
    ]
}

fn state_for(spec: &BracketSpec, r: &mut ChaCha8Rng, d: usize) -> Matrix {
    match spec {
        BracketSpec::Full => gen(r, d),
        BracketSpec::LowerCoinduced => scaled(random_lower(r, d)),
        BracketSpec::HermitianReal => scaled(random_skew_hermitian(r, d)),
        BracketSpec::Product { left, right, split } => {
            let a = state_for(left, r, *split);
            let b = state_for(right, r, d - split);
            Matrix::block_diag(&a, &b)
        }
    }
}

/// Generators giving real-valued observables for the real bracket.
fn obs_gen(spec: &BracketSpec, r: &mut ChaCha8Rng, d: usize) -> Matrix {
    match spec {
        BracketSpec::HermitianReal => scaled(random_skew_hermitian(r, d)),
        _ => gen(r, d),
    }
}

fn quad(spec: &BracketSpec, r: &mut ChaCha8Rng, d: usize) -> Observable {
    Observable::quadratic(obs_gen(spec, r, d), obs_gen(spec, r, d))
}

fn lin(spec: &BracketSpec, r: &mut ChaCha8Rng, d: usize) -> Observable {
    Observable::linear(obs_gen(spec, r, d))
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    for (k, name) in ["full", "lower_coinduced", "hermitian_real", "product"].into_iter().enumerate() {
        let mut r = rng(10 + k as u64);
        let (mut anti, mut leib, mut jac_lin, mut jac_quad) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let outcome = (|| -> Result<()> {
            for i in 0..100 {
                let d = 2 + i % 5;
                let spec = specs(d)[k].1.clone();
                let rho = state_for(&spec, &mut r, d);
                let (f, g, h) = (quad(&spec, &mut r, d), quad(&spec, &mut r, d), lin(&spec, &mut r, d));
                anti = anti.max((lp_bracket(&spec, &f, &g, &rho)? + lp_bracket(&spec, &g, &f, &rho)?).norm());
                leib = leib.max(leibniz_defect(&spec, &f, &h, &g, &rho)?);
                let (a, b, e) = (lin(&spec, &mut r, d), lin(&spec, &mut r, d), lin(&spec, &mut r, d));
                leib = leib.max(leibniz_defect(&spec, &a, &b, &e, &rho)?);
                jac_lin = jac_lin.max(jacobi_defect(&spec, &a, &b, &e, &rho)?);
                if i % 4 == 0 {
                    jac_quad = jac_quad.max(jacobi_defect(&spec, &f, &g, &quad(&spec, &mut r, d), &rho)?);
                }
            }
            Ok(())
        })();
        let fix = |v: f64| if outcome.is_ok() { Ok(v) } else { Ok(f64::NAN) };
        c.upper(format!("{name}: antisymmetry"), fix(anti), DEFAULT_TOL);
        c.upper(format!("{name}: leibniz"), fix(leib), DEFAULT_TOL);
        c.upper(format!("{name}: jacobi, linear"), fix(jac_lin), DEFAULT_TOL);
        c.upper(format!("{name}: jacobi, quadratic, nested differences"), fix(jac_quad), 1e-5);
    }
    c.runtime("criterion 1", start.elapsed(), 5.0);
    c
}

// ---------------------------------------------------------------- criterion 2

/// `tr(rho^k) / k`, evaluated directly rather than through `casimir`.
fn lvn_monitors() -> Vec<Monitor<Matrix>> {
    (1..=4u32).map(|k| Monitor::new(format!("T{k}"), move |m: &Matrix| (m.pow(k).trace() / k as f64).re)).collect()
}

fn max_eigenvalue_drift(states: &[Matrix]) -> Result<f64> {
    let first = linalg::hermitian_eigenvalues(&states[0])?;
    worst(states.len(), |i| {
        let ev = linalg::hermitian_eigenvalues(&states[i])?;
        Ok(ev.iter().zip(&first).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    })
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let n = 6;
    let mut r = rng(20);
    let h = scaled(random_hermitian(&mut r, n));
    let rho0 = random_psd(&mut r, n);
    let gen_h = h.scale(c64(0.0, -1.0));
    let monitors = lvn_monitors();

    let ic = IntegratorConfig::new(Scheme::Rk4, 1e-3, 10.0, 10).unwrap();
    let g = gen_h.clone();
    let rk4 = evolve(&Rk4(move |m: &Matrix| commutator(&g, m).expect("square")), &rho0, &ic, &monitors);
    for k in 1..=4 {
        let drift = rk4.as_ref().map(|t| relative_drift(t.monitor(&format!("T{k}")).unwrap())).map_err(Clone::clone);
        c.upper(format!("rk4: relative drift of tr(rho^{k})/{k}"), drift, 1e-8);
    }

    let ic = IntegratorConfig::new(Scheme::IsospectralExp, 1e-3, 10.0, 10).unwrap();
    let g = gen_h.clone();
    let iso = evolve(&IsospectralExp(move |_: &Matrix| g.clone()), &rho0, &ic, &monitors);
    c.upper(
        "isospectral_exp: eigenvalue drift",
        iso.and_then(|t| max_eigenvalue_drift(&t.states)),
        1e-11,
    );
    c.runtime("criterion 2", start.elapsed(), 10.0);
    c
}

// ---------------------------------------------------------------- criterion 3

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Measurement,
    LowerTriangularize,
    GroupAverage,
}

fn random_sizes(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut left = n;
    let mut sizes = Vec::new();
    while left > 0 {
        let s = r.random_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    sizes
}

fn random_reduction(kind: Kind, r: &mut ChaCha8Rng, n: usize) -> Result<ReductionOp> {
    match kind {
        Kind::Measurement | Kind::LowerTriangularize => {
            let u = random_unitary(r, n);
            let sizes = random_sizes(r, n);
            let d = DecompositionOfUnity::from_unitary_columns(&u, &sizes)?;
            Ok(if kind == Kind::Measurement { ReductionOp::measurement(d) } else { ReductionOp::lower_triangularize(d) })
        }
        Kind::GroupAverage => {
            let v = random_unitary(r, n);
            let order = r.random_range(2..=4);
            let group = cyclic_phase_group(n, order).iter().map(|g| &(&v * g) * &v.adjoint()).collect();
            ReductionOp::group_average(group)
        }
    }
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::default();
    let kinds = [
        ("measurement", Kind::Measurement),
        ("lower_triangularize", Kind::LowerTriangularize),
        ("group_average", Kind::GroupAverage),
    ];
    for (k, (name, kind)) in kinds.into_iter().enumerate() {
        let mut r = rng(30 + k as u64);
        let mut sub = [0.0f64; 5];
        let outcome = (|| -> Result<()> {
            for i in 0..100 {
                let d = 1 + i % 8;
                let op = random_reduction(kind, &mut r, d)?;
                let rho = gen(&mut r, d);
                let once = op.apply(&rho)?;
                sub[0] = sub[0].max((&op.apply(&once)? - &once).max_abs());
                sub[1] = sub[1].max(trace_norm(&once)? - trace_norm(&rho)?);
                sub[2] = sub[2].max(op.closure_defect(&gen(&mut r, d), &gen(&mut r, d))?);
                let f = Observable::linear(op.apply_dual(&gen(&mut r, d))?);
                let g = Observable::linear(op.apply_dual(&gen(&mut r, d))?);
                let projection = poisson_map_defect(Arc::new(op.clone()), &BracketSpec::Full, &BracketSpec::Full, &f, &g, &rho)?;
                sub[3] = sub[3].max(projection);
                if kind != Kind::LowerTriangularize {
                    let psd = random_psd(&mut r, d);
                    sub[4] = sub[4].max(if op.positivity_check(&psd)? { 0.0 } else { 1.0 });
                }
            }
            Ok(())
        })();
        let v = |x: f64| if outcome.is_ok() { Ok(x) } else { Ok(f64::NAN) };
        c.upper(format!("{name}: idempotence"), v(sub[0]), DEFAULT_TOL);
        c.upper(format!("{name}: trace-norm excess ||R rho||_1 - ||rho||_1"), v(sub[1].max(0.0)), CONTRACTION_SLACK);
        c.upper(format!("{name}: dual image closure"), v(sub[2]), DEFAULT_TOL);
        c.upper(format!("{name}: poisson projection"), v(sub[3]), DEFAULT_TOL);
        if kind != Kind::LowerTriangularize {
            c.upper(format!("{name}: psd and trace preserved (0 = yes)"), v(sub[4]), 0.0);
        }
    }
    c
}

// ---------------------------------------------------------------- criterion 4

fn hk_monitor_values(lp: &LaxPair) -> Result<Vec<f64>> {
    (1..=4).map(|k| Ok(toda_hk(lp, k)?.eval(lp.rho_minus()).re)).collect()
}

fn spectrum_relative_drift(series: &[Vec<Complex64>]) -> f64 {
    let first = &series[0];
    let scale = first.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let diff = series.iter().flat_map(|ev| ev.iter().zip(first).map(|(a, b)| (a - b).norm())).fold(0.0, f64::max);
    diff / scale
}

fn hk_drifts(lax_states: &[LaxPair]) -> Result<[f64; 4]> {
    let values: Vec<Vec<f64>> = lax_states.iter().map(hk_monitor_values).collect::<Result<_>>()?;
    Ok(std::array::from_fn(|k| relative_drift(&values.iter().map(|v| v[k]).collect::<Vec<_>>())))
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let n = 8;
    let mut r = rng(40);
    let weights_ok = random_toda(&mut r, n).alpha.iter().enumerate().all(|(k, a)| *a == 0.5f64.powi(k as i32 + 1));
    c.upper("weights are 2^-k (0 = yes)", Ok(if weights_ok { 0.0 } else { 1.0 }), 0.0);
    c.upper("intertwining, 100 states", worst(100, |_| intertwining_defect(&random_toda(&mut r, n))), DEFAULT_TOL);
    c.upper(
        "involution j,k <= 5, 50 states",
        worst(50, |_| {
            let lp = flaschka(&random_toda(&mut r, n))?;
            let mut w = 0.0f64;
            for j in 1..=5 {
                for k in 1..=5 {
                    w = w.max(involution_defect(&lp, j, k)?);
                }
            }
            Ok(w)
        }),
        1e-10,
    );

    let s0 = random_toda(&mut r, n);
    let ic = IntegratorConfig::new(Scheme::Rk4, 1e-3, 10.0, 100).unwrap();
    let canonical = evolve(&Rk4(canonical_rhs), &s0, &ic, &[]).and_then(|t| {
        t.states.iter().map(flaschka).collect::<Result<Vec<_>>>()
    });
    let lax = flaschka(&s0).and_then(|lp0| evolve(&Rk4(lax_field), &lp0, &ic, &[])).map(|t| t.states);
    for (flow, states) in [("canonical", canonical), ("lax", lax)] {
        let drifts = states.as_ref().map_err(Clone::clone).and_then(|s| hk_drifts(s));
        for k in 0..4 {
            c.upper(format!("{flow}: relative drift of h{}", k + 1), drifts.as_ref().map(|d| d[k]).map_err(Clone::clone), 1e-8);
        }
        let spectra = states.and_then(|s| s.iter().map(lax_spectrum).collect::<Result<Vec<_>>>());
        c.upper(format!("{flow}: relative drift of sorted spectrum of L"), spectra.map(|s| spectrum_relative_drift(&s)), 1e-8);
    }
    c.runtime("criterion 4", start.elapsed(), 10.0);
    c
}

// ---------------------------------------------------------------- criterion 5

fn criterion_5() -> Criterion {
    let mut c = Criterion::default();
    let mut r = rng(50);
    let defect = worst(5, |_| {
        let s0 = random_toda(&mut r, 8);
        collective_defect(flaschka, &Rk4(lax_field), &Rk4(canonical_rhs), &s0, 1.0, 1e-3)
    });
    c.upper("||flaschka(canonical(t) s) - lax(t)(flaschka s)||, t = 1, 5 states", defect, 1e-6);
    c
}

// ---------------------------------------------------------------- criterion 6

/// Matrices whose commutants range from minimal to large.
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
        2 => Matrix::from_fn(d, |a, b| if b == a + 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) }),
        _ => Matrix::identity(d).scale_re(0.5),
    }
}

/// Dimension of `{x : x rho = rho x}` from Gaussian elimination on
/// `I (x) rho - rho^T (x) I` acting on row-major `vec(x)`.
fn commutant_dim(rho: &Matrix) -> usize {
    let n = rho.dim();
    let m = n * n;
    let mut a = vec![vec![c64(0.0, 0.0); m]; m];
    // (x rho - rho x)_{ij} = sum_k x_ik rho_kj - rho_ik x_kj
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                a[row][i * n + k] += rho.get(k, j);
                a[row][k * n + j] -= rho.get(i, k);
            }
        }
    }
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-9 * scale;
    let mut rank = 0;
    for col in 0..m {
        let pivot = (rank..m).max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm()));
        let Some(p) = pivot else { break };
        if a[p][col].norm() <= tol {
            continue;
        }
        a.swap(rank, p);
        for row in rank + 1..m {
            let factor = a[row][col] / a[rank][col];
            if factor.norm() != 0.0 {
                for k in col..m {
                    let v = a[rank][k];
                    a[row][k] -= factor * v;
                }
            }
        }
        rank += 1;
    }
    m - rank
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::default();
    let mut r = rng(60);
    let (mut bilinear, mut anti, mut welldef, mut invariance, mut consistency, mut rank_mismatch) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let outcome = (|| -> Result<()> {
        for i in 0..100 {
            let d = 1 + i % 6;
            let rho = orbit_state(&mut r, d, i);
            let (x, x2, y) = (gen(&mut r, d), gen(&mut r, d), gen(&mut r, d));
            let (a, b) = (c64(r.random(), r.random()), c64(r.random(), r.random()));
            let comb = &x.scale(a) + &x2.scale(b);
            let lhs = kks_eval(&rho, &comb, &y)?;
            bilinear = bilinear.max((lhs - (a * kks_eval(&rho, &x, &y)? + b * kks_eval(&rho, &x2, &y)?)).norm());
            anti = anti.max((kks_eval(&rho, &x, &y)? + kks_eval(&rho, &y, &x)?).norm());
            let (c0, c1, c2) = (r.random::<f64>(), r.random::<f64>(), r.random::<f64>());
            let z = &(&Matrix::identity(d).scale_re(c0) + &rho.scale_re(c1)) + &rho.pow(2).scale_re(c2);
            welldef = welldef.max(kks_welldefined_defect(&rho, &x, &(&x + &z), &y)?);
            let point = OrbitPoint::new(random_unitary(&mut r, d), rho.clone())?;
            let moved = kks_eval(point.current(), &point.transport(&x), &point.transport(&y))?;
            invariance = invariance.max((moved - kks_eval(&rho, &x, &y)?).norm());
            let br = lp_bracket(&BracketSpec::Full, &Observable::linear(x.clone()), &Observable::linear(y.clone()), &rho)?;
            consistency = consistency.max((br - kks_eval(&rho, &x, &y)?).norm());
            let expected = d * d - commutant_dim(&rho);
            rank_mismatch = rank_mismatch.max((characteristic_rank(&rho)? as f64 - expected as f64).abs());
        }
        Ok(())
    })();
    let v = |x: f64| if outcome.is_ok() { Ok(x) } else { Ok(f64::NAN) };
    c.upper("bilinearity", v(bilinear), DEFAULT_TOL);
    c.upper("antisymmetry", v(anti), DEFAULT_TOL);
    c.upper("well-definedness under commutant shifts", v(welldef), 1e-10);
    c.upper("conjugation invariance", v(invariance), 1e-10);
    c.upper("lp_bracket = kks_eval on linear observables", v(consistency), DEFAULT_TOL);
    c.upper("characteristic_rank - (N^2 - dim commutant)", v(rank_mismatch), 0.0);
    c
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7() -> Criterion {
    let mut c = Criterion::default();
    let mut r = rng(70);
    c.upper(
        "measurement",
        worst(100, |i| {
            let d = 1 + i % 6;
            let op = random_reduction(Kind::Measurement, &mut r, d)?;
            let (f, g) = (Observable::linear(gen(&mut r, d)), Observable::linear(gen(&mut r, d)));
            reduction_condition_defect(Arc::new(op), &f, &g, &gen(&mut r, d))
        }),
        DEFAULT_TOL,
    );
    c.upper(
        "skew_hermitian_part",
        worst(100, |i| {
            let d = 1 + i % 6;
            let (f, g) = (Observable::linear(gen(&mut r, d)), Observable::linear(gen(&mut r, d)));
            reduction_condition_defect(Arc::new(SkewHermitianProjection(d)), &f, &g, &gen(&mut r, d))
        }),
        DEFAULT_TOL,
    );
    c
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> Criterion {
    let mut c = Criterion::default();
    let n = 4;
    let mut r = rng(80);
    let h = scaled(random_hermitian(&mut r, n));
    let b = scaled(random_hermitian(&mut r, n));
    let rho0 = random_psd(&mut r, n);
    let gen_h = h.scale(c64(0.0, -1.0));

    let order = (|| -> Result<f64> {
        let exact = {
            let u = linalg::expm(&gen_h)?;
            &(&u * &rho0) * &u.adjoint()
        };
        let g = gen_h.clone();
        let stepper = Rk4(move |m: &Matrix| commutator(&g, m).expect("square"));
        let e1 = (&advance(&stepper, &rho0, 0.1, 10)? - &exact).op_norm()?;
        let e2 = (&advance(&stepper, &rho0, 0.05, 20)? - &exact).op_norm()?;
        Ok(e1 / e2)
    })();
    c.upper("rk4 |ratio/16 - 1| on the linear flow", order.map(|q| (q / 16.0 - 1.0).abs()), 0.2);

    let nonlinear = move |m: &Matrix| (&h + &(&(&b * m) * &b)).scale(c64(0.0, -1.0));
    let iso = (|| -> Result<f64> {
        let nl = nonlinear.clone();
        let reference = advance(&Rk4(move |m: &Matrix| commutator(&nl(m), m).expect("square")), &rho0, 1e-4, 10_000)?;
        let run = |dt: f64, steps: usize| -> Result<f64> {
            let mut s = rho0.clone();
            for _ in 0..steps {
                s = isospectral_step(&nonlinear, &s, dt)?;
            }
            (&s - &reference).op_norm()
        };
        Ok(run(0.05, 20)? / run(0.025, 40)?)
    })();
    c.upper("isospectral_step |ratio/4 - 1| on a state-dependent flow", iso.map(|q| (q / 4.0 - 1.0).abs()), 0.2);
    c
}

// ---------------------------------------------------------------- criterion 9

fn criterion_9() -> Criterion {
    let mut c = Criterion::default();
    // f = tr(E21 rho), g = tr(E12 rho) at rho = E11. On the full space the
    // bracket is tr([E21, E12] E11) = -1; through the inclusion both gradients
    // pull back to their upper parts, and upper(E21) = 0, so the coinduced side
    // is 0. The defect is exactly 1.
    let f = Observable::linear(Matrix::unit(2, 1, 0));
    let g = Observable::linear(Matrix::unit(2, 0, 1));
    let rho = Matrix::unit(2, 0, 0);
    let defect =
        poisson_map_defect(Arc::new(LowerInclusion(2)), &BracketSpec::LowerCoinduced, &BracketSpec::Full, &f, &g, &rho);
    c.upper("constructed defect equals 1 (|defect - 1|)", defect.clone().map(|d| (d - 1.0).abs()), DEFAULT_TOL);
    c.exceeds("inclusion of lower-triangular states into the full space", defect, 1e-3);
    c
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Criterion); 9] = [
        (1, "bracket axioms", criterion_1),
        (2, "casimir and isospectral conservation", criterion_2),
        (3, "quantum reduction laws", criterion_3),
        (4, "toda suite", criterion_4),
        (5, "collective flow commutation", criterion_5),
        (6, "KKS form", criterion_6),
        (7, "reduction condition", criterion_7),
        (8, "integrator order", criterion_8),
        (9, "negative control", criterion_9),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let result = run();
        let pass = result.pass();
        println!("criterion {id} ({title}): {}", if pass { "PASS" } else { "FAIL" });
        for m in &result.measures {
            let rel = if m.upper { "<=" } else { ">" };
            let mark = if m.pass() { "ok" } else { "VIOLATED" };
            println!("    {:<60} {:>12.3e} {rel} {:<8.1e} {mark}", m.label, m.value, m.tol);
        }
        if pass == EXPECTED_FAIL.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: verdicts match expectations (expected failures: {EXPECTED_FAIL:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected verdicts for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
