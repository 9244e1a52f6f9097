use std::path::{Path, PathBuf};

use lie_poisson_core::audit::{self, Check, Report, VerifyConfig};
use lie_poisson_core::batch;
use lie_poisson_core::dynamics::{
    evolve, relative_drift, write_csv, CsvColumns, IntegratorConfig, IsospectralExp, Monitor, Rk4, Scheme, Trajectory,
};
use lie_poisson_core::fixtures::{random_general, random_hermitian, random_unitary, seeded_random_state, stream_rng, streams, FixtureKind};
use lie_poisson_core::operator::{commutator, trace_norm, DecompositionOfUnity, DEFAULT_TOL};
use lie_poisson_core::orbit::{characteristic_rank, kks_eval, kks_null_directions, OrbitPoint};
use lie_poisson_core::poisson::{casimir, lp_bracket, BracketSpec, Observable};
use lie_poisson_core::reduction::{cyclic_phase_group, ReductionKind, ReductionOp, CONTRACTION_SLACK};
use lie_poisson_core::toda::{canonical_rhs, flaschka, lax_field, lax_spectrum, toda_hk, LaxPair, TodaState};
use lie_poisson_core::{c64, linalg, Error, Matrix, Result};
use serde::Serialize;

use crate::config::{LvnParams, OrbitParams, Plan, ReduceParams, RunConfig, TodaFlow, TodaParams, VerifyParams};

/// Files to write (relative to the output directory) and the overall verdict.
pub struct Outcome {
    pub files: Vec<(PathBuf, Vec<u8>)>,
    pub pass: bool,
}

fn check(name: impl Into<String>, defect: f64, tol: f64) -> Check {
    Check { name: name.into(), defect, tol, pass: defect <= tol }
}

fn report(checks: Vec<Check>) -> Report {
    let pass = checks.iter().all(|c| c.pass);
    Report { checks, pass }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

/// `dir/report.json` -> `dir/report.<suffix>`.
fn sibling(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    primary.with_file_name(format!("{stem}.{suffix}"))
}

fn csv_bytes<S: CsvColumns>(traj: &Trajectory<S>) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(traj, &mut buf).expect("writing to memory");
    buf
}

pub fn run(cfg: &RunConfig, plan: Plan) -> Result<Outcome> {
    let primary = PathBuf::from(&cfg.output_path);
    match plan {
        Plan::Verify(p, ic) => verify(cfg.seed, &p, &ic, primary),
        Plan::Toda(p, ic) => toda_run(cfg.seed, &p, &ic, primary),
        Plan::Lvn(p, ic) => lvn_run(cfg.seed, &p, &ic, primary),
        Plan::Reduce(p) => reduce_demo(cfg.seed, p, primary),
        Plan::Orbit(p) => orbit_kks(cfg.seed, p, primary),
    }
}

fn verify(seed: u64, p: &VerifyParams, ic: &IntegratorConfig, primary: PathBuf) -> Result<Outcome> {
    let vc = VerifyConfig { seed, samples: p.samples, max_dim: p.max_dim, toda_dim: p.toda_dim, t_end: ic.t_end, dt: ic.dt };
    let rep = audit::verify(&vc, &["cli.run"])?;
    Ok(Outcome { pass: rep.pass, files: vec![(primary, json(&rep))] })
}

fn hk_observables(lp: &LaxPair) -> Result<Vec<Observable>> {
    (1..=4).map(|k| toda_hk(lp, k)).collect()
}

fn spectrum_drift(spectra: &[Vec<lie_poisson_core::Complex64>]) -> f64 {
    let first = &spectra[0];
    let scale = first.iter().map(|z| z.norm()).fold(1.0, f64::max);
    spectra.iter().flat_map(|ev| ev.iter().zip(first).map(|(a, b)| (a - b).norm())).fold(0.0, f64::max) / scale
}

fn monitor_checks(prefix: &str, monitors: &[(String, Vec<f64>)], tol: f64) -> Vec<Check> {
    monitors.iter().map(|(name, v)| check(format!("{prefix}.{name}_drift"), relative_drift(v), tol)).collect()
}

fn toda_job(s0: &TodaState, flow: TodaFlow, ic: &IntegratorConfig, tol: f64) -> Result<(Vec<u8>, Vec<Check>)> {
    let lp0 = flaschka(s0)?;
    let hs = hk_observables(&lp0)?;
    let prefix = format!("toda-run.N{}.{}", s0.n, flow_name(flow));
    match flow {
        TodaFlow::Canonical => {
            let monitors: Vec<Monitor<TodaState>> = hs
                .into_iter()
                .enumerate()
                .map(|(k, h)| {
                    Monitor::new(format!("h{}", k + 1), move |s: &TodaState| {
                        flaschka(s).map(|lp| h.eval(lp.rho_minus()).re).unwrap_or(f64::NAN)
                    })
                })
                .collect();
            let traj = evolve(&Rk4(canonical_rhs), s0, ic, &monitors)?;
            let spectra = traj.states.iter().map(|s| lax_spectrum(&flaschka(s)?)).collect::<Result<Vec<_>>>()?;
            let mut checks = monitor_checks(&prefix, &traj.monitors, tol);
            checks.push(check(format!("{prefix}.spectrum_drift"), spectrum_drift(&spectra), tol));
            Ok((csv_bytes(&traj), checks))
        }
        TodaFlow::Lax => {
            let monitors: Vec<Monitor<LaxPair>> = hs
                .into_iter()
                .enumerate()
                .map(|(k, h)| Monitor::new(format!("h{}", k + 1), move |lp: &LaxPair| h.eval(lp.rho_minus()).re))
                .collect();
            let traj = evolve(&Rk4(lax_field), &lp0, ic, &monitors)?;
            let spectra = traj.states.iter().map(lax_spectrum).collect::<Result<Vec<_>>>()?;
            let mut checks = monitor_checks(&prefix, &traj.monitors, tol);
            checks.push(check(format!("{prefix}.spectrum_drift"), spectrum_drift(&spectra), tol));
            Ok((csv_bytes(&traj), checks))
        }
    }
}

fn flow_name(flow: TodaFlow) -> &'static str {
    match flow {
        TodaFlow::Canonical => "canonical",
        TodaFlow::Lax => "lax",
    }
}

fn collect_jobs(primary: &Path, results: Vec<Result<(String, Vec<u8>, Vec<Check>)>>) -> Result<Outcome> {
    let mut files = Vec::new();
    let mut checks = Vec::new();
    for r in results {
        let (suffix, csv, c) = r?;
        files.push((sibling(primary, &suffix), csv));
        checks.extend(c);
    }
    let rep = report(checks);
    files.insert(0, (primary.to_path_buf(), json(&rep)));
    Ok(Outcome { pass: rep.pass, files })
}

fn toda_run(seed: u64, p: &TodaParams, ic: &IntegratorConfig, primary: PathBuf) -> Result<Outcome> {
    let jobs: Vec<(usize, TodaFlow)> = p.dims.iter().flat_map(|&n| p.flows.iter().map(move |&f| (n, f))).collect();
    let results = batch::map(&jobs, |&(n, flow)| {
        let s0 = seeded_random_state(seed, FixtureKind::Toda, n).into_toda().expect("toda kind");
        let (csv, checks) = toda_job(&s0, flow, ic, p.drift_tol)?;
        Ok((format!("N{n}.{}.csv", flow_name(flow)), csv, checks))
    });
    collect_jobs(&primary, results)
}

fn lvn_job(seed: u64, n: usize, p: &LvnParams, ic: &IntegratorConfig) -> Result<(Vec<u8>, Vec<Check>)> {
    let scale = 1.0 / (n as f64).sqrt();
    let h = seeded_random_state(seed, FixtureKind::Hermitian, n).into_matrix().expect("matrix kind").scale_re(scale);
    let rho0 = seeded_random_state(seed, FixtureKind::Psd, n).into_matrix().expect("matrix kind");
    let b = random_hermitian(&mut stream_rng(seed, streams::COUPLING), n).scale_re(scale);
    let c = p.coupling;
    let generator = move |rho: &Matrix| {
        let dh = if c == 0.0 { h.clone() } else { &h + &(&(&b * rho) * &b).scale_re(c) };
        dh.scale(c64(0.0, -1.0))
    };
    let monitors: Vec<Monitor<Matrix>> = (1..=4u32)
        .map(|k| {
            let t = casimir(k, n)?;
            Ok(Monitor::new(format!("T{k}"), move |m: &Matrix| t.eval(m).re))
        })
        .collect::<Result<_>>()?;
    let traj = match ic.scheme {
        Scheme::Rk4 => {
            let g = generator.clone();
            evolve(&Rk4(move |m: &Matrix| commutator(&g(m), m).expect("square")), &rho0, ic, &monitors)?
        }
        Scheme::IsospectralExp => evolve(&IsospectralExp(generator), &rho0, ic, &monitors)?,
    };
    let prefix = format!("lvn-run.N{n}");
    let mut checks = monitor_checks(&prefix, &traj.monitors, p.drift_tol);
    let first = linalg::hermitian_eigenvalues(&traj.states[0])?;
    let mut drift = 0.0f64;
    for s in &traj.states {
        let ev = linalg::hermitian_eigenvalues(s)?;
        drift = drift.max(ev.iter().zip(&first).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let spectrum_tol = if ic.scheme == Scheme::IsospectralExp { p.spectrum_tol } else { p.drift_tol };
    checks.push(check(format!("{prefix}.eigenvalue_drift"), drift, spectrum_tol));
    Ok((csv_bytes(&traj), checks))
}

fn lvn_run(seed: u64, p: &LvnParams, ic: &IntegratorConfig, primary: PathBuf) -> Result<Outcome> {
    let results = batch::map(&p.dims, |&n| {
        let (csv, checks) = lvn_job(seed, n, p, ic)?;
        Ok((format!("N{n}.csv"), csv, checks))
    });
    collect_jobs(&primary, results)
}

fn default_reductions(seed: u64, n: usize) -> Result<Vec<ReductionOp>> {
    let mut rng = stream_rng(seed, streams::UNITARY);
    let u = random_unitary(&mut rng, n);
    let sizes: Vec<usize> = if n == 1 { vec![1] } else { vec![n / 2, n - n / 2] };
    let d = DecompositionOfUnity::from_unitary_columns(&u, &sizes)?;
    let v = random_unitary(&mut rng, n);
    let group = cyclic_phase_group(n, 3).iter().map(|g| &(&v * g) * &v.adjoint()).collect();
    Ok(vec![
        ReductionOp::measurement(d.clone()),
        ReductionOp::lower_triangularize(d),
        ReductionOp::group_average(group)?,
    ])
}

fn kind_name(op: &ReductionOp) -> &'static str {
    match op.kind() {
        ReductionKind::Measurement { .. } => "measurement",
        ReductionKind::LowerTriangularize { .. } => "lower_triangularize",
        ReductionKind::GroupAverage { .. } => "group_average",
    }
}

#[derive(Serialize)]
struct ReductionResult<'a> {
    reduction: &'a ReductionOp,
    output: Matrix,
}

#[derive(Serialize)]
struct ReductionArtifact<'a> {
    input: &'a Matrix,
    results: Vec<ReductionResult<'a>>,
}

fn reduce_demo(seed: u64, p: ReduceParams, primary: PathBuf) -> Result<Outcome> {
    let state = match p.state {
        Some(m) => m,
        None => seeded_random_state(seed, FixtureKind::Psd, p.n).into_matrix().expect("matrix kind"),
    };
    let n = state.dim();
    let ops = match p.reductions {
        Some(ops) => ops,
        None => default_reductions(seed, n)?,
    };
    let probes = {
        let mut rng = stream_rng(seed, FixtureKind::General.stream());
        (random_general(&mut rng, n), random_general(&mut rng, n))
    };
    let mut checks = Vec::new();
    let mut results = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        let prefix = format!("reduce-demo.{i}.{}", kind_name(op));
        let out = op.apply(&state)?;
        checks.push(check(format!("{prefix}.idempotence"), (&op.apply(&out)? - &out).max_abs(), DEFAULT_TOL));
        checks.push(check(format!("{prefix}.dual_image_closure"), op.closure_defect(&probes.0, &probes.1)?, DEFAULT_TOL));
        let excess = (trace_norm(&out)? - trace_norm(&state)?).max(0.0);
        checks.push(check(format!("{prefix}.trace_norm_contraction"), excess, CONTRACTION_SLACK));
        match op.positivity_check(&state) {
            Ok(ok) => checks.push(check(format!("{prefix}.positivity_and_trace"), if ok { 0.0 } else { 1.0 }, 0.0)),
            Err(Error::NotApplicable(_)) | Err(Error::Precondition(_)) => {}
            Err(e) => return Err(e),
        }
        results.push(ReductionResult { reduction: op, output: out });
    }
    let rep = report(checks);
    let artifact = ReductionArtifact { input: &state, results };
    Ok(Outcome {
        pass: rep.pass,
        files: vec![(primary.clone(), json(&rep)), (sibling(&primary, "matrices.json"), json(&artifact))],
    })
}

fn orbit_kks(seed: u64, p: OrbitParams, primary: PathBuf) -> Result<Outcome> {
    let rho = match p.state {
        Some(m) => m,
        None => {
            let m = seeded_random_state(seed, FixtureKind::General, p.n).into_matrix().expect("matrix kind");
            m.scale_re(1.0 / (p.n as f64).sqrt())
        }
    };
    let n = rho.dim();
    let scale = 1.0 / (n as f64).sqrt();
    let mut rng = stream_rng(seed, streams::KKS);
    let mut rows = vec![String::from(
        "sample,re_kks,im_kks,re_kks_swapped,im_kks_swapped,re_kks_conjugated,im_kks_conjugated,re_bracket,im_bracket",
    )];
    let (mut anti, mut invariance, mut consistency) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..p.samples {
        let x = random_general(&mut rng, n).scale_re(scale);
        let y = random_general(&mut rng, n).scale_re(scale);
        let point = OrbitPoint::new(random_unitary(&mut rng, n), rho.clone())?;
        let w = kks_eval(&rho, &x, &y)?;
        let swapped = kks_eval(&rho, &y, &x)?;
        let moved = kks_eval(point.current(), &point.transport(&x), &point.transport(&y))?;
        let bracket = lp_bracket(&BracketSpec::Full, &Observable::linear(x), &Observable::linear(y), &rho)?;
        anti = anti.max((w + swapped).norm());
        invariance = invariance.max((w - moved).norm());
        consistency = consistency.max((w - bracket).norm());
        let cells: Vec<String> = [w.re, w.im, swapped.re, swapped.im, moved.re, moved.im, bracket.re, bracket.im]
            .iter()
            .map(|v| lie_poisson_core::dynamics::format_float(*v))
            .collect();
        rows.push(format!("{k},{}", cells.join(",")));
    }
    let rank = characteristic_rank(&rho)?;
    let commutant = kks_null_directions(&rho)?.len();
    let rep = report(vec![
        check("orbit-kks.antisymmetry", anti, DEFAULT_TOL),
        check("orbit-kks.conjugation_invariance", invariance, 1e-10),
        check("orbit-kks.bracket_consistency", consistency, DEFAULT_TOL),
        check("orbit-kks.characteristic_rank_vs_commutant", (rank as f64 - (n * n - commutant) as f64).abs(), 0.0),
    ]);
    let mut table = rows.join("\n").into_bytes();
    table.push(b'\n');
    Ok(Outcome { pass: rep.pass, files: vec![(primary.clone(), json(&rep)), (sibling(&primary, "kks.csv"), table)] })
}
