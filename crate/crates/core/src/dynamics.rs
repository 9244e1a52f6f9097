//! Fixed-step integration of Hamiltonian flows: classical RK4 on any phase
//! space, an isospectral exponential stepper for Liouville-von Neumann type
//! equations `rho' = [X(rho), rho]`, trajectory recording with monitors and
//! CSV export, and flow-level conservation checks.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{commutator_unchecked, Matrix};

/// A state space the integrators can move along.
pub trait Phase: Clone {
    type Tangent;
    /// `self + h * dir`.
    fn advance(&self, dir: &Self::Tangent, h: f64) -> Self;
    fn is_finite(&self) -> bool;
    /// Size of `self - other` (operator norm for matrix-valued states).
    fn deviation(&self, other: &Self) -> Result<f64>;
}

impl Phase for f64 {
    type Tangent = f64;
    fn advance(&self, dir: &f64, h: f64) -> f64 {
        self + h * dir
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn deviation(&self, other: &f64) -> Result<f64> {
        Ok((self - other).abs())
    }
}

impl Phase for Matrix {
    type Tangent = Matrix;
    fn advance(&self, dir: &Matrix, h: f64) -> Matrix {
        self.axpy(h, dir)
    }
    fn is_finite(&self) -> bool {
        Matrix::is_finite(self)
    }
    fn deviation(&self, other: &Matrix) -> Result<f64> {
        (self - other).op_norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    IsospectralExp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_stride() -> usize {
    1
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64, record_stride: usize) -> Result<Self> {
        let cfg = Self { scheme, dt, t_end, record_stride };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument("dt and t_end must be finite".into()));
        }
        if !(self.dt > 0.0 && self.t_end > 0.0) {
            return Err(Error::InvalidArgument("dt and t_end must be positive".into()));
        }
        if self.dt > self.t_end {
            return Err(Error::InvalidArgument("dt must not exceed t_end".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidArgument("record_stride must be positive".into()));
        }
        Ok(())
    }

    /// Number of fixed steps, `round(t_end / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

/// One fixed step of some scheme.
pub trait Stepper<S> {
    fn scheme(&self) -> Scheme;
    fn step(&self, s: &S, dt: f64) -> Result<S>;
}

/// Classical RK4 for `s' = field(s)`.
pub fn rk4_step<S: Phase>(field: impl Fn(&S) -> S::Tangent, s: &S, dt: f64) -> S {
    let k1 = field(s);
    let k2 = field(&s.advance(&k1, dt / 2.0));
    let k3 = field(&s.advance(&k2, dt / 2.0));
    let k4 = field(&s.advance(&k3, dt));
    s.advance(&k1, dt / 6.0)
        .advance(&k2, dt / 3.0)
        .advance(&k3, dt / 3.0)
        .advance(&k4, dt / 6.0)
}

pub struct Rk4<F>(pub F);

impl<S: Phase, F: Fn(&S) -> S::Tangent> Stepper<S> for Rk4<F> {
    fn scheme(&self) -> Scheme {
        Scheme::Rk4
    }
    fn step(&self, s: &S, dt: f64) -> Result<S> {
        Ok(rk4_step(&self.0, s, dt))
    }
}

/// Isospectral step for `rho' = [X(rho), rho]`: `Q rho Q^-1` with
/// `Q = exp(dt X(rho_mid))` and `rho_mid` a half-step Euler predictor.
pub fn isospectral_step(generator: impl Fn(&Matrix) -> Matrix, rho: &Matrix, dt: f64) -> Result<Matrix> {
    let x0 = generator(rho);
    let mid = rho.axpy(dt / 2.0, &commutator_unchecked(&x0, rho));
    let xm = generator(&mid);
    let q = linalg::expm(&xm.scale_re(dt))?;
    let q_inv = linalg::expm(&xm.scale_re(-dt))?;
    Ok(&(&q * rho) * &q_inv)
}

pub struct IsospectralExp<G>(pub G);

impl<G: Fn(&Matrix) -> Matrix> Stepper<Matrix> for IsospectralExp<G> {
    fn scheme(&self) -> Scheme {
        Scheme::IsospectralExp
    }
    fn step(&self, s: &Matrix, dt: f64) -> Result<Matrix> {
        isospectral_step(&self.0, s, dt)
    }
}

/// A named scalar quantity sampled along a trajectory.
pub struct Monitor<S> {
    pub name: String,
    pub f: Box<dyn Fn(&S) -> f64 + Send + Sync>,
}

impl<S> Monitor<S> {
    pub fn new(name: impl Into<String>, f: impl Fn(&S) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Box::new(f) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub monitors: Vec<(String, Vec<f64>)>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }

    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// [`relative_drift`] of a named monitor.
    pub fn monitor_drift(&self, name: &str) -> Option<f64> {
        self.monitor(name).map(relative_drift)
    }
}

/// `max_t |m(t) - m(0)| / max(|m(0)|, 1)`; absolute drift for quantities below unit size.
pub fn relative_drift(series: &[f64]) -> f64 {
    let Some(&m0) = series.first() else { return 0.0 };
    let scale = m0.abs().max(1.0);
    series.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max) / scale
}

/// Integrates from `s0` to `cfg.t_end` in fixed steps, recording every
/// `record_stride` steps plus the final state.
pub fn evolve<S: Phase>(
    stepper: &dyn Stepper<S>,
    s0: &S,
    cfg: &IntegratorConfig,
    monitors: &[Monitor<S>],
) -> Result<Trajectory<S>> {
    cfg.validate()?;
    if stepper.scheme() != cfg.scheme {
        return Err(Error::InvalidArgument(format!(
            "stepper scheme {:?} does not match configured {:?}",
            stepper.scheme(),
            cfg.scheme
        )));
    }
    let steps = cfg.steps();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        monitors: monitors.iter().map(|m| (m.name.clone(), Vec::new())).collect(),
    };
    let record = |traj: &mut Trajectory<S>, t: f64, s: &S| {
        traj.times.push(t);
        traj.states.push(s.clone());
        for (slot, m) in traj.monitors.iter_mut().zip(monitors) {
            slot.1.push((m.f)(s));
        }
    };
    record(&mut traj, 0.0, s0);
    let mut s = s0.clone();
    for i in 1..=steps {
        s = stepper.step(&s, cfg.dt)?;
        let t = i as f64 * cfg.dt;
        if !s.is_finite() {
            return Err(Error::NonFiniteState { step: i, time: t });
        }
        if i % cfg.record_stride == 0 || i == steps {
            record(&mut traj, t, &s);
        }
    }
    Ok(traj)
}

/// Advances `s0` by `steps` fixed steps without recording.
pub fn advance<S: Phase>(stepper: &dyn Stepper<S>, s0: &S, dt: f64, steps: usize) -> Result<S> {
    let mut s = s0.clone();
    for i in 1..=steps {
        s = stepper.step(&s, dt)?;
        if !s.is_finite() {
            return Err(Error::NonFiniteState { step: i, time: i as f64 * dt });
        }
    }
    Ok(s)
}

/// `max_t ||J(s_t) - J(s_0)||` in operator norm.
pub fn noether_drift<S>(j: impl Fn(&S) -> Matrix, traj: &Trajectory<S>) -> Result<f64> {
    let Some(first) = traj.states.first() else { return Ok(0.0) };
    let j0 = j(first);
    let mut worst = 0.0f64;
    for s in &traj.states[1..] {
        worst = worst.max((&j(s) - &j0).op_norm()?);
    }
    Ok(worst)
}

/// `|| J(sigma_up(t)(p)) - sigma_down(t)(J(p)) ||`, both sides integrated with
/// step `dt` for `round(t / dt)` steps.
pub fn collective_defect<P: Phase, B: Phase>(
    j: impl Fn(&P) -> Result<B>,
    down: &dyn Stepper<B>,
    up: &dyn Stepper<P>,
    p0: &P,
    t: f64,
    dt: f64,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if !(dt > 0.0 && t > 0.0) {
        return Err(Error::InvalidArgument("t and dt must be positive".into()));
    }
    let steps = (t / dt).round().max(1.0) as usize;
    let upstairs = advance(up, p0, dt, steps)?;
    let downstairs = advance(down, &j(p0)?, dt, steps)?;
    j(&upstairs)?.deviation(&downstairs)
}

/// Column layout for CSV export.
pub trait CsvColumns {
    fn column_names(&self) -> Vec<String>;
    fn column_values(&self) -> Vec<f64>;
}

impl CsvColumns for Matrix {
    fn column_names(&self) -> Vec<String> {
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n * n);
        for i in 1..=n {
            for j in 1..=n {
                out.push(format!("re_{i}_{j}"));
                out.push(format!("im_{i}_{j}"));
            }
        }
        out
    }
    fn column_values(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `t,<state columns>,<monitor names>` followed by one row per record.
pub fn write_csv<S: CsvColumns, W: Write>(traj: &Trajectory<S>, mut out: W) -> std::io::Result<()> {
    let mut header = vec!["t".to_string()];
    if let Some(s) = traj.states.first() {
        header.extend(s.column_names());
    }
    header.extend(traj.monitors.iter().map(|(n, _)| n.clone()));
    writeln!(out, "{}", header.join(","))?;
    for (k, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![format_float(*t)];
        row.extend(s.column_values().into_iter().map(format_float));
        row.extend(traj.monitors.iter().map(|(_, v)| format_float(v[k])));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
