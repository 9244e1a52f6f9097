//! Deterministic pseudo-random fixtures.
//!
//! Every fixture comes from ChaCha8 seeded with the user seed through
//! `seed_from_u64`, with the ChaCha stream id selecting an independent
//! sequence. Each fixture kind owns its own stream, so adding a kind or
//! drawing more from one kind never perturbs another.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::operator::{c64, project_lower, Matrix};
use crate::toda::TodaState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    General,
    Hermitian,
    Psd,
    Lower,
    Toda,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 5] =
        [FixtureKind::General, FixtureKind::Hermitian, FixtureKind::Psd, FixtureKind::Lower, FixtureKind::Toda];

    /// ChaCha stream reserved for this kind.
    pub fn stream(self) -> u64 {
        match self {
            FixtureKind::General => 1,
            FixtureKind::Hermitian => 2,
            FixtureKind::Psd => 3,
            FixtureKind::Lower => 4,
            FixtureKind::Toda => 5,
        }
    }
}

/// Streams for helpers that are not fixture kinds.
pub mod streams {
    pub const UNITARY: u64 = 16;
    pub const SKEW_HERMITIAN: u64 = 17;
    pub const VECTOR: u64 = 18;
    pub const COUPLING: u64 = 19;
    pub const KKS: u64 = 20;
}

#[derive(Clone, Debug, PartialEq)]
pub enum Fixture {
    Matrix(Matrix),
    Toda(TodaState),
}

impl Fixture {
    pub fn into_matrix(self) -> Option<Matrix> {
        match self {
            Fixture::Matrix(m) => Some(m),
            Fixture::Toda(_) => None,
        }
    }

    pub fn into_toda(self) -> Option<TodaState> {
        match self {
            Fixture::Toda(s) => Some(s),
            Fixture::Matrix(_) => None,
        }
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    // Drawn row-major, real then imaginary, so the layout is fixed independent of storage order.
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re = normal(rng);
        let im = normal(rng);
        entries.push(c64(re, im));
    }
    Matrix::from_fn(n, |i, j| entries[i * n + j])
}

/// Complex Gaussian matrix with unit-variance real and imaginary parts.
pub fn random_general(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    gaussian(rng, n)
}

/// `(A + A*) / 2`.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = gaussian(rng, n);
    (&a + &a.adjoint()).scale_re(0.5)
}

/// `A* A / tr(A* A)`: a density matrix.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = gaussian(rng, n);
    let p = &a.adjoint() * &a;
    let t = p.trace().re;
    p.scale_re(1.0 / t)
}

pub fn random_lower(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    project_lower(&gaussian(rng, n))
}

/// `(A - A*) / 2`.
pub fn random_skew_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = gaussian(rng, n);
    (&a - &a.adjoint()).scale_re(0.5)
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of `R` divided out.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = gaussian(rng, n);
    let qr = a.as_dmatrix().clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() == 0.0 { c64(1.0, 0.0) } else { d / d.norm() }
        })
        .collect();
    let u = DMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j]);
    Matrix::from_dmatrix(u).expect("QR of a finite matrix is finite")
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| {
        let re = normal(rng);
        let im = normal(rng);
        c64(re, im)
    })
    .collect()
}

/// `x_k ~ N(0, 1/4)`, `p ~ N(0, 1)` with the mean removed, geometric weights.
pub fn random_toda(rng: &mut ChaCha8Rng, n: usize) -> TodaState {
    let n = n.max(2);
    let x: Vec<f64> = (0..n - 1).map(|_| 0.5 * normal(rng)).collect();
    let mut p: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    let mean = p.iter().sum::<f64>() / n as f64;
    p.iter_mut().for_each(|v| *v -= mean);
    TodaState::with_geometric_weights(x, p).expect("mean-free momenta")
}

/// One fixture of `kind`, drawn from the first values of that kind's stream.
pub fn seeded_random_state(seed: u64, kind: FixtureKind, n: usize) -> Fixture {
    let mut rng = stream_rng(seed, kind.stream());
    match kind {
        FixtureKind::General => Fixture::Matrix(random_general(&mut rng, n)),
        FixtureKind::Hermitian => Fixture::Matrix(random_hermitian(&mut rng, n)),
        FixtureKind::Psd => Fixture::Matrix(random_psd(&mut rng, n)),
        FixtureKind::Lower => Fixture::Matrix(random_lower(&mut rng, n)),
        FixtureKind::Toda => Fixture::Toda(random_toda(&mut rng, n)),
    }
}

/// Draws `count` matrices of a matrix-valued kind from one stream.
pub fn matrix_samples(seed: u64, kind: FixtureKind, n: usize, count: usize) -> Vec<Matrix> {
    let mut rng = stream_rng(seed, kind.stream());
    (0..count)
        .map(|_| match kind {
            FixtureKind::General => random_general(&mut rng, n),
            FixtureKind::Hermitian => random_hermitian(&mut rng, n),
            FixtureKind::Psd => random_psd(&mut rng, n),
            FixtureKind::Lower => random_lower(&mut rng, n),
            FixtureKind::Toda => panic!("toda fixtures are not matrices"),
        })
        .collect()
}
