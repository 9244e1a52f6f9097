//! Finite-dimensional Lie-Poisson geometry on matrix spaces: brackets and
//! Hamiltonian fields for the trace pairing, quantum-reduction projectors,
//! coadjoint orbits with the KKS form, fixed-step integrators for
//! Liouville-von Neumann and Toda dynamics, and defect calculators for the
//! identities that tie them together.

pub mod audit;
pub mod batch;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod operator;
pub mod orbit;
pub mod poisson;
pub mod reduction;
pub mod toda;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use operator::{c64, ClassTag, DecompositionOfUnity, Matrix};
