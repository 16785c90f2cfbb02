//! Numerical toolkit for finite-dimensional operator algebras and modular
//! theory.
//!
//! * [`linalg`]: dense complex matrices, spectral calculus, partial traces.
//! * [`staralg`]: generated *-algebras, commutants, centers, factor tests.
//! * [`projlat`]: projectors, PVMs, Murray-von Neumann equivalence.
//! * [`states`]: density matrices, Born rule, Schmidt decomposition.
//! * [`modular`]: Tomita operator, modular operator and conjugation, flows.
//! * [`entropy`]: von Neumann, entanglement and Araki relative entropy.
//! * [`factorlab`]: truncated infinite tensor products (Type II/III tails).
//! * [`cli`]: JSON I/O and the `modulaire` command line.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod factorlab;
pub mod linalg;
pub mod modular;
pub mod projlat;
pub mod staralg;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerances, C64};
