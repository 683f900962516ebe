//! Numerical workbench for estimating a parameter of a Hamiltonian.
//!
//! Given a parametrized Hamiltonian H(g) built as a sum of scalar
//! coefficient expressions times constant Hermitian matrices, the crate
//! computes the generator h = i (dU/dg) U^dagger of local parameter
//! translation on U(g) = exp(-i t H(g)) by four independent routes,
//! derives the quantum Fisher information and its upper bounds from the
//! generator, and validates the chain end to end with a simulated
//! sampling / maximum-likelihood / Cramer-Rao pipeline.
//!
//! Modules:
//!
//! * [`operators`] - validated dense complex linear algebra.
//! * [`model`] - parametrized Hamiltonians, the model-file format, builtin
//!   spin-1/2 models.
//! * [`generator`] - the four translation-generator routes.
//! * [`qfi`] - quantum Fisher information, optimal probes, bounds, N-copy
//!   scaling.
//! * [`metrology`] - measurements, sampling, maximum likelihood, Cramer-Rao
//!   experiments.
//! * [`validation`] - seeded cross-route validation suites.

pub mod error;
pub mod generator;
pub mod metrology;
pub mod model;
pub mod operators;
pub mod qfi;
pub mod validation;

pub use error::{Result, WorkbenchError};
