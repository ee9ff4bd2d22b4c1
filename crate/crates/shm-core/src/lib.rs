//! Schur multiplier norms and Haagerup tensor factorizations of finite
//! matrices, double operator integrals against finite spectral measures,
//! and the reduction of measure-space Schur multipliers to weighted matrix
//! problems.
//!
//! The crate is organised around one fact: the multiplier norm of a finite
//! matrix equals the best Haagerup factorization bound, certified from
//! above by a positive semidefinite block matrix and from below by test
//! contractions. Everything else (step kernels, spectral symbols) reduces
//! to that matrix problem.

pub mod eig;
pub mod error;
pub mod exec;
pub mod matrix;
pub mod measure;
pub mod oracle;
pub mod random;
pub mod schur;
pub mod spectral;

pub use eig::{hermitian_eig, psd_project, HermitianEigensystem};
pub use error::{Error, Result};
pub use exec::Execution;
pub use matrix::{hilbert_schmidt_norm, operator_norm, trace_norm, ComplexMatrix};
pub use measure::{Coarsening, FiniteMeasureSpace, StepKernel, StepSymbol};
pub use oracle::OracleEstimate;
pub use schur::{HaagerupFactorization, MultiplierNormResult, PsdBlockCertificate};
pub use spectral::{FiniteSpectralMeasure, SymbolOnSpectra};
