//! Complex sparse linear algebra: double-complex vector kernels, CSR
//! matrices with Matrix Market and binary I/O, preconditioned Krylov
//! solvers, a finite-difference Helmholtz assembler and a benchmark
//! harness.

// `!(x >= t)` is used on purpose so that NaN fails threshold checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cnum;
pub mod error;
pub mod helmholtz;
pub mod krylov;
pub mod sparse;
pub mod vecops;

pub use cnum::Cplx;
pub use error::{Error, Result};
pub use helmholtz::{assemble, HelmholtzProblem};
pub use krylov::{solve, Method, Preconditioner, SolveReport, SolverConfig};
pub use sparse::{CooMatrix, CsrMatrix, MatrixStats};
pub use vecops::{ReductionPlan, ZVector};
