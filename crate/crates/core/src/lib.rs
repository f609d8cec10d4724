//! Numerical laboratory for the 2-Toda lattice on graded Lie algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: graded matrix Lie algebras with an invariant trace form,
//!   builders for `sl(n)` / `gl(n)` and a JSON interchange format.
//! * [`rmatrix`]: the splitting R-matrix, the induced R-matrix on `g × g`
//!   and the modified classical Yang–Baxter checkers.
//! * [`poisson`]: linear and quadratic Poisson R-brackets on `g × g`,
//!   gradients, Hamiltonian vector fields and Poisson ranks.
//! * [`invariants`]: trace invariants, the pencil expansion producing the
//!   conserved family `F_{j,i}`, Raïs vectors and independence ranks.
//! * [`flows`]: fixed-step RK4 integration of the Lax flows with
//!   conservation monitoring.
//! * [`toda`]: the classical Toda lattice as the diagonal restriction.
//! * [`checks`] / [`report`]: the verification suite and its report records.
//!
//! Sample sweeps run through [`exec::Exec`], which uses rayon when the
//! `parallel` feature is enabled and a plain loop otherwise.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod exec;
pub mod flows;
pub mod invariants;
pub mod linalg;
pub mod pencil;
pub mod poisson;
pub mod report;
pub mod rmatrix;
pub mod sampling;
pub mod toda;

pub use algebra::{AlgebraSpec, Element, Region};
pub use error::{Error, Result};
pub use exec::Exec;
pub use poisson::{BracketKind, PhaseSpace, PoissonEngine, ScalarFunction};
pub use rmatrix::{PairPoint, PairRMatrix, RMatrix, RMatrixConfig};
