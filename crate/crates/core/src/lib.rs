//! Numerical workbench for self-consistent quantum-classical dynamics on
//! finite matrix algebras.
//!
//! * [`algebra`]: matrices, states, commutators and norms on `M_d(C)`.
//! * [`observables`]: cylindrical and polynomial functions of states, their
//!   convex derivatives and the state-space Poisson bracket.
//! * [`dynamics`]: the self-consistent flow solver and everything built on it.
//! * [`hypertopology`]: Hausdorff pseudometrics on polytopes of functionals,
//!   hull operators and the dense-exposed-points construction.
//! * [`io`]: configuration, the Pauli string language and experiment drivers.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod hypertopology;
pub mod io;
pub mod observables;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
