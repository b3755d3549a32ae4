//! Weak*-Hausdorff geometry of polytopes of functionals.
//!
//! A functional is a coordinate vector against a predual basis; convex sets
//! are vertex lists. Distances are either the planar Hausdorff distance of
//! the images under one test vector, or the Hausdorff distance of the metric
//! `d(σ1, σ2) = Σ_n 2^{-n} |(σ1 − σ2)(A_n)|`.

mod distance;
mod functional;
mod hull;
mod limits;
mod lp;
mod poulsen;

pub use distance::{dh_a, hausdorff_d, hausdorff_d_with, separating_vector, seq_metric_d, vertex_hausdorff, InnerSolver};
pub use functional::{Functional, MetricBasis, Pairing, Polytope, PredualVector};
pub use hull::{convex_hull_reduce, extreme_points, is_exposed, ExposureCertificate, GAP_TOL, HULL_TOL};
pub use limits::{monotone_limit_check, LimitReport};
pub use poulsen::{poulsen_construct, poulsen_lambda, PoulsenStep, PoulsenTrace};
