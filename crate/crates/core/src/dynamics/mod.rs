//! Self-consistent state flows and the structures built on them.
//!
//! Convention: the Heisenberg propagator is `T_{t,s}(A) = V* A V` with
//! `∂_t V = −i Dh(t; ξ(t)) V`, so states evolve by `ρ ↦ VρV*` and the flow
//! solves `∂_t ρ_t = −i[Dh(t; ρ_t), ρ_t]`.

mod config;
mod direct;
mod flow;
mod hamiltonian;
mod lipschitz;
mod mesh;
mod picard;
mod propagator;
mod secondary;
mod sensitivity;
mod trajectory;

pub use config::{OdeMethod, SolverConfig};
pub use direct::direct_flow;
pub use flow::{
    classical_flow, cocycle_defect, flow_with_propagator, liouville_residual, probe_distance, pushforward,
    FlowPushforward,
};
pub use hamiltonian::{Hamiltonian, HamiltonianAt, Modulation};
pub use lipschitz::{estimate_lipschitz, lipschitz_analytic};
pub use picard::{picard_flow, self_consistency_residual};
pub use propagator::{linear_propagator, Propagator};
pub use secondary::{
    check_symmetry, reduction_defect, secondary_apply, StateDependentMorphism, StateField, SymmetryReport,
};
pub use sensitivity::flow_sensitivity;
pub use trajectory::{Diagnostics, StateTrajectory, WindowReport};
