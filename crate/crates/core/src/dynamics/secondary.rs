use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::flow::{classical_flow, flow_with_propagator};
use super::{Hamiltonian, SolverConfig};
use crate::algebra::{probe_basis, trace_product, unitarity_defect, AlgebraElement, CMatrix, State};
use crate::error::{Error, Result};
use crate::observables::StateFunction;

/// An algebra-valued function of states, `f ∈ C(E; M_d)`.
#[derive(Clone)]
pub struct StateField {
    dim: usize,
    assignment: Arc<dyn Fn(&State) -> AlgebraElement + Send + Sync>,
}

impl fmt::Debug for StateField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateField").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl StateField {
    pub fn new(dim: usize, f: impl Fn(&State) -> AlgebraElement + Send + Sync + 'static) -> Self {
        Self { dim, assignment: Arc::new(f) }
    }

    pub fn constant(a: AlgebraElement) -> Self {
        Self::new(a.dim(), move |_| a.clone())
    }

    /// The scalar field `ρ ↦ f(ρ)·1`.
    pub fn classical<F: StateFunction + Send + Sync + 'static>(f: F) -> Self {
        let dim = f.dim();
        Self::new(dim, move |rho| {
            let v = f.evaluate(rho).expect("field evaluated on states of its own dimension");
            AlgebraElement::identity(dim).scale(v)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, rho: &State) -> Result<AlgebraElement> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        let a = (self.assignment)(rho);
        a.check_dim(self.dim)?;
        Ok(a)
    }
}

/// State-dependent automorphism `G^ρ(A) = U(ρ)* A U(ρ)`.
#[derive(Clone)]
pub struct StateDependentMorphism {
    assignment: Arc<dyn Fn(&State) -> CMatrix + Send + Sync>,
}

impl fmt::Debug for StateDependentMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("StateDependentMorphism")
    }
}

impl StateDependentMorphism {
    pub fn new(f: impl Fn(&State) -> CMatrix + Send + Sync + 'static) -> Self {
        Self { assignment: Arc::new(f) }
    }

    pub fn constant(u: CMatrix) -> Self {
        Self::new(move |_| u.clone())
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(CMatrix::identity(dim, dim))
    }

    /// `U(ρ)`, checked to be unitary within `1e-9`.
    pub fn unitary(&self, rho: &State) -> Result<CMatrix> {
        let u = (self.assignment)(rho);
        if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
            return Err(Error::DimensionMismatch { expected: rho.dim(), found: u.nrows() });
        }
        let defect = unitarity_defect(&u);
        if defect > 1e-9 {
            return Err(Error::NonUnitary { defect });
        }
        Ok(u)
    }

    /// `max_P |(ρ ∘ G^ρ − ρ)(P)|` over the probe basis.
    pub fn invariance_defect(&self, rho: &State) -> Result<f64> {
        let u = self.unitary(rho)?;
        let moved = &u * rho.matrix() * u.adjoint();
        let diff = moved - rho.matrix();
        Ok(probe_basis(rho.dim())
            .iter()
            .map(|(_, p)| trace_product(&diff, p.matrix()).norm())
            .fold(0.0, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub initial_defect: f64,
    pub propagated_defect: f64,
    /// `Some` only when the caller asserted that `G` commutes with the flow.
    pub verdict: Option<bool>,
}

/// Invariance defects of `ρ` and of `ϖ^h(s, t)(ρ)` under `G`.
pub fn check_symmetry(
    g: &StateDependentMorphism,
    h: &Hamiltonian,
    rho: &State,
    s: f64,
    t: f64,
    cfg: &SolverConfig,
    commutes: bool,
) -> Result<SymmetryReport> {
    let initial_defect = g.invariance_defect(rho)?;
    let evolved = classical_flow(h, rho, s, t, cfg)?;
    let propagated_defect = g.invariance_defect(&evolved)?;
    let verdict = commutes.then_some(propagated_defect <= initial_defect + 10.0 * cfg.picard_tol);
    Ok(SymmetryReport { initial_defect, propagated_defect, verdict })
}

/// Largest relative residual of the least-squares projection of
/// `T_{t,s}(B) = V* B V` onto the real span of `basis`, over `B` in `basis`.
pub fn reduction_defect(
    h: &Hamiltonian,
    basis: &[AlgebraElement],
    rho: &State,
    s: f64,
    t: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    if basis.is_empty() {
        return Err(Error::DegenerateBasis);
    }
    for b in basis {
        b.check_dim(rho.dim())?;
    }
    let n = basis.len();
    let gram = DMatrix::from_fn(n, n, |i, j| basis[i].real_inner(&basis[j]));
    let eig = gram.clone().symmetric_eigen();
    let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(lo > 1e-12 * hi) {
        return Err(Error::DegenerateBasis);
    }
    let chol = gram.cholesky().ok_or(Error::DegenerateBasis)?;
    let (_, prop) = flow_with_propagator(h, rho, s, t, cfg)?;
    let mut worst: f64 = 0.0;
    for b in basis {
        let moved = prop.apply(b);
        let rhs = DVector::from_iterator(n, basis.iter().map(|e| e.real_inner(&moved)));
        let c = chol.solve(&rhs);
        let mut fit = AlgebraElement::zeros(rho.dim());
        for (e, ci) in basis.iter().zip(c.iter()) {
            fit = &fit + &e.scale(*ci);
        }
        let scale = moved.frobenius_norm();
        if scale > 0.0 {
            worst = worst.max((&moved - &fit).frobenius_norm() / scale);
        }
    }
    Ok(worst)
}

/// Secondary dynamics `[𝔗(f)](ρ) = T^ρ_{t,s}(f(ρ))`, with `T^ρ` the propagator
/// of the self-consistent trajectory started at `ρ`. Scalar values `c·1` are
/// returned untouched.
pub fn secondary_apply(
    h: &Hamiltonian,
    f: &StateField,
    rho: &State,
    s: f64,
    t: f64,
    cfg: &SolverConfig,
) -> Result<AlgebraElement> {
    let a = f.apply(rho)?;
    if a.as_scalar().is_some() || s == t {
        cfg.validate()?;
        return Ok(a);
    }
    let (_, prop) = flow_with_propagator(h, rho, s, t, cfg)?;
    Ok(prop.apply(&a))
}
