use super::mesh::{interval_generators, rk4_unitary};
use super::{Hamiltonian, SolverConfig, StateTrajectory};
use crate::algebra::{unitarity_defect, AlgebraElement, CMatrix, State};
use crate::error::{Error, Result};

/// Heisenberg propagator `T_{t,s}(A) = V* A V`, with `∂_t V = −iH(t)V` and
/// `V_{s,s} = 1`. States move as `ρ ↦ VρV*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    pub unitary: CMatrix,
    pub span: (f64, f64),
}

impl Propagator {
    pub fn identity(dim: usize, t: f64) -> Self {
        Self { unitary: CMatrix::identity(dim, dim), span: (t, t) }
    }

    /// `V* A V`.
    pub fn apply(&self, a: &AlgebraElement) -> AlgebraElement {
        a.conjugate_by(&self.unitary)
    }

    /// `ρ ∘ T = VρV*`.
    pub fn apply_state(&self, rho: &State) -> State {
        rho.evolve(&self.unitary)
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.unitary)
    }

    /// `V_{t,s} = V_{t,r} V_{r,s}`: `self` spans `(r, t)`, `earlier` spans `(s, r)`.
    pub fn after(&self, earlier: &Propagator) -> Propagator {
        Propagator { unitary: &self.unitary * &earlier.unitary, span: (earlier.span.0, self.span.1) }
    }

    pub fn inverse(&self) -> Propagator {
        Propagator { unitary: self.unitary.adjoint(), span: (self.span.1, self.span.0) }
    }
}

/// Propagator of the linear dynamics generated by `H(τ) = Dh(τ; ξ(τ))` along a
/// frozen trajectory `ξ`, from `s` to `t` (either order).
pub fn linear_propagator(
    h: &Hamiltonian,
    frozen: &StateTrajectory,
    s: f64,
    t: f64,
    cfg: &SolverConfig,
) -> Result<Propagator> {
    cfg.validate()?;
    frozen.check_covers(s.min(t), s.max(t))?;
    if frozen.mesh_states[0].nrows() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: frozen.mesh_states[0].nrows() });
    }
    let d = h.dim();
    if s == t {
        return Ok(Propagator::identity(d, s));
    }
    let (lo, hi) = (s.min(t), s.max(t));
    let v = forward_unitary(h, frozen, lo, hi, cfg.ode_step)?;
    let forward = Propagator { unitary: v, span: (lo, hi) };
    Ok(if s < t { forward } else { forward.inverse() })
}

fn forward_unitary(h: &Hamiltonian, frozen: &StateTrajectory, lo: f64, hi: f64, step: f64) -> Result<CMatrix> {
    let d = h.dim();
    let mut v = CMatrix::identity(d, d);
    if frozen.mesh.len() < 2 {
        return Ok(v);
    }
    let first = frozen.interval_of(lo);
    let last = frozen.interval_of(hi);
    for i in first..=last {
        let u0 = frozen.mesh[i].max(lo);
        let u1 = frozen.mesh[i + 1].min(hi);
        if u1 <= u0 {
            continue;
        }
        let (a, b) = frozen.window_of_interval(i);
        let times = &frozen.mesh[a..=b];
        let states = &frozen.mesh_states[a..=b];
        let pieces = (((u1 - u0) / step) * (1.0 - 1e-9)).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let p0 = u0 + (u1 - u0) * k as f64 / pieces as f64;
            let p1 = if k + 1 == pieces { u1 } else { u0 + (u1 - u0) * (k + 1) as f64 / pieces as f64 };
            let [g0, gm, g1] = interval_generators(h, times, states, i - a, p0, p1);
            v = rk4_unitary(&v, p1 - p0, &g0, &gm, &g1);
        }
    }
    let defect = unitarity_defect(&v);
    if defect > 1e-9 {
        return Err(Error::NonUnitary { defect });
    }
    Ok(v)
}

/// Cumulative propagators `V_{mesh[k], mesh[0]}` at every mesh node.
pub(crate) fn mesh_unitaries(h: &Hamiltonian, traj: &StateTrajectory) -> Vec<CMatrix> {
    let d = h.dim();
    let mut out = vec![CMatrix::identity(d, d)];
    for i in 0..traj.mesh.len().saturating_sub(1) {
        let (a, b) = traj.window_of_interval(i);
        let [g0, gm, g1] =
            interval_generators(h, &traj.mesh[a..=b], &traj.mesh_states[a..=b], i - a, traj.mesh[i], traj.mesh[i + 1]);
        let next = rk4_unitary(out.last().expect("nonempty"), traj.mesh[i + 1] - traj.mesh[i], &g0, &gm, &g1);
        out.push(next);
    }
    out
}
