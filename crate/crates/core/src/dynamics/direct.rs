use super::mesh::{check_grid, generator, normalize_state, refine};
use super::picard::constant_trajectory;
use super::{Diagnostics, Hamiltonian, SolverConfig, StateTrajectory};
use crate::algebra::{raw_commutator, validate_state, CMatrix, State};
use crate::error::{Error, Result};
use crate::C64;

/// Integrates `∂_t ρ = −i[Dh(t; ρ), ρ]` directly with classical RK4, an
/// independent check on [`picard_flow`](super::picard_flow).
pub fn direct_flow(h: &Hamiltonian, rho: &State, s: f64, grid: &[f64], cfg: &SolverConfig) -> Result<StateTrajectory> {
    cfg.validate()?;
    check_grid(grid, s)?;
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho.dim() });
    }
    h.check_modulation(s, *grid.last().expect("checked nonempty"))?;
    if h.is_trivial() || grid.len() == 1 {
        return Ok(constant_trajectory(rho, grid, "direct"));
    }

    let (mesh, grid_index) = refine(grid, cfg.ode_step);
    let field = |t: f64, m: &CMatrix| -> CMatrix { -raw_commutator(&generator(h, t, m), m) };
    let mut mesh_states = Vec::with_capacity(mesh.len());
    mesh_states.push(rho.matrix().clone());
    for i in 0..mesh.len() - 1 {
        let (t, dt) = (mesh[i], mesh[i + 1] - mesh[i]);
        let r = &mesh_states[i];
        let half = C64::new(0.5 * dt, 0.0);
        let k1 = field(t, r);
        let k2 = field(t + 0.5 * dt, &(r + &k1 * half));
        let k3 = field(t + 0.5 * dt, &(r + &k2 * half));
        let k4 = field(t + dt, &(r + &k3 * C64::new(dt, 0.0)));
        let next = r + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
        let next = normalize_state(next);
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::StepTooLarge { time: mesh[i + 1], reason: "non-finite state".into() });
        }
        mesh_states.push(next);
    }

    let mut states = Vec::with_capacity(grid.len());
    states.push(rho.clone());
    for (&t, &m) in grid.iter().zip(&grid_index).skip(1) {
        let st = validate_state(mesh_states[m].clone(), 1e-8)
            .map_err(|e| Error::StepTooLarge { time: t, reason: e.to_string() })?;
        states.push(st);
    }
    let last = mesh.len() - 1;
    Ok(StateTrajectory {
        grid: grid.to_vec(),
        states,
        origin: (rho.clone(), s),
        diagnostics: Diagnostics { solver: "direct".into(), windows: Vec::new() },
        mesh,
        mesh_states,
        grid_index,
        windows: vec![(0, last)],
    })
}
