use super::mesh::{
    check_grid, interval_generators, normalize_state, normalized_observables, probe_values, refine, rk4_unitary,
    split_windows,
};
use super::{Diagnostics, Hamiltonian, SolverConfig, StateTrajectory, WindowReport};
use crate::algebra::{validate_state, AlgebraElement, CMatrix, State};
use crate::error::{Error, Result};

/// Self-consistent flow `ξ(t) = ρ ∘ T^ξ_{t,s}` on `grid` (which must start at
/// `s`), by fixed-point iteration on consecutive windows.
///
/// Each window restarts from the terminal state of the previous one. Within a
/// window, one pass integrates the propagator generated by the current iterate
/// and moves the window's initial state with it.
pub fn picard_flow(h: &Hamiltonian, rho: &State, s: f64, grid: &[f64], cfg: &SolverConfig) -> Result<StateTrajectory> {
    cfg.validate()?;
    check_grid(grid, s)?;
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho.dim() });
    }
    let end = *grid.last().expect("checked nonempty");
    h.check_modulation(s, end)?;
    if h.is_trivial() || grid.len() == 1 {
        return Ok(constant_trajectory(rho, grid, "picard"));
    }

    let step = cfg.ode_step.min(cfg.window / 3.0);
    let (mesh, grid_index) = refine(grid, step);
    let windows = split_windows(&mesh, cfg.window);
    let probes = normalized_observables(h);
    let mut mesh_states: Vec<CMatrix> = Vec::with_capacity(mesh.len());
    mesh_states.push(rho.matrix().clone());
    let mut reports = Vec::with_capacity(windows.len());

    for &(a, b) in &windows {
        let times = &mesh[a..=b];
        let mut states = vec![mesh_states[a].clone(); times.len()];
        let mut iterations = 0;
        let mut defect = f64::INFINITY;
        while iterations < cfg.picard_max_iter {
            let (next, d) = picard_pass(h, times, &states, &probes);
            states = next;
            defect = d;
            iterations += 1;
            if defect <= cfg.picard_tol {
                break;
            }
        }
        if !(defect <= cfg.picard_tol) {
            return Err(Error::NoConvergence { iterations, defect });
        }
        mesh_states.extend(states.into_iter().skip(1));
        reports.push(WindowReport { start: times[0], end: times[times.len() - 1], iterations, defect });
    }

    let mut states = Vec::with_capacity(grid.len());
    states.push(rho.clone());
    for (&t, &m) in grid.iter().zip(&grid_index).skip(1) {
        let st = validate_state(mesh_states[m].clone(), 1e-8)
            .map_err(|e| Error::StepTooLarge { time: t, reason: e.to_string() })?;
        states.push(st);
    }
    Ok(StateTrajectory {
        grid: grid.to_vec(),
        states,
        origin: (rho.clone(), s),
        diagnostics: Diagnostics { solver: "picard".into(), windows: reports },
        mesh,
        mesh_states,
        grid_index,
        windows,
    })
}

/// One application of the self-consistency map on a window: returns the new
/// iterate and its sup-distance from the old one over the probes.
pub(crate) fn picard_pass(
    h: &Hamiltonian,
    times: &[f64],
    states: &[CMatrix],
    probes: &[AlgebraElement],
) -> (Vec<CMatrix>, f64) {
    let d = states[0].nrows();
    let rho_a = &states[0];
    let mut v = CMatrix::identity(d, d);
    let mut out = Vec::with_capacity(states.len());
    out.push(rho_a.clone());
    let mut defect: f64 = 0.0;
    for i in 0..times.len() - 1 {
        let [g0, gm, g1] = interval_generators(h, times, states, i, times[i], times[i + 1]);
        v = rk4_unitary(&v, times[i + 1] - times[i], &g0, &gm, &g1);
        let next = normalize_state(&v * rho_a * v.adjoint());
        let old = probe_values(probes, &states[i + 1]);
        let new = probe_values(probes, &next);
        for (o, n) in old.iter().zip(&new) {
            defect = defect.max((o - n).abs());
        }
        out.push(next);
    }
    (out, defect)
}

/// Per-window `max_t max_j |ξ(t)(B_j) − (ξ(a) ∘ T^ξ_{t,a})(B_j)|` over the
/// normalized registry observables, with `T^ξ` integrated on the solver mesh.
pub fn self_consistency_residual(h: &Hamiltonian, traj: &StateTrajectory) -> Vec<f64> {
    let probes = normalized_observables(h);
    traj.windows
        .iter()
        .map(|&(a, b)| picard_pass(h, &traj.mesh[a..=b], &traj.mesh_states[a..=b], &probes).1)
        .collect()
}

pub(crate) fn constant_trajectory(rho: &State, grid: &[f64], solver: &str) -> StateTrajectory {
    let n = grid.len();
    StateTrajectory {
        grid: grid.to_vec(),
        states: vec![rho.clone(); n],
        origin: (rho.clone(), grid[0]),
        diagnostics: Diagnostics { solver: solver.into(), windows: Vec::new() },
        mesh: grid.to_vec(),
        mesh_states: vec![rho.matrix().clone(); n],
        grid_index: (0..n).collect(),
        windows: if n > 1 { vec![(0, n - 1)] } else { Vec::new() },
    }
}
