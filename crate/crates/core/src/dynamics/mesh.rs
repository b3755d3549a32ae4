//! Time meshes, window splitting, state interpolation and the RK4 step for
//! `∂V = −iHV`.

use super::Hamiltonian;
use crate::algebra::{polar_unitary, trace_product, unitarity_defect, AlgebraElement, CMatrix};
use crate::error::{Error, Result};
use crate::C64;

/// Refines `grid` so every step is at most `step`; returns the mesh and the
/// mesh index of every grid node.
pub(crate) fn refine(grid: &[f64], step: f64) -> (Vec<f64>, Vec<usize>) {
    let mut mesh = vec![grid[0]];
    let mut index = vec![0];
    for w in grid.windows(2) {
        let span = w[1] - w[0];
        let n = ((span / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for k in 1..n {
            mesh.push(w[0] + span * k as f64 / n as f64);
        }
        mesh.push(w[1]);
        index.push(mesh.len() - 1);
    }
    (mesh, index)
}

/// Greedy split of the mesh into windows of length at most `window`.
pub(crate) fn split_windows(mesh: &[f64], window: f64) -> Vec<(usize, usize)> {
    let last = mesh.len() - 1;
    let mut out = Vec::new();
    let mut start = 0;
    while start < last {
        let limit = mesh[start] + window * (1.0 + 1e-12);
        let mut end = start + 1;
        while end < last && mesh[end + 1] <= limit {
            end += 1;
        }
        out.push((start, end));
        start = end;
    }
    out
}

pub(crate) fn check_grid(grid: &[f64], s: f64) -> Result<()> {
    match grid.first() {
        None => return Err(Error::InvalidInput("time grid is empty".into())),
        Some(&g0) if g0 != s => {
            return Err(Error::InvalidInput(format!("time grid starts at {g0}, expected the initial time {s}")))
        }
        _ => {}
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Hermitian part, rescaled to unit trace.
pub(crate) fn normalize_state(m: CMatrix) -> CMatrix {
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = h.trace().re;
    h / C64::new(tr, 0.0)
}

/// Lagrange interpolation at `t` in interval `i` of a window, using the four
/// nodes around the interval (fewer in short windows).
pub(crate) fn interpolate_state(times: &[f64], states: &[CMatrix], i: usize, t: f64) -> CMatrix {
    if let Some(k) = times.iter().position(|&x| x == t) {
        return states[k].clone();
    }
    let len = times.len();
    let m = len.min(4);
    let lo = (i.saturating_sub(1)).min(len - m);
    let nodes = lo..lo + m;
    let mut acc = CMatrix::zeros(states[0].nrows(), states[0].ncols());
    for a in nodes.clone() {
        let mut w = 1.0;
        for b in nodes.clone() {
            if a != b {
                w *= (t - times[b]) / (times[a] - times[b]);
            }
        }
        acc += &states[a] * C64::new(w, 0.0);
    }
    normalize_state(acc)
}

pub(crate) fn moments_of(h: &Hamiltonian, m: &CMatrix) -> Vec<f64> {
    h.registry().observables().iter().map(|b| trace_product(m, b.matrix()).re).collect()
}

/// `Dh(t; ξ)` for a state given as a raw matrix.
pub(crate) fn generator(h: &Hamiltonian, t: f64, state: &CMatrix) -> CMatrix {
    h.generator_at(t, &moments_of(h, state)).into_matrix()
}

/// One RK4 step of `V' = −iH(τ)V` from generator samples at the start,
/// midpoint and end of the step; polar-polished when unitarity drifts.
pub(crate) fn rk4_unitary(v: &CMatrix, dt: f64, h0: &CMatrix, hm: &CMatrix, h1: &CMatrix) -> CMatrix {
    let mi = C64::new(0.0, -1.0);
    let half = C64::new(0.5 * dt, 0.0);
    let k1 = h0 * v * mi;
    let k2 = hm * (v + &k1 * half) * mi;
    let k3 = hm * (v + &k2 * half) * mi;
    let k4 = h1 * (v + &k3 * C64::new(dt, 0.0)) * mi;
    let next = v + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    if unitarity_defect(&next) > 1e-10 {
        polar_unitary(&next)
    } else {
        next
    }
}

/// Generators at both ends and the midpoint of window interval `i`
/// (subinterval `[u, v]` of it).
pub(crate) fn interval_generators(
    h: &Hamiltonian,
    times: &[f64],
    states: &[CMatrix],
    i: usize,
    u: f64,
    v: f64,
) -> [CMatrix; 3] {
    let at = |t: f64| generator(h, t, &interpolate_state(times, states, i, t));
    [at(u), at(0.5 * (u + v)), at(v)]
}

/// Expectations of the normalized registry observables `B_j/‖B_j‖`.
pub(crate) fn probe_values(probes: &[AlgebraElement], m: &CMatrix) -> Vec<f64> {
    probes.iter().map(|b| trace_product(m, b.matrix()).re).collect()
}

pub(crate) fn normalized_observables(h: &Hamiltonian) -> Vec<AlgebraElement> {
    h.registry()
        .observables()
        .iter()
        .filter_map(|b| {
            let n = b.operator_norm();
            (n > 0.0).then(|| b.scale(1.0 / n))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refine_respects_grid_and_step() {
        let (mesh, idx) = refine(&[0.0, 0.1, 0.35], 0.1);
        assert_eq!(idx, vec![0, 1, 4]);
        assert_eq!(mesh.len(), 5);
        assert!(mesh.windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-15));
        assert_eq!(*mesh.last().unwrap(), 0.35);
    }

    #[test]
    fn windows_cover_mesh() {
        let mesh: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let w = split_windows(&mesh, 0.3);
        assert_eq!(w, vec![(0, 3), (3, 6), (6, 9), (9, 10)]);
        assert!(split_windows(&[0.0], 0.3).is_empty());
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let times = [0.0, 0.3, 0.5, 0.9, 1.2];
        let f = |t: f64| 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
        let states: Vec<CMatrix> = times
            .iter()
            .map(|&t| CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(f(t), 0.0), C64::new(2.0 - f(t), 0.0)])))
            .collect();
        for (i, t) in [(0, 0.1), (1, 0.4), (3, 1.0)] {
            let m = interpolate_state(&times, &states, i, t);
            assert!((m[(0, 0)].re - f(t) / 2.0).abs() < 1e-14);
        }
    }
}
