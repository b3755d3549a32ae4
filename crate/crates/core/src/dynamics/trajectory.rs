use serde::Serialize;

use super::mesh::interpolate_state;
use crate::algebra::{CMatrix, State};
use crate::error::{Error, Result};

/// Convergence record of one fixed-point window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowReport {
    pub start: f64,
    pub end: f64,
    pub iterations: usize,
    pub defect: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub solver: String,
    pub windows: Vec<WindowReport>,
}

/// States on a time grid, together with the fine integration mesh they were
/// computed on.
#[derive(Clone, Debug)]
pub struct StateTrajectory {
    pub(crate) grid: Vec<f64>,
    pub(crate) states: Vec<State>,
    pub(crate) origin: (State, f64),
    pub(crate) diagnostics: Diagnostics,
    pub(crate) mesh: Vec<f64>,
    pub(crate) mesh_states: Vec<CMatrix>,
    pub(crate) grid_index: Vec<usize>,
    /// Inclusive mesh index ranges; interpolation never crosses a window.
    pub(crate) windows: Vec<(usize, usize)>,
}

impl StateTrajectory {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn origin(&self) -> (&State, f64) {
        (&self.origin.0, self.origin.1)
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectories are nonempty")
    }

    pub fn start(&self) -> f64 {
        self.mesh[0]
    }

    pub fn end(&self) -> f64 {
        *self.mesh.last().expect("trajectories are nonempty")
    }

    /// Iteration count of the window that produced each grid node (0 for the origin).
    pub fn iterations_per_node(&self) -> Vec<usize> {
        self.grid_index
            .iter()
            .map(|&m| {
                if m == 0 {
                    return 0;
                }
                self.windows
                    .iter()
                    .zip(&self.diagnostics.windows)
                    .find(|((a, b), _)| *a < m && m <= *b)
                    .map_or(0, |(_, r)| r.iterations)
            })
            .collect()
    }

    /// Window containing mesh interval `i` (between nodes `i` and `i + 1`).
    pub(crate) fn window_of_interval(&self, i: usize) -> (usize, usize) {
        self.windows
            .iter()
            .copied()
            .find(|&(a, b)| a <= i && i < b)
            .unwrap_or((0, self.mesh.len() - 1))
    }

    /// Mesh interval containing `t`; the last interval for `t` at the end.
    pub(crate) fn interval_of(&self, t: f64) -> usize {
        let n = self.mesh.len();
        let k = self.mesh.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(n.saturating_sub(2))
    }

    pub(crate) fn check_covers(&self, lo: f64, hi: f64) -> Result<()> {
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if lo < self.start() - slack || hi > self.end() + slack {
            return Err(Error::InsufficientCoverage { start: self.start(), end: self.end(), lo, hi });
        }
        Ok(())
    }

    /// Interpolated state matrix at `t`, Hermitized and trace-normalized.
    pub fn matrix_at(&self, t: f64) -> Result<CMatrix> {
        self.check_covers(t, t)?;
        if self.mesh.len() == 1 {
            return Ok(self.mesh_states[0].clone());
        }
        let i = self.interval_of(t);
        let (a, b) = self.window_of_interval(i);
        Ok(interpolate_state(&self.mesh[a..=b], &self.mesh_states[a..=b], i - a, t))
    }

    /// Interpolated state at `t`, revalidated at `1e-8`.
    pub fn state_at(&self, t: f64) -> Result<State> {
        crate::algebra::validate_state(self.matrix_at(t)?, 1e-8)
    }
}
