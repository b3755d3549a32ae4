use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use super::config::{Experiment, FlowMethod};
use super::json::config_error;
use crate::algebra::{purity, State};
use crate::dynamics::{direct_flow, picard_flow, self_consistency_residual, StateTrajectory};
use crate::error::Result;

/// Trajectories of every initial state, in input order.
pub fn simulate(exp: &Experiment) -> Result<Vec<StateTrajectory>> {
    let s = exp.grid[0];
    exp.states
        .par_iter()
        .map(|rho| flow(exp, rho, s))
        .collect()
}

pub(crate) fn flow(exp: &Experiment, rho: &State, s: f64) -> Result<StateTrajectory> {
    match exp.flow {
        FlowMethod::Picard => picard_flow(&exp.hamiltonian, rho, s, &exp.grid, &exp.solver),
        FlowMethod::Direct => direct_flow(&exp.hamiltonian, rho, s, &exp.grid, &exp.solver),
    }
}

/// `t, probes…, purity, energy, picard_iters`, floats with 17 significant digits.
pub fn trajectory_csv(exp: &Experiment, traj: &StateTrajectory) -> Result<String> {
    let mut out = String::from("t");
    for (name, _) in &exp.probes {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",purity,energy,picard_iters\n");
    let iters = traj.iterations_per_node();
    for ((&t, rho), k) in traj.grid().iter().zip(traj.states()).zip(iters) {
        write!(out, "{t:.16e}").expect("string write");
        for (_, a) in &exp.probes {
            write!(out, ",{:.16e}", rho.expect(a)).expect("string write");
        }
        let energy = exp.hamiltonian.evaluate(t, rho)?;
        writeln!(out, ",{:.16e},{energy:.16e},{k}", purity(rho)).expect("string write");
    }
    Ok(out)
}

pub fn diagnostics_json(exp: &Experiment, trajs: &[StateTrajectory]) -> serde_json::Value {
    json!({
        "lipschitz_d0": exp.solver.lipschitz_d0,
        "window": exp.solver.window,
        "picard_tol": exp.solver.picard_tol,
        "ode_step": exp.solver.ode_step,
        "trajectories": trajs.iter().enumerate().map(|(k, tr)| {
            let residual = match exp.flow {
                FlowMethod::Picard => self_consistency_residual(&exp.hamiltonian, tr),
                FlowMethod::Direct => Vec::new(),
            };
            json!({
                "index": k,
                "solver": tr.diagnostics().solver,
                "windows": tr.diagnostics().windows,
                "self_consistency": residual,
            })
        }).collect::<Vec<_>>(),
    })
}

/// Runs the experiment and writes `trajectory_<k>.csv` per initial state plus
/// `diagnostics.json` into the output directory. Returns the written paths.
pub fn run_simulate(exp: &Experiment) -> Result<Vec<PathBuf>> {
    let trajs = simulate(exp)?;
    let dir = &exp.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| config_error("outputs.dir", e))?;
    let mut written = Vec::with_capacity(trajs.len() + 1);
    for (k, tr) in trajs.iter().enumerate() {
        let path = dir.join(format!("trajectory_{k}.csv"));
        std::fs::write(&path, trajectory_csv(exp, tr)?).map_err(|e| config_error("outputs.dir", e))?;
        written.push(path);
    }
    let path = dir.join("diagnostics.json");
    let text = serde_json::to_string_pretty(&diagnostics_json(exp, &trajs)).expect("diagnostics serialize");
    std::fs::write(&path, text + "\n").map_err(|e| config_error("outputs.dir", e))?;
    written.push(path);
    Ok(written)
}
