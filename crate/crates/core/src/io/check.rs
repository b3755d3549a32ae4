use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::Experiment;
use super::json::config_error;
use super::simulate::flow;
use crate::algebra::{purity, State};
use crate::dynamics::{cocycle_defect, direct_flow, liouville_residual, picard_flow, probe_distance};
use crate::error::Result;
use crate::observables::{evaluate, poisson_bracket, Polynomial, PolynomialFunction};

pub const SUITES: [&str; 6] = ["jacobi", "cocycle", "purity", "energy", "liouville", "oracle"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckItem {
    pub suite: String,
    pub name: String,
    pub state: usize,
    pub defect: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<CheckItem>,
}

struct Collector {
    items: Vec<CheckItem>,
}

impl Collector {
    fn record(&mut self, suite: &str, name: &str, state: usize, defect: f64, threshold: f64) {
        self.items.push(CheckItem {
            suite: suite.into(),
            name: name.into(),
            state,
            defect,
            threshold,
            passed: defect <= threshold,
            note: None,
        });
    }

    fn skip(&mut self, suite: &str, name: &str, state: usize, note: &str) {
        self.items.push(CheckItem {
            suite: suite.into(),
            name: name.into(),
            state,
            defect: 0.0,
            threshold: 0.0,
            passed: true,
            note: Some(note.into()),
        });
    }
}

/// Runs the named invariant suites on every initial state. Solver failures
/// abort with the solver error; violated invariants only mark items failed.
pub fn run_check(exp: &Experiment, suites: &[String]) -> Result<CheckReport> {
    for (k, s) in suites.iter().enumerate() {
        if !SUITES.contains(&s.as_str()) {
            return Err(config_error(format!("checks.suites[{k}]"), format!("unknown suite `{s}`; known: {}", SUITES.join(", "))));
        }
    }
    let mut out = Collector { items: Vec::new() };
    for suite in suites {
        match suite.as_str() {
            "jacobi" => jacobi(exp, &mut out)?,
            "cocycle" => per_state(exp, &mut out, cocycle)?,
            "purity" => per_state(exp, &mut out, conservation)?,
            "energy" => per_state(exp, &mut out, energy)?,
            "liouville" => per_state(exp, &mut out, liouville)?,
            "oracle" => per_state(exp, &mut out, oracle)?,
            _ => unreachable!("suite names validated above"),
        }
    }
    let passed = out.items.iter().all(|c| c.passed);
    Ok(CheckReport { passed, checks: out.items })
}

fn per_state(
    exp: &Experiment,
    out: &mut Collector,
    f: impl Fn(&Experiment, usize, &State, &mut Collector) -> Result<()>,
) -> Result<()> {
    for (k, rho) in exp.states.iter().enumerate() {
        f(exp, k, rho, out)?;
    }
    Ok(())
}

fn span(exp: &Experiment) -> (f64, f64, f64) {
    let s = exp.grid[0];
    let t = *exp.grid.last().expect("nonempty");
    (s, 0.5 * (s + t), t)
}

fn jacobi(exp: &Experiment, out: &mut Collector) -> Result<()> {
    let seed = exp.seed.ok_or_else(|| config_error("seed", "required by the jacobi suite"))?;
    let reg = &exp.registry;
    if reg.is_empty() {
        out.skip("jacobi", "jacobi", 0, "no observables");
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random = || PolynomialFunction::new(reg.clone(), Polynomial::random(reg.len(), 3, 4, &mut rng));
    let (mut jac, mut anti): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let (f, g, h) = (random()?, random()?, random()?);
        let fg = poisson_bracket(&f, &g)?;
        let gf = poisson_bracket(&g, &f)?;
        let cyclic = [
            poisson_bracket(&f, &poisson_bracket(&g, &h)?)?,
            poisson_bracket(&g, &poisson_bracket(&h, &f)?)?,
            poisson_bracket(&h, &fg)?,
        ];
        for rho in &exp.states {
            let j: f64 = cyclic.iter().map(|c| evaluate(c, rho)).sum::<Result<f64>>()?;
            jac = jac.max(j.abs());
            anti = anti.max((evaluate(&fg, rho)? + evaluate(&gf, rho)?).abs());
        }
    }
    out.record("jacobi", "antisymmetry", 0, anti, 1e-10);
    out.record("jacobi", "jacobi", 0, jac, 1e-9);
    Ok(())
}

fn cocycle(exp: &Experiment, k: usize, rho: &State, out: &mut Collector) -> Result<()> {
    let (s, r, t) = span(exp);
    out.record("cocycle", "cocycle", k, cocycle_defect(&exp.hamiltonian, rho, s, r, t, &exp.solver)?, 1e-5);
    Ok(())
}

fn conservation(exp: &Experiment, k: usize, rho: &State, out: &mut Collector) -> Result<()> {
    let traj = flow(exp, rho, exp.grid[0])?;
    let p0 = purity(rho);
    let drift = traj.states().iter().map(|st| (purity(st) - p0).abs()).fold(0.0, f64::max);
    let trace = traj.states().iter().map(|st| (st.matrix().trace().re - 1.0).abs()).fold(0.0, f64::max);
    out.record("purity", "purity_drift", k, drift, 1e-7);
    out.record("purity", "trace_drift", k, trace, 1e-10);
    Ok(())
}

fn energy(exp: &Experiment, k: usize, rho: &State, out: &mut Collector) -> Result<()> {
    if !exp.hamiltonian.is_autonomous() {
        out.skip("energy", "energy_drift", k, "time-dependent Hamiltonian");
        return Ok(());
    }
    let traj = flow(exp, rho, exp.grid[0])?;
    let h = &exp.hamiltonian;
    let e0 = h.evaluate(exp.grid[0], rho)?;
    let mut drift: f64 = 0.0;
    for (&t, st) in traj.grid().iter().zip(traj.states()) {
        drift = drift.max((h.evaluate(t, st)? - e0).abs());
    }
    out.record("energy", "energy_drift", k, drift, 1e-6);
    Ok(())
}

fn liouville(exp: &Experiment, k: usize, rho: &State, out: &mut Collector) -> Result<()> {
    let (s, r, t) = span(exp);
    if t - s < 4e-3 {
        out.skip("liouville", "liouville", k, "time span shorter than the difference stencil");
        return Ok(());
    }
    let reg = &exp.registry;
    for (name, _) in exp.probes.iter().take(3) {
        let f = PolynomialFunction::variable(reg.clone(), name)?;
        let (rt, rs) = liouville_residual(&exp.hamiltonian, &f, rho, s, r, 1e-3, &exp.solver)?;
        out.record("liouville", &format!("r_t[{name}]"), k, rt, 1e-4);
        out.record("liouville", &format!("r_s[{name}]"), k, rs, 1e-4);
    }
    Ok(())
}

fn oracle(exp: &Experiment, k: usize, rho: &State, out: &mut Collector) -> Result<()> {
    let s = exp.grid[0];
    let a = picard_flow(&exp.hamiltonian, rho, s, &exp.grid, &exp.solver)?;
    let b = direct_flow(&exp.hamiltonian, rho, s, &exp.grid, &exp.solver)?;
    let defect = a.states().iter().zip(b.states()).map(|(x, y)| probe_distance(x, y)).fold(0.0, f64::max);
    out.record("oracle", "picard_vs_direct", k, defect, (10.0 * exp.solver.picard_tol).max(1e-6));
    Ok(())
}
