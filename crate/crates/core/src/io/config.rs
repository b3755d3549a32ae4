use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::json::{build_registry, config_error, polynomial_from_terms, ObservableSpec, StateSpec, TermSpec};
use crate::algebra::{AlgebraElement, State};
use crate::dynamics::{lipschitz_analytic, Hamiltonian, Modulation, OdeMethod, SolverConfig};
use crate::error::{Error, Result};
use crate::observables::{ObservableRegistry, PolynomialFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    #[serde(default)]
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowMethod {
    #[default]
    Picard,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Derived from the Hessian bound of `h` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_d0: Option<f64>,
    /// `min(0.25/D0, 0.25)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "default_step")]
    pub ode_step: f64,
    #[serde(default)]
    pub ode_method: OdeMethod,
    #[serde(default)]
    pub flow: FlowMethod,
}

fn default_tol() -> f64 {
    SolverConfig::default().picard_tol
}

fn default_max_iter() -> usize {
    SolverConfig::default().picard_max_iter
}

fn default_step() -> f64 {
    SolverConfig::default().ode_step
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            lipschitz_d0: None,
            window: None,
            picard_tol: default_tol(),
            picard_max_iter: default_max_iter(),
            ode_step: default_step(),
            ode_method: OdeMethod::Rk4,
            flow: FlowMethod::Picard,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
    /// Observable names written as CSV columns; all of them when empty.
    #[serde(default)]
    pub probes: Vec<String>,
}

fn default_dir() -> String {
    ".".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), probes: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// Suites run by `check`; every suite when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<String>>,
}

/// A simulation experiment as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algebra: AlgebraSpec,
    #[serde(default)]
    pub observables: BTreeMap<String, ObservableSpec>,
    pub hamiltonian: HamiltonianSpec,
    pub initial_states: Vec<StateSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckSpec>,
}

/// A validated experiment, ready to run.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub dim: usize,
    pub registry: ObservableRegistry,
    pub hamiltonian: Hamiltonian,
    pub states: Vec<State>,
    pub grid: Vec<f64>,
    pub solver: SolverConfig,
    pub flow: FlowMethod,
    pub probes: Vec<(String, AlgebraElement)>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub suites: Option<Vec<String>>,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(if path == "." { "config".into() } else { path }, e.into_inner())
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(path.display().to_string(), e))?;
        Self::from_json_str(&text)
    }

    /// Pretty JSON with sorted maps and explicit defaults; a fixed point of
    /// parse-then-serialize.
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn dim(&self) -> Result<usize> {
        match (self.algebra.qubits, self.algebra.dim) {
            (Some(q), None) if (1..=10).contains(&q) => Ok(1usize << q),
            (Some(q), None) => Err(config_error("algebra.qubits", format!("{q} qubits not in 1..=10"))),
            (None, Some(d)) if d >= 1 => Ok(d),
            (None, Some(_)) => Err(config_error("algebra.dim", "dimension must be positive")),
            _ => Err(config_error("algebra", "give exactly one of `qubits` and `dim`")),
        }
    }

    pub fn grid_nodes(&self) -> Result<Vec<f64>> {
        let GridSpec { start, stop, step } = self.grid;
        if !(start.is_finite() && stop.is_finite()) {
            return Err(config_error("grid", "start and stop must be finite"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(config_error("grid.step", "step must be positive"));
        }
        if stop < start {
            return Err(config_error("grid.stop", "stop precedes start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        let mut nodes: Vec<f64> = (0..=count).map(|k| start + k as f64 * step).collect();
        let last = *nodes.last().expect("nonempty");
        if stop - last > 1e-9 * step {
            nodes.push(stop);
        } else {
            *nodes.last_mut().expect("nonempty") = stop;
        }
        Ok(nodes)
    }

    pub fn build(&self) -> Result<Experiment> {
        let dim = self.dim()?;
        let registry = build_registry(&self.observables, Some(dim), "observables")?;
        let hamiltonian = self.hamiltonian(&registry)?;
        let grid = self.grid_nodes()?;
        hamiltonian.check_modulation(grid[0], *grid.last().expect("nonempty")).map_err(|e| config_error("hamiltonian", e))?;
        if self.initial_states.is_empty() {
            return Err(config_error("initial_states", "at least one initial state is required"));
        }
        let states = self
            .initial_states
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let path = format!("initial_states[{k}]");
                if s.needs_seed() && self.seed.is_none() {
                    return Err(config_error("seed", format!("required by {path}")));
                }
                s.build(dim, self.seed.map(|x| x.wrapping_add(k as u64)), &path)
            })
            .collect::<Result<Vec<_>>>()?;
        let solver = self.solver_config(&hamiltonian, &grid)?;
        let probes = if self.outputs.probes.is_empty() {
            registry.names().iter().cloned().zip(registry.observables().iter().cloned()).collect()
        } else {
            self.outputs
                .probes
                .iter()
                .enumerate()
                .map(|(k, name)| {
                    let j = registry
                        .index_of(name)
                        .map_err(|_| config_error(format!("outputs.probes[{k}]"), format!("unknown observable `{name}`")))?;
                    Ok((name.clone(), registry.get(j).clone()))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Experiment {
            dim,
            registry,
            hamiltonian,
            states,
            grid,
            solver,
            flow: self.solver.flow,
            probes,
            output_dir: PathBuf::from(&self.outputs.dir),
            seed: self.seed,
            suites: self.checks.as_ref().and_then(|c| c.suites.clone()),
        })
    }

    fn hamiltonian(&self, registry: &ObservableRegistry) -> Result<Hamiltonian> {
        let terms = &self.hamiltonian.terms;
        if terms.is_empty() {
            return Ok(Hamiltonian::zero(registry.clone()));
        }
        let plain = terms.iter().enumerate().filter(|(_, t)| t.modulation.is_none());
        let mut parts = Vec::new();
        let poly = polynomial_from_terms(registry, plain, "hamiltonian.terms")?;
        if !poly.is_zero() {
            parts.push((PolynomialFunction::new(registry.clone(), poly)?.to_cylindrical(), None));
        }
        for (k, term) in terms.iter().enumerate() {
            let Some(table) = &term.modulation else { continue };
            let path = format!("hamiltonian.terms[{k}]");
            let poly = polynomial_from_terms(registry, [(k, term)], "hamiltonian.terms")?;
            let modulation = Modulation::table(table.times.clone(), table.values.clone())
                .map_err(|e| config_error(format!("{path}.modulation"), e))?;
            parts.push((PolynomialFunction::new(registry.clone(), poly)?.to_cylindrical(), Some(modulation)));
        }
        if parts.is_empty() {
            return Ok(Hamiltonian::zero(registry.clone()));
        }
        Hamiltonian::from_components(parts).map_err(|e| config_error("hamiltonian", e))
    }

    fn solver_config(&self, h: &Hamiltonian, grid: &[f64]) -> Result<SolverConfig> {
        let spec = &self.solver;
        let span = (grid[0], *grid.last().expect("nonempty"));
        let d0 = match spec.lipschitz_d0 {
            Some(d) => d,
            None => lipschitz_analytic(h, span)
                .ok_or_else(|| config_error("solver.lipschitz_d0", "required for non-polynomial Hamiltonians"))?,
        };
        let default_window = SolverConfig::default().window;
        let window = spec.window.unwrap_or(if d0 > 0.0 { (0.25 / d0).min(default_window) } else { default_window });
        let cfg = SolverConfig {
            lipschitz_d0: d0,
            window,
            picard_tol: spec.picard_tol,
            picard_max_iter: spec.picard_max_iter,
            ode_step: spec.ode_step,
            ode_method: spec.ode_method,
        };
        cfg.validate().map_err(|e| match e {
            Error::ContractionViolated { .. } => config_error("solver.window", e),
            other => config_error("solver", other),
        })?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MEAN_FIELD: &str = r#"{
        "algebra": {"qubits": 1},
        "observables": {"x": "X", "y": "Y", "z": "Z"},
        "hamiltonian": {"terms": [{"coef": 0.5, "monomial": {"z": 2}}]},
        "initial_states": ["bloch(0.8, 0, 0.6)"],
        "grid": {"start": 0.0, "stop": 1.0, "step": 0.1}
    }"#;

    #[test]
    fn defaults_and_derived_window() {
        let cfg = ExperimentConfig::from_json_str(MEAN_FIELD).unwrap();
        let exp = cfg.build().unwrap();
        assert_eq!(exp.dim, 2);
        assert_eq!(exp.grid.len(), 11);
        assert_eq!(*exp.grid.last().unwrap(), 1.0);
        assert_eq!(exp.solver.lipschitz_d0, 1.0);
        assert_eq!(exp.solver.window, 0.25);
        assert_eq!(exp.probes.len(), 3);
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let cfg = ExperimentConfig::from_json_str(MEAN_FIELD).unwrap();
        let once = cfg.canonical_json();
        let twice = ExperimentConfig::from_json_str(&once).unwrap().canonical_json();
        assert_eq!(once, twice);
    }

    #[test]
    fn errors_carry_field_paths() {
        let path_of = |text: &str| match ExperimentConfig::from_json_str(text).and_then(|c| c.build().map(|_| ())) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("{other:?}"),
        };
        let big_window = MEAN_FIELD.replace(r#""grid""#, r#""solver": {"lipschitz_d0": 4.0, "window": 0.2}, "grid""#);
        assert_eq!(path_of(&big_window), "solver.window");
        assert_eq!(path_of(&MEAN_FIELD.replace("\"step\": 0.1", "\"step\": -0.1")), "grid.step");
        assert_eq!(path_of(&MEAN_FIELD.replace("\"z\": 2", "\"w\": 2")), "hamiltonian.terms[0].monomial.w");
        assert_eq!(path_of(&MEAN_FIELD.replace("\"step\": 0.1", "\"step\": \"fast\"")), "grid.step");
        assert_eq!(path_of(&MEAN_FIELD.replace("bloch(0.8, 0, 0.6)", "random")), "seed");
        assert_eq!(path_of(&MEAN_FIELD.replace("\"Z\"", "\"ZZ\"")), "observables.z");
    }
}
