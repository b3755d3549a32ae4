use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use super::json::config_error;
use crate::error::Result;
use crate::hypertopology::{
    convex_hull_reduce, dh_a, hausdorff_d, monotone_limit_check, poulsen_construct, vertex_hausdorff, LimitReport,
    MetricBasis, Polytope, PoulsenTrace, PredualVector,
};

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| config_error(path.display().to_string(), e))
}

pub fn read_polytope(path: &Path) -> Result<Polytope> {
    Polytope::from_json(&read_json(path)?).map_err(|e| config_error(path.display().to_string(), e))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorSpec {
    Real(Vec<f64>),
    Complex { re: Vec<f64>, im: Vec<f64> },
}

/// A metric basis file: a list of real vectors or `{"re", "im"}` objects.
pub fn read_basis(path: &Path) -> Result<MetricBasis> {
    let specs: Vec<VectorSpec> =
        serde_json::from_value(read_json(path)?).map_err(|e| config_error(path.display().to_string(), e))?;
    let vectors = specs
        .into_iter()
        .map(|s| match s {
            VectorSpec::Real(re) => PredualVector::new(re.clone(), vec![0.0; re.len()]),
            VectorSpec::Complex { re, im } => PredualVector::new(re, im),
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| config_error(path.display().to_string(), e))?;
    MetricBasis::new(vectors).map_err(|e| config_error(path.display().to_string(), e))
}

/// `hausdorff_d`, the vertex-set distance and `dH_A` for each test vector.
pub fn distance_report(k1: &Polytope, k2: &Polytope, basis: &MetricBasis, tol: f64) -> Result<Value> {
    let per_vector = basis.vectors().iter().map(|a| dh_a(k1, k2, a)).collect::<Result<Vec<f64>>>()?;
    Ok(json!({
        "hausdorff_d": hausdorff_d(k1, k2, basis, tol)?,
        "vertex_hausdorff": vertex_hausdorff(k1, k2, basis)?,
        "dh_a": per_vector,
    }))
}

pub fn reduce(k: &Polytope) -> Result<Polytope> {
    convex_hull_reduce(k.vertices())
}

/// Runs the construction and returns the trace with its JSON log, which
/// also carries the final polytope in ambient coordinates.
pub fn poulsen(k0: &Polytope, epsilon: f64, steps: usize, bound: f64, seed: u64) -> Result<(PoulsenTrace, Value)> {
    let trace = poulsen_construct(k0, epsilon, steps, bound, seed)?;
    let mut log = trace.log_json();
    let basis = MetricBasis::standard(trace.ambient_dim);
    log["drift"] = json!(hausdorff_d(&trace.reference, &trace.current, &basis, 1e-9)?);
    log["drift_bound"] = json!(trace.drift_bound());
    log["final"] = trace.current_ambient().to_json();
    Ok((trace, log))
}

pub fn limits(sequence: &[Polytope], k: &Polytope, basis: &MetricBasis, tol: f64) -> Result<LimitReport> {
    monotone_limit_check(sequence, k, basis, tol)
}
