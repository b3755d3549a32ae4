//! JSON encodings of matrices, observables, polynomial functions and states.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::pauli::{parse_pauli, PauliString};
use crate::algebra::{qubit_count, AlgebraContext, AlgebraElement, CMatrix, State};
use crate::error::{Error, Result};
use crate::observables::{ObservableRegistry, Polynomial, PolynomialFunction};
use crate::C64;

pub(crate) fn config_error(path: impl Into<String>, message: impl std::fmt::Display) -> Error {
    Error::Config { path: path.into(), message: message.to_string() }
}

/// A matrix as rows of `[re, im]` pairs, or the same pairs flattened row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl MatrixSpec {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self::Rows((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let (n, entries): (usize, Vec<[f64; 2]>) = match self {
            Self::Rows(rows) => {
                let n = rows.len();
                if let Some(r) = rows.iter().find(|r| r.len() != n) {
                    return Err(Error::NotSquare { rows: n, cols: r.len() });
                }
                (n, rows.concat())
            }
            Self::Flat(flat) => {
                let n = (flat.len() as f64).sqrt().round() as usize;
                if n * n != flat.len() {
                    return Err(Error::InvalidInput(format!("{} entries do not form a square matrix", flat.len())));
                }
                (n, flat.clone())
            }
        };
        if n == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(CMatrix::from_row_iterator(n, n, entries.iter().map(|[re, im]| C64::new(*re, *im))))
    }
}

pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixSpec::from_matrix(m)).expect("plain numeric data")
}

pub fn matrix_from_json(v: &serde_json::Value) -> Result<CMatrix> {
    let spec: MatrixSpec = serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("matrix: {e}")))?;
    spec.to_matrix()
}

/// An observable given as a Pauli expression or an explicit Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Pauli(String),
    Matrix(MatrixSpec),
}

impl ObservableSpec {
    pub fn from_element(a: &AlgebraElement) -> Self {
        match PauliString::from_element(a) {
            Some(p) => Self::Pauli(p.to_string()),
            None => Self::Matrix(MatrixSpec::from_matrix(a.matrix())),
        }
    }

    pub fn to_element(&self, path: &str) -> Result<AlgebraElement> {
        let m = match self {
            Self::Pauli(text) => return parse_pauli(text).map_err(|e| config_error(path, e)),
            Self::Matrix(spec) => spec.to_matrix().map_err(|e| config_error(path, e))?,
        };
        AlgebraElement::hermitian(m).map_err(|e| config_error(path, e))
    }
}

/// Registry from named observables, checked against `dim` when given.
pub fn build_registry(
    observables: &BTreeMap<String, ObservableSpec>,
    dim: Option<usize>,
    path: &str,
) -> Result<ObservableRegistry> {
    let mut dim = dim;
    let mut pairs = Vec::with_capacity(observables.len());
    for (name, spec) in observables {
        let p = format!("{path}.{name}");
        let a = spec.to_element(&p)?;
        match dim {
            Some(d) if d != a.dim() => {
                return Err(config_error(p, format!("observable has dimension {}, expected {d}", a.dim())));
            }
            _ => dim = Some(a.dim()),
        }
        pairs.push((name.clone(), a));
    }
    let dim = dim.ok_or_else(|| config_error(path, "no observables and no dimension"))?;
    ObservableRegistry::from_pairs(dim, pairs).map_err(|e| config_error(path, e))
}

/// `coef · Π_name x_name^power`, optionally scaled by a time profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coef: f64,
    #[serde(default)]
    pub monomial: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<TableSpec>,
}

/// Piecewise-linear profile `a(t)` through `(times[k], values[k])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

pub(crate) fn polynomial_from_terms<'a>(
    registry: &ObservableRegistry,
    terms: impl IntoIterator<Item = (usize, &'a TermSpec)>,
    path: &str,
) -> Result<Polynomial> {
    let n = registry.len();
    let mut out = Vec::new();
    for (k, term) in terms {
        let p = format!("{path}[{k}]");
        if !term.coef.is_finite() {
            return Err(config_error(format!("{p}.coef"), "coefficient is not finite"));
        }
        let mut exp = vec![0u32; n];
        for (name, &power) in &term.monomial {
            let j = registry
                .index_of(name)
                .map_err(|_| config_error(format!("{p}.monomial.{name}"), "unknown observable"))?;
            exp[j] += power;
        }
        out.push((exp, term.coef));
    }
    Ok(Polynomial::from_terms(n, out))
}

/// A self-contained polynomial state function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub observables: BTreeMap<String, ObservableSpec>,
    pub terms: Vec<TermSpec>,
}

impl PolynomialSpec {
    pub fn to_function(&self) -> Result<PolynomialFunction> {
        let registry = build_registry(&self.observables, None, "observables")?;
        if let Some(k) = self.terms.iter().position(|t| t.modulation.is_some()) {
            return Err(config_error(format!("terms[{k}].modulation"), "not allowed here"));
        }
        let poly = polynomial_from_terms(&registry, self.terms.iter().enumerate(), "terms")?;
        PolynomialFunction::new(registry, poly)
    }

    pub fn from_function(f: &PolynomialFunction) -> Self {
        let reg = f.registry();
        let observables = reg
            .names()
            .iter()
            .zip(reg.observables())
            .map(|(n, a)| (n.clone(), ObservableSpec::from_element(a)))
            .collect();
        let terms = f
            .polynomial()
            .terms()
            .map(|(exp, coef)| TermSpec {
                coef,
                monomial: exp
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, &e)| (reg.names()[j].clone(), e))
                    .collect(),
                modulation: None,
            })
            .collect();
        Self { observables, terms }
    }
}

/// A state given by name (`"bloch(x,y,z)"`, `"basis(k)"`, `"mixed"`,
/// `"random"`, `"random_pure"`, or `;`-separated tensor factors) or as a
/// density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Matrix(MatrixSpec),
}

impl StateSpec {
    pub fn needs_seed(&self) -> bool {
        matches!(self, Self::Named(s) if s.contains("random"))
    }

    pub fn build(&self, dim: usize, seed: Option<u64>, path: &str) -> Result<State> {
        let st = match self {
            Self::Matrix(m) => State::new(m.to_matrix().map_err(|e| config_error(path, e))?),
            Self::Named(text) => named_state(text, dim, seed, path),
        }
        .map_err(|e| match e {
            Error::Config { .. } => e,
            other => config_error(path, other),
        })?;
        if st.dim() != dim {
            return Err(config_error(path, format!("state has dimension {}, expected {dim}", st.dim())));
        }
        Ok(st)
    }
}

fn named_state(text: &str, dim: usize, seed: Option<u64>, path: &str) -> Result<State> {
    let factors: Vec<&str> = text.split(';').map(str::trim).collect();
    if factors.len() > 1 {
        let parts = factors
            .iter()
            .enumerate()
            .map(|(k, f)| named_factor(f, None, seed.map(|s| s.wrapping_add(k as u64)), path))
            .collect::<Result<Vec<_>>>()?;
        return State::product(&parts);
    }
    named_factor(factors[0], Some(dim), seed, path)
}

fn named_factor(text: &str, dim: Option<usize>, seed: Option<u64>, path: &str) -> Result<State> {
    let (head, args) = match text.find('(') {
        Some(open) if text.ends_with(')') => (&text[..open], Some(&text[open + 1..text.len() - 1])),
        Some(_) => return Err(config_error(path, format!("malformed state `{text}`"))),
        None => (text, None),
    };
    let nums = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| config_error(path, format!("bad number `{}`", x.trim()))))
            .collect()
    };
    let need_seed = || seed.ok_or_else(|| config_error("seed", format!("required by random state at {path}")));
    let qubit_dim = dim.unwrap_or(2);
    match (head.trim(), args) {
        ("bloch", Some(a)) => {
            let v = nums(a)?;
            if v.len() != 3 {
                return Err(config_error(path, "bloch takes three components"));
            }
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm > 1.0 + 1e-12 {
                return Err(config_error(path, format!("bloch vector has norm {norm} > 1")));
            }
            State::bloch(v[0], v[1], v[2])
        }
        ("basis", Some(a)) => {
            let k: usize = a.trim().parse().map_err(|_| config_error(path, format!("bad index `{a}`")))?;
            State::basis(qubit_dim, k)
        }
        ("mixed", None) => Ok(State::maximally_mixed(qubit_dim)),
        ("random", None) => Ok(AlgebraContext::new(qubit_dim)?.random_state(need_seed()?)),
        ("random_pure", None) => Ok(AlgebraContext::new(qubit_dim)?.random_pure_state(need_seed()?)),
        _ => Err(config_error(path, format!("unknown state `{text}`"))),
    }
}

/// Pauli text of an element when `d = 2^k`, else its matrix.
pub fn element_to_json(a: &AlgebraElement) -> serde_json::Value {
    if qubit_count(a.dim()).is_some() {
        if let Some(p) = PauliString::from_element(a) {
            return serde_json::Value::String(p.to_string());
        }
    }
    matrix_to_json(a.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_and_flat_form() {
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, -2.5), C64::new(0.0, 2.5), C64::new(-3.0, 0.0)]);
        assert_eq!(matrix_from_json(&matrix_to_json(&m)).unwrap(), m);
        let flat = serde_json::json!([[1.0, 0.0], [0.0, -2.5], [0.0, 2.5], [-3.0, 0.0]]);
        assert_eq!(matrix_from_json(&flat).unwrap(), m);
        assert!(matrix_from_json(&serde_json::json!([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])).is_err());
    }

    #[test]
    fn polynomial_spec_round_trip() {
        let text = r#"{"observables": {"x": "X", "z": "Z"},
                       "terms": [{"coef": 0.5, "monomial": {"z": 2}}, {"coef": -1.0, "monomial": {"x": 1}}]}"#;
        let spec: PolynomialSpec = serde_json::from_str(text).unwrap();
        let f = spec.to_function().unwrap();
        assert_eq!(f.registry().names(), ["x", "z"]);
        let back = PolynomialSpec::from_function(&f);
        assert_eq!(back.to_function().unwrap().polynomial(), f.polynomial());
    }

    #[test]
    fn unknown_names_report_their_path() {
        let spec: PolynomialSpec =
            serde_json::from_str(r#"{"observables": {"x": "X"}, "terms": [{"coef": 1.0, "monomial": {"y": 1}}]}"#).unwrap();
        match spec.to_function() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "terms[0].monomial.y"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn named_states() {
        let s = StateSpec::Named("bloch(0.8, 0, 0.6)".into()).build(2, None, "s").unwrap();
        assert!((s.expect(&parse_pauli("X").unwrap()) - 0.8).abs() < 1e-15);
        let p = StateSpec::Named("bloch(0,0,1); basis(1)".into()).build(4, None, "s").unwrap();
        assert!((p.expect(&parse_pauli("ZZ").unwrap()) + 1.0).abs() < 1e-15);
        assert!(StateSpec::Named("bloch(1,1,0)".into()).build(2, None, "s").is_err());
        match StateSpec::Named("random".into()).build(2, None, "initial_states[0]") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "seed"),
            other => panic!("{other:?}"),
        }
        let r = StateSpec::Named("random".into()).build(3, Some(4), "s").unwrap();
        assert_eq!(r.dim(), 3);
    }
}
