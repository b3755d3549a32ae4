use crate::algebra::{AlgebraElement, State};
use crate::error::{Error, Result};
use crate::io::pauli::PauliString;

/// Ordered, uniquely named Hermitian observables `B_1, …, B_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRegistry {
    dim: usize,
    names: Vec<String>,
    observables: Vec<AlgebraElement>,
}

impl ObservableRegistry {
    pub fn new(dim: usize) -> Self {
        Self { dim, names: Vec::new(), observables: Vec::new() }
    }

    pub fn from_pairs<S: Into<String>>(dim: usize, pairs: impl IntoIterator<Item = (S, AlgebraElement)>) -> Result<Self> {
        let mut r = Self::new(dim);
        for (n, b) in pairs {
            r.add(n, b)?;
        }
        Ok(r)
    }

    /// Registry whose variable names are the given Pauli expressions.
    pub fn from_pauli(texts: &[&str]) -> Result<Self> {
        let parsed = texts.iter().map(|t| crate::io::pauli::parse_pauli(t)).collect::<Result<Vec<_>>>()?;
        let dim = parsed.first().map(|m| m.dim()).ok_or_else(|| Error::InvalidInput("no observables".into()))?;
        Self::from_pairs(dim, texts.iter().map(|t| t.to_string()).zip(parsed))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn observables(&self) -> &[AlgebraElement] {
        &self.observables
    }

    pub fn get(&self, j: usize) -> &AlgebraElement {
        &self.observables[j]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownObservable(name.to_string()))
    }

    /// Appends a Hermitian observable under a fresh name.
    pub fn add(&mut self, name: impl Into<String>, b: AlgebraElement) -> Result<usize> {
        let name = name.into();
        b.check_dim(self.dim)?;
        let defect = b.hermitian_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian { defect });
        }
        if self.names.contains(&name) {
            return Err(Error::DuplicateName(name));
        }
        self.names.push(name);
        self.observables.push(b.hermitian_part());
        Ok(self.names.len() - 1)
    }

    /// Finds `j, c` with `b = c·B_j` within `1e-12`.
    pub fn find_multiple(&self, b: &AlgebraElement) -> Option<(usize, f64)> {
        let scale = b.max_abs().max(1.0);
        self.observables.iter().enumerate().find_map(|(j, bj)| {
            let nn = bj.real_inner(bj);
            if nn == 0.0 {
                return None;
            }
            let c = bj.real_inner(b) / nn;
            ((b - &bj.scale(c)).max_abs() <= 1e-12 * scale).then_some((j, c))
        })
    }

    /// Returns `(j, c)` with `b = c·B_j`, registering `b` if it is not a
    /// multiple of an existing observable.
    ///
    /// New entries are named by their Pauli expansion when `d = 2^k` and by
    /// `fallback` otherwise; clashing names get a `'` suffix.
    pub fn intern(&mut self, b: AlgebraElement, fallback: impl FnOnce() -> String) -> Result<(usize, f64)> {
        if let Some(hit) = self.find_multiple(&b) {
            return Ok(hit);
        }
        let mut name = PauliString::from_element(&b).map(|p| p.to_string()).unwrap_or_else(fallback);
        while self.names.contains(&name) {
            name.push('\'');
        }
        Ok((self.add(name, b)?, 1.0))
    }

    /// Union with `other`; returns the merged registry and the map sending
    /// each variable of `other` to `(index, scale)` in the union.
    pub fn merge(&self, other: &Self) -> Result<(Self, Vec<(usize, f64)>)> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut merged = self.clone();
        let mut map = Vec::with_capacity(other.len());
        for (name, b) in other.names.iter().zip(&other.observables) {
            map.push(merged.intern(b.clone(), || name.clone())?);
        }
        Ok((merged, map))
    }

    /// Moment vector `(ρ(B_1), …, ρ(B_n))`.
    pub fn moments(&self, rho: &State) -> Result<Vec<f64>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        Ok(self.observables.iter().map(|b| rho.expect(b)).collect())
    }

    pub fn norms(&self) -> Vec<f64> {
        self.observables.iter().map(|b| b.operator_norm()).collect()
    }
}
