use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// A functional `σ` on the predual, stored by its coordinates against a
/// fixed basis `A_1 … A_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Functional(Vec<f64>);

impl Functional {
    pub fn new(coordinates: Vec<f64>) -> Result<Self> {
        if coordinates.is_empty() {
            return Err(Error::InvalidInput("functional with no coordinates".into()));
        }
        if let Some(k) = coordinates.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("coordinate {k} is not finite")));
        }
        Ok(Self(coordinates))
    }

    pub(crate) fn from_trusted(coordinates: Vec<f64>) -> Self {
        Self(coordinates)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `σ(A)` for a biorthogonal predual basis.
    pub fn pair(&self, a: &PredualVector) -> C64 {
        debug_assert_eq!(a.dim(), self.dim());
        let (mut re, mut im) = (0.0, 0.0);
        for ((c, r), i) in self.0.iter().zip(&a.re).zip(&a.im) {
            re += c * r;
            im += c * i;
        }
        C64::new(re, im)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `(1 − λ)·self + λ·other`.
    pub fn lerp(&self, other: &Self, lambda: f64) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// A predual vector `A = Σ_k (re_k + i im_k) A_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredualVector {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl PredualVector {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch { expected: re.len(), found: im.len() });
        }
        if re.iter().chain(&im).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("predual vector has non-finite entries".into()));
        }
        Ok(Self { re, im })
    }

    pub fn real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        Self { re, im }
    }

    pub fn unit(dim: usize, k: usize) -> Self {
        let mut re = vec![0.0; dim];
        re[k] = 1.0;
        Self::real(re)
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.re.iter().chain(&self.im).map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { re: self.re.iter().map(|v| c * v).collect(), im: self.im.iter().map(|v| c * v).collect() }
    }
}

/// Pairing `σ(A) = Σ_{jk} σ_j P_{jk} a_k` for a basis that is not biorthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Pairing(DMatrix<f64>);

impl Pairing {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        Ok(Self(matrix))
    }

    /// Coordinates of `A` in the dual basis, so that [`Functional::pair`] applies.
    pub fn to_biorthogonal(&self, a: &PredualVector) -> Result<PredualVector> {
        if a.dim() != self.0.ncols() {
            return Err(Error::DimensionMismatch { expected: self.0.ncols(), found: a.dim() });
        }
        let map = |v: &[f64]| (&self.0 * nalgebra::DVector::from_column_slice(v)).iter().copied().collect();
        Ok(PredualVector { re: map(&a.re), im: map(&a.im) })
    }
}

/// A finite vertex list whose convex hull is the set.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    pub(crate) vertices: Vec<Functional>,
    pub(crate) reduced: bool,
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Functional>) -> Result<Self> {
        let first = vertices.first().ok_or(Error::EmptyPolytope)?;
        let dim = first.dim();
        if let Some(v) = vertices.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
        }
        Ok(Self { vertices, reduced: false })
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(points.into_iter().map(Functional::new).collect::<Result<_>>()?)
    }

    pub fn singleton(v: Functional) -> Self {
        Self { vertices: vec![v], reduced: true }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Functional] {
        &self.vertices
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn barycenter(&self) -> Functional {
        let n = self.vertices.len() as f64;
        let mut c = vec![0.0; self.dim()];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v.coordinates()) {
                *ci += vi / n;
            }
        }
        Functional(c)
    }

    /// The polytope with `extra` appended to its vertex list.
    pub fn with_points(&self, extra: impl IntoIterator<Item = Functional>) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        vertices.extend(extra);
        Self::new(vertices)
    }

    pub fn max_norm(&self) -> f64 {
        self.vertices.iter().map(Functional::norm).fold(0.0, f64::max)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PolytopeJson {
            dim: self.dim(),
            vertices: self.vertices.iter().map(|v| v.0.clone()).collect(),
        })
        .expect("plain numeric data")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: PolytopeJson =
            serde_json::from_value(value.clone()).map_err(|e| Error::InvalidInput(format!("polytope: {e}")))?;
        let p = Self::from_points(raw.vertices)?;
        p.check_dim(raw.dim)?;
        Ok(p)
    }
}

/// Test vectors `A_1 … A_M` with `‖A_n‖ ≤ 1` defining
/// `d(σ1, σ2) = Σ_n 2^{-n} |(σ1 − σ2)(A_n)|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricBasis {
    vectors: Vec<PredualVector>,
}

impl MetricBasis {
    pub fn new(vectors: Vec<PredualVector>) -> Result<Self> {
        let first = vectors.first().ok_or_else(|| Error::InvalidInput("metric basis is empty".into()))?;
        let dim = first.dim();
        for (n, a) in vectors.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.dim() });
            }
            if a.norm() > 1.0 + 1e-12 {
                return Err(Error::InvalidInput(format!("test vector {} has norm {} > 1", n + 1, a.norm())));
            }
        }
        Ok(Self { vectors })
    }

    pub fn standard(dim: usize) -> Self {
        Self { vectors: (0..dim).map(|k| PredualVector::unit(dim, k)).collect() }
    }

    pub fn vectors(&self) -> &[PredualVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn is_real(&self) -> bool {
        self.vectors.iter().all(PredualVector::is_real)
    }

    /// Weights `2^{-n}`, `n = 1 … M`.
    pub fn weights(&self) -> Vec<f64> {
        (1..=self.vectors.len()).map(|n| 0.5f64.powi(n as i32)).collect()
    }
}
