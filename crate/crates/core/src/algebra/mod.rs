//! Finite-dimensional C*-algebra `M_d(C)`: elements, the Heisenberg bracket,
//! the state pairing and norms.
//!
//! Everything spectral goes through the Hermitian eigensolver; norms of
//! non-Hermitian elements are computed from `A*A`.

mod basis;
mod state;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::C64;

pub use basis::{pauli_decomposition, pauli_letter, pauli_string, probe_basis, qubit_count};
pub use state::{is_extreme, purity, validate_state, State};

pub type CMatrix = DMatrix<C64>;

/// Size and optional basis naming of the ambient matrix algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraContext {
    dim: usize,
    basis_labels: Option<Vec<String>>,
}

impl AlgebraContext {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("algebra dimension must be at least 1".into()));
        }
        Ok(Self { dim, basis_labels: None })
    }

    /// `n`-qubit algebra with the Pauli-string basis registered.
    pub fn qubits(n: usize) -> Result<Self> {
        if n == 0 || n > 12 {
            return Err(Error::InvalidInput(format!("unsupported qubit count {n}")));
        }
        let labels = basis::pauli_labels(n);
        Ok(Self { dim: 1 << n, basis_labels: Some(labels) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_labels(&self) -> Option<&[String]> {
        self.basis_labels.as_deref()
    }

    pub fn identity(&self) -> AlgebraElement {
        AlgebraElement::identity(self.dim)
    }

    /// Seeded GUE-like Hermitian matrix `(G + G*)/2`.
    pub fn random_hermitian(&self, seed: u64) -> AlgebraElement {
        let g = ginibre(self.dim, seed);
        AlgebraElement((&g + g.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Seeded random density matrix `GG*/Tr(GG*)`.
    pub fn random_state(&self, seed: u64) -> State {
        let g = ginibre(self.dim, seed);
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        State::from_trusted(m / C64::new(tr, 0.0))
    }

    /// Seeded pure state drawn from the unitarily invariant measure.
    pub fn random_pure_state(&self, seed: u64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<C64> = (0..self.dim)
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        State::pure(&v).expect("nonzero Gaussian vector")
    }
}

fn ginibre(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    })
}

/// An element of `M_d(C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement(CMatrix);

impl AlgebraElement {
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        Ok(Self(m))
    }

    /// Builds a Hermitian element, rejecting matrices off by more than `1e-12`.
    pub fn hermitian(m: CMatrix) -> Result<Self> {
        let a = Self::from_matrix(m)?;
        let defect = a.hermitian_defect();
        if defect > 1e-12 * a.max_abs().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(a.hermitian_part())
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) }))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                d = d.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Returns `Some(c)` when the element equals `c·1` exactly.
    pub fn as_scalar(&self) -> Option<C64> {
        let n = self.dim();
        let c = self.0[(0, 0)];
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { c } else { C64::new(0.0, 0.0) };
                if self.0[(i, j)] != expected {
                    return None;
                }
            }
        }
        Some(c)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.hermitian_part().0.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Largest singular value, via the top eigenvalue of `A*A`.
    pub fn operator_norm(&self) -> f64 {
        let gram = self.0.adjoint() * &self.0;
        let top = AlgebraElement(gram).hermitian_eigenvalues().last().copied().unwrap_or(0.0);
        top.max(0.0).sqrt()
    }

    /// `min_c ||A - c·1||` for Hermitian `A`: half the spectral spread.
    ///
    /// This is the norm that controls the derivation `i[A, ·]`.
    pub fn centered_norm(&self) -> f64 {
        let ev = self.hermitian_eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(lo), Some(hi)) => 0.5 * (hi - lo),
            _ => 0.0,
        }
    }

    /// Frobenius inner product `Re Tr(A* B)`.
    pub fn real_inner(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(&self.0 * C64::new(c, 0.0))
    }

    /// `U* A U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self(u.adjoint() * &self.0 * u)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        Ok(())
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: Self) -> AlgebraElement {
        AlgebraElement(&self.0 + &rhs.0)
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        AlgebraElement(&self.0 - &rhs.0)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Self) -> AlgebraElement {
        AlgebraElement(&self.0 * &rhs.0)
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: f64) -> AlgebraElement {
        self.scale(rhs)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement(-&self.0)
    }
}

/// The Heisenberg bracket `i(AB - BA)`.
pub fn commutator(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    b.check_dim(a.dim())?;
    Ok(raw_commutator(&a.0, &b.0).into())
}

pub(crate) fn raw_commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    (a * b - b * a) * C64::new(0.0, 1.0)
}

/// `Tr(ρA)`.
pub fn pair(rho: &State, a: &AlgebraElement) -> Result<C64> {
    a.check_dim(rho.dim())?;
    Ok(trace_product(rho.matrix(), a.matrix()))
}

/// `Tr(AB)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn operator_norm(a: &AlgebraElement) -> f64 {
    a.operator_norm()
}

impl From<CMatrix> for AlgebraElement {
    /// Panics on non-square input.
    fn from(m: CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "algebra elements are square");
        Self(m)
    }
}

/// Polar projection `V (V*V)^{-1/2}` onto the unitary group.
pub(crate) fn polar_unitary(v: &CMatrix) -> CMatrix {
    let gram = v.adjoint() * v;
    let eig = gram.symmetric_eigen();
    let inv_sqrt = eig.eigenvalues.map(|x| C64::new(1.0 / x.max(f64::MIN_POSITIVE).sqrt(), 0.0));
    let q = &eig.eigenvectors;
    v * (q * DMatrix::from_diagonal(&inv_sqrt) * q.adjoint())
}

/// `max |(V*V - 1)_{ij}|`.
pub(crate) fn unitarity_defect(v: &CMatrix) -> f64 {
    let n = v.nrows();
    let g = v.adjoint() * v;
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_commutators() {
        let x = pauli_letter('X').unwrap();
        let y = pauli_letter('Y').unwrap();
        let z = pauli_letter('Z').unwrap();
        assert_eq!(commutator(&x, &x).unwrap().max_abs(), 0.0);
        let xy = commutator(&x, &y).unwrap();
        assert!((&xy - &z.scale(-2.0)).max_abs() < 1e-15);
    }

    #[test]
    fn unit_is_central() {
        let ctx = AlgebraContext::new(3).unwrap();
        for seed in 0..10 {
            let a = ctx.random_hermitian(seed);
            assert!(commutator(&a, &ctx.identity()).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn commutator_rejects_mismatched_dims() {
        let a = AlgebraElement::identity(2);
        let b = AlgebraElement::identity(3);
        assert!(matches!(commutator(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pairing_examples() {
        let z = pauli_letter('Z').unwrap();
        let mixed = State::maximally_mixed(2);
        assert!(pair(&mixed, &z).unwrap().norm() < 1e-15);
        let up = State::basis(2, 0).unwrap();
        assert!((pair(&up, &z).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let rho = State::bloch(0.0, 0.0, 0.6).unwrap();
        assert!((pair(&rho, &z).unwrap().re - 0.6).abs() < 1e-15);
    }

    #[test]
    fn norms() {
        let x = pauli_letter('X').unwrap();
        let z = pauli_letter('Z').unwrap();
        assert!((z.operator_norm() - 1.0).abs() < 1e-14);
        assert_eq!(AlgebraElement::zeros(2).operator_norm(), 0.0);
        let a = &x.scale(2.0) + &AlgebraElement::identity(2);
        assert!((a.operator_norm() - 3.0).abs() < 1e-13);
        assert!((a.centered_norm() - 2.0).abs() < 1e-13);
        let nilpotent = AlgebraElement::from_matrix(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ))
        .unwrap();
        assert!((nilpotent.operator_norm() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn polar_restores_unitarity() {
        let ctx = AlgebraContext::new(3).unwrap();
        let h = ctx.random_hermitian(5);
        let u = (h.matrix() * C64::new(0.0, -0.3)).exp();
        let perturbed = &u + CMatrix::from_element(3, 3, c(1e-6, 0.0));
        assert!(unitarity_defect(&perturbed) > 1e-7);
        let fixed = polar_unitary(&perturbed);
        assert!(unitarity_defect(&fixed) < 1e-13);
        assert!((&fixed - &u).iter().all(|z| z.norm() < 1e-5));
    }
}
