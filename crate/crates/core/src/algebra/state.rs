use nalgebra::{DMatrix, DVector};

use super::{trace_product, AlgebraElement, CMatrix};
use crate::error::{Error, Result};
use crate::C64;

/// Tolerance used for the state invariants (positivity and normalization).
pub const STATE_TOL: f64 = 1e-10;

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    matrix: CMatrix,
}

/// Checks a candidate density matrix.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero and the result is
/// renormalized to unit trace.
pub fn validate_state(m: CMatrix, tol: f64) -> Result<State> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let a = AlgebraElement(m);
    let defect = a.hermitian_defect();
    if defect > tol {
        return Err(Error::NotHermitian { defect });
    }
    let h = a.hermitian_part().0;
    let eig = h.clone().symmetric_eigen();
    let min_ev = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !min_ev.is_finite() || min_ev < -tol {
        return Err(Error::NotPositive { min_eigenvalue: min_ev });
    }
    let trace = h.trace().re;
    if (trace - 1.0).abs() > tol {
        return Err(Error::TraceMismatch { trace });
    }
    let mut m = if min_ev < 0.0 {
        let clamped = eig.eigenvalues.map(|x| C64::new(x.max(0.0), 0.0));
        let q = &eig.eigenvectors;
        let r = q * DMatrix::from_diagonal(&clamped) * q.adjoint();
        AlgebraElement(r).hermitian_part().0
    } else {
        h
    };
    let tr = m.trace().re;
    m /= C64::new(tr, 0.0);
    Ok(State { matrix: m })
}

pub fn purity(rho: &State) -> f64 {
    trace_product(&rho.matrix, &rho.matrix).re
}

/// Pure states of `M_d` are exactly the rank-one projections.
pub fn is_extreme(rho: &State, tol: f64) -> bool {
    purity(rho) >= 1.0 - tol
}

impl State {
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn new(m: CMatrix) -> Result<Self> {
        validate_state(m, STATE_TOL)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    /// `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidInput(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let n2 = v.norm_squared();
        if !(n2 > 0.0) {
            return Err(Error::InvalidInput("zero vector".into()));
        }
        Ok(Self { matrix: &v * v.adjoint() / C64::new(n2, 0.0) })
    }

    /// Qubit state `(1 + xX + yY + zZ)/2`, requires `x²+y²+z² ≤ 1`.
    pub fn bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if r2 > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!("Bloch vector norm {} exceeds 1", r2.sqrt())));
        }
        let half = |v: f64| C64::new(0.5 * v, 0.0);
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[half(1.0 + z), C64::new(0.5 * x, -0.5 * y), C64::new(0.5 * x, 0.5 * y), half(1.0 - z)],
        );
        validate_state(m, STATE_TOL)
    }

    /// Product state over tensor factors.
    pub fn product(factors: &[State]) -> Result<Self> {
        let mut it = factors.iter();
        let first = it.next().ok_or_else(|| Error::InvalidInput("empty product".into()))?;
        let m = it.fold(first.matrix.clone(), |acc, f| acc.kronecker(&f.matrix));
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn as_element(&self) -> AlgebraElement {
        AlgebraElement(self.matrix.clone())
    }

    /// Real part of `ρ(A)`; callers pass Hermitian `A`.
    pub fn expect(&self, a: &AlgebraElement) -> f64 {
        trace_product(&self.matrix, a.matrix()).re
    }

    /// `(1-λ)ρ + λυ`; stays in the state space for `λ ∈ [0, 1]`.
    pub fn mix(&self, other: &State, lambda: f64) -> Result<State> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidInput(format!("mixing weight {lambda} outside [0, 1]")));
        }
        let m = &self.matrix * C64::new(1.0 - lambda, 0.0) + &other.matrix * C64::new(lambda, 0.0);
        Ok(State { matrix: m })
    }

    /// `UρU*`.
    pub fn evolve(&self, u: &CMatrix) -> State {
        let m = u * &self.matrix * u.adjoint();
        State { matrix: AlgebraElement(m).hermitian_part().0 }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.as_element().hermitian_eigenvalues()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli_letter, AlgebraContext};

    fn diag(a: f64, b: f64) -> CMatrix {
        AlgebraElement::from_real_diagonal(&[a, b]).into_matrix()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_state(State::maximally_mixed(2).matrix().clone(), 1e-10).is_ok());
        assert!(matches!(validate_state(diag(1.5, -0.5), 1e-10), Err(Error::NotPositive { .. })));
        let s = validate_state(diag(0.5, 0.5 - 1e-13), 1e-10).unwrap();
        assert!((s.matrix().trace().re - 1.0).abs() < 1e-15);
        assert!(matches!(validate_state(diag(0.5, 0.4), 1e-10), Err(Error::TraceMismatch { .. })));
        let mut m = diag(0.5, 0.5);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(validate_state(m, 1e-10), Err(Error::NotHermitian { .. })));
        assert!(matches!(validate_state(CMatrix::zeros(2, 3), 1e-10), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn slightly_negative_eigenvalue_is_clamped() {
        let s = validate_state(diag(1.0 + 5e-11, -5e-11), 1e-10).unwrap();
        assert!(s.eigenvalues()[0] >= 0.0);
        assert!((s.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn purity_examples() {
        let mixed = State::maximally_mixed(2);
        assert!((purity(&mixed) - 0.5).abs() < 1e-15);
        assert!(!is_extreme(&mixed, 1e-9));
        let up = State::basis(2, 0).unwrap();
        assert!((purity(&up) - 1.0).abs() < 1e-15);
        assert!(is_extreme(&up, 1e-9));
        let rho = State::bloch(0.0, 0.0, 0.6).unwrap();
        assert!((purity(&rho) - 0.68).abs() < 1e-14);
    }

    #[test]
    fn random_states_are_valid_and_deterministic() {
        let ctx = AlgebraContext::new(4).unwrap();
        let id = ctx.identity();
        for seed in 0..1000 {
            let r = ctx.random_state(seed);
            assert!(validate_state(r.matrix().clone(), 1e-10).is_ok());
            assert!((r.expect(&id) - 1.0).abs() < 1e-12);
        }
        assert_eq!(ctx.random_state(7), ctx.random_state(7));
        assert_eq!(ctx.random_hermitian(7), ctx.random_hermitian(7));
    }

    #[test]
    fn bloch_matches_pauli_expectations() {
        let rho = State::bloch(0.8, -0.2, 0.1).unwrap();
        for (l, v) in [('X', 0.8), ('Y', -0.2), ('Z', 0.1)] {
            assert!((rho.expect(&pauli_letter(l).unwrap()) - v).abs() < 1e-15);
        }
        assert!(State::bloch(1.0, 1.0, 0.0).is_err());
    }
}
