use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bracket::StateFunction;
use super::{ObservableRegistry, Polynomial};
use crate::algebra::{AlgebraElement, State};
use crate::error::{Error, Result};

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Polynomial function of states: a polynomial in the moments `ρ(B_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialFunction {
    registry: ObservableRegistry,
    poly: Polynomial,
}

impl PolynomialFunction {
    pub fn new(registry: ObservableRegistry, poly: Polynomial) -> Result<Self> {
        if poly.nvars() != registry.len() {
            return Err(Error::DimensionMismatch { expected: registry.len(), found: poly.nvars() });
        }
        Ok(Self { registry, poly })
    }

    pub fn constant(registry: ObservableRegistry, c: f64) -> Self {
        let poly = Polynomial::constant(registry.len(), c);
        Self { registry, poly }
    }

    /// The affine function `ρ ↦ ρ(B)` for the named registry entry.
    pub fn variable(registry: ObservableRegistry, name: &str) -> Result<Self> {
        let j = registry.index_of(name)?;
        let poly = Polynomial::variable(registry.len(), j);
        Ok(Self { registry, poly })
    }

    /// `ρ ↦ ρ(A)` over a one-element registry.
    pub fn observable(name: &str, a: AlgebraElement) -> Result<Self> {
        let registry = ObservableRegistry::from_pairs(a.dim(), [(name, a)])?;
        Self::variable(registry, name)
    }

    pub fn registry(&self) -> &ObservableRegistry {
        &self.registry
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    fn lift_pair(&self, other: &Self) -> Result<(ObservableRegistry, Polynomial, Polynomial)> {
        let (merged, map) = self.registry.merge(&other.registry)?;
        let a = self.poly.extend(merged.len());
        let b = other.poly.substitute(merged.len(), &map);
        Ok((merged, a, b))
    }

    /// Rewrites over a registry containing (multiples of) all our observables.
    pub fn lift_to(&self, target: &ObservableRegistry) -> Result<Self> {
        let (merged, map) = target.merge(&self.registry)?;
        if merged.len() != target.len() {
            return Err(Error::InvalidInput("target registry does not contain all observables".into()));
        }
        Ok(Self { registry: merged, poly: self.poly.substitute(target.len(), &map) })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (registry, a, b) = self.lift_pair(other)?;
        Ok(Self { registry, poly: a.add(&b) })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (registry, a, b) = self.lift_pair(other)?;
        Ok(Self { registry, poly: a.mul(&b) })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { registry: self.registry.clone(), poly: self.poly.scale(s) }
    }

    pub fn to_cylindrical(&self) -> CylindricalFunction {
        CylindricalFunction { registry: self.registry.clone(), g: ScalarMap::Polynomial(self.poly.clone()) }
    }
}

/// The outer function `g` of a cylindrical function, with derivative access.
#[derive(Clone)]
pub enum ScalarMap {
    Polynomial(Polynomial),
    Custom { value: ValueFn, gradient: VectorFn, hessian: VectorFn },
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial(p) => f.debug_tuple("Polynomial").field(p).finish(),
            Self::Custom { .. } => f.write_str("Custom"),
        }
    }
}

/// `f(ρ) = g(ρ(B_1), …, ρ(B_n))`.
#[derive(Clone, Debug)]
pub struct CylindricalFunction {
    registry: ObservableRegistry,
    g: ScalarMap,
}

impl CylindricalFunction {
    pub fn constant(registry: ObservableRegistry, c: f64) -> Self {
        PolynomialFunction::constant(registry, c).to_cylindrical()
    }

    /// Cylindrical function with caller-supplied value, gradient and row-major
    /// Hessian. The derivatives are spot-checked against central differences.
    pub fn custom(registry: ObservableRegistry, value: ValueFn, gradient: VectorFn, hessian: VectorFn) -> Result<Self> {
        check_derivatives(&registry, &*value, &*gradient, &*hessian)?;
        Ok(Self { registry, g: ScalarMap::Custom { value, gradient, hessian } })
    }

    pub fn registry(&self) -> &ObservableRegistry {
        &self.registry
    }

    pub fn scalar_map(&self) -> &ScalarMap {
        &self.g
    }

    pub fn as_polynomial(&self) -> Option<PolynomialFunction> {
        match &self.g {
            ScalarMap::Polynomial(p) => Some(PolynomialFunction { registry: self.registry.clone(), poly: p.clone() }),
            ScalarMap::Custom { .. } => None,
        }
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        match &self.g {
            ScalarMap::Polynomial(p) => p.eval(x),
            ScalarMap::Custom { value, .. } => value(x),
        }
    }

    pub fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.g {
            ScalarMap::Polynomial(p) => p.gradient(x),
            ScalarMap::Custom { gradient, .. } => gradient(x),
        }
    }

    pub fn hessian_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.g {
            ScalarMap::Polynomial(p) => p.hessian(x),
            ScalarMap::Custom { hessian, .. } => hessian(x),
        }
    }

    /// `s·f`.
    pub fn scale(&self, s: f64) -> Self {
        let g = match &self.g {
            ScalarMap::Polynomial(p) => ScalarMap::Polynomial(p.scale(s)),
            ScalarMap::Custom { value, gradient, hessian } => {
                let (v, gr, h) = (value.clone(), gradient.clone(), hessian.clone());
                ScalarMap::Custom {
                    value: Arc::new(move |x| s * v(x)),
                    gradient: Arc::new(move |x| gr(x).into_iter().map(|d| s * d).collect()),
                    hessian: Arc::new(move |x| h(x).into_iter().map(|d| s * d).collect()),
                }
            }
        };
        Self { registry: self.registry.clone(), g }
    }

    /// `Σ_j (B_j − x_j 1) c_j` for a coefficient vector `c`.
    pub(crate) fn centered_combination(&self, x: &[f64], c: &[f64]) -> AlgebraElement {
        let d = self.registry.dim();
        let mut m = AlgebraElement::zeros(d);
        let mut shift = 0.0;
        for (j, b) in self.registry.observables().iter().enumerate() {
            if c[j] != 0.0 {
                m = &m + &b.scale(c[j]);
                shift += c[j] * x[j];
            }
        }
        &m - &AlgebraElement::identity(d).scale(shift)
    }
}

impl From<PolynomialFunction> for CylindricalFunction {
    fn from(p: PolynomialFunction) -> Self {
        Self { registry: p.registry, g: ScalarMap::Polynomial(p.poly) }
    }
}

impl StateFunction for CylindricalFunction {
    fn dim(&self) -> usize {
        self.registry.dim()
    }

    fn evaluate(&self, rho: &State) -> Result<f64> {
        Ok(self.value_at(&self.registry.moments(rho)?))
    }

    fn d_operator(&self, rho: &State) -> Result<AlgebraElement> {
        let x = self.registry.moments(rho)?;
        let g = self.gradient_at(&x);
        Ok(self.centered_combination(&x, &g))
    }

    fn gateaux(&self, rho: &State, ups: &State) -> Result<f64> {
        let x = self.registry.moments(rho)?;
        let y = self.registry.moments(ups)?;
        let g = self.gradient_at(&x);
        Ok(y.iter().zip(&x).zip(&g).map(|((y, x), g)| (y - x) * g).sum())
    }
}

impl StateFunction for PolynomialFunction {
    fn dim(&self) -> usize {
        self.registry.dim()
    }

    fn evaluate(&self, rho: &State) -> Result<f64> {
        Ok(self.poly.eval(&self.registry.moments(rho)?))
    }

    fn d_operator(&self, rho: &State) -> Result<AlgebraElement> {
        self.to_cylindrical().d_operator(rho)
    }

    fn gateaux(&self, rho: &State, ups: &State) -> Result<f64> {
        self.to_cylindrical().gateaux(rho, ups)
    }
}

fn check_derivatives(
    registry: &ObservableRegistry,
    value: &(dyn Fn(&[f64]) -> f64 + Send + Sync),
    gradient: &(dyn Fn(&[f64]) -> Vec<f64> + Send + Sync),
    hessian: &(dyn Fn(&[f64]) -> Vec<f64> + Send + Sync),
) -> Result<()> {
    const STEP: f64 = 1e-5;
    const REL: f64 = 1e-5;
    let n = registry.len();
    let radius: Vec<f64> = registry.norms().into_iter().map(|r| if r > 0.0 { r } else { 1.0 }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for point in 0..8 {
        let x: Vec<f64> = radius.iter().map(|r| rng.random_range(-*r..=*r)).collect();
        let g = gradient(&x);
        let h = hessian(&x);
        if g.len() != n || h.len() != n * n {
            return Err(Error::InconsistentDerivative { point, detail: "wrong derivative length".into() });
        }
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += STEP;
            xm[j] -= STEP;
            let fd = (value(&xp) - value(&xm)) / (2.0 * STEP);
            if (fd - g[j]).abs() > REL * g[j].abs().max(1.0) {
                return Err(Error::InconsistentDerivative {
                    point,
                    detail: format!("gradient component {j}: callback {} vs difference {fd}", g[j]),
                });
            }
            let (gp, gm) = (gradient(&xp), gradient(&xm));
            for k in 0..n {
                let fd = (gp[k] - gm[k]) / (2.0 * STEP);
                let hv = h[j * n + k];
                if (fd - hv).abs() > REL * hv.abs().max(1.0) {
                    return Err(Error::InconsistentDerivative {
                        point,
                        detail: format!("Hessian entry ({j}, {k}): callback {hv} vs difference {fd}"),
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_registry() -> ObservableRegistry {
        ObservableRegistry::from_pauli(&["Z"]).unwrap()
    }

    #[test]
    fn custom_callbacks_are_spot_checked() {
        let ok = CylindricalFunction::custom(
            z_registry(),
            Arc::new(|x| x[0].sin()),
            Arc::new(|x| vec![x[0].cos()]),
            Arc::new(|x| vec![-x[0].sin()]),
        );
        assert!(ok.is_ok());
        let bad = CylindricalFunction::custom(
            z_registry(),
            Arc::new(|x| x[0].sin()),
            Arc::new(|x| vec![1.01 * x[0].cos()]),
            Arc::new(|x| vec![-x[0].sin()]),
        );
        assert!(matches!(bad, Err(Error::InconsistentDerivative { point: 0, .. })));
        let bad_hessian = CylindricalFunction::custom(
            z_registry(),
            Arc::new(|x| x[0].sin()),
            Arc::new(|x| vec![x[0].cos()]),
            Arc::new(|_| vec![0.0]),
        );
        assert!(matches!(bad_hessian, Err(Error::InconsistentDerivative { .. })));
    }

    #[test]
    fn custom_and_polynomial_agree() {
        let p = PolynomialFunction::new(z_registry(), Polynomial::from_terms(1, [(vec![2], 0.5)])).unwrap();
        let c = CylindricalFunction::custom(
            z_registry(),
            Arc::new(|x| 0.5 * x[0] * x[0]),
            Arc::new(|x| vec![x[0]]),
            Arc::new(|_| vec![1.0]),
        )
        .unwrap();
        let rho = State::bloch(0.1, 0.2, 0.6).unwrap();
        let dp = p.d_operator(&rho).unwrap();
        let dc = c.d_operator(&rho).unwrap();
        assert!((&dp - &dc).max_abs() < 1e-15);
        assert!((p.evaluate(&rho).unwrap() - c.evaluate(&rho).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn arithmetic_merges_registries() {
        let x = PolynomialFunction::observable("X", crate::algebra::pauli_letter('X').unwrap()).unwrap();
        let z = PolynomialFunction::observable("Z", crate::algebra::pauli_letter('Z').unwrap()).unwrap();
        let xz = x.mul(&z).unwrap().add(&x).unwrap();
        assert_eq!(xz.registry().len(), 2);
        let rho = State::bloch(0.8, 0.0, 0.6).unwrap();
        assert!((xz.evaluate(&rho).unwrap() - (0.48 + 0.8)).abs() < 1e-15);
    }
}
