use std::fmt;
use std::sync::Arc;

use crate::algebra::{AlgebraElement, State};
use crate::error::{Error, Result};
use crate::observables::{CylindricalFunction, ObservableRegistry, PolynomialFunction, ScalarMap, StateFunction};

/// Scalar time profile `a(t)` multiplying a Hamiltonian component.
#[derive(Clone)]
pub enum Modulation {
    /// Piecewise-linear interpolation of a table, constant outside it.
    Table { times: Vec<f64>, values: Vec<f64> },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Table { times, values } => f.debug_struct("Table").field("times", times).field("values", values).finish(),
            Self::Function(_) => f.write_str("Function"),
        }
    }
}

impl Modulation {
    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidInput("modulation table needs matching nonempty times and values".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("modulation times must be strictly increasing".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("modulation table contains non-finite entries".into()));
        }
        Ok(Self::Table { times, values })
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Self::Function(f) => f(t),
            Self::Table { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let i = times.partition_point(|&x| x <= t) - 1;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    /// `sup |a|` over `[lo, hi]`: exact for tables, sampled on 1001 points otherwise.
    pub fn sup_abs(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Self::Table { times, .. } => {
                let inner = times.iter().filter(|&&x| x > lo && x < hi).map(|&x| self.at(x).abs());
                inner.chain([self.at(lo).abs(), self.at(hi).abs()]).fold(0.0, f64::max)
            }
            Self::Function(_) => (0..=1000)
                .map(|k| self.at(lo + (hi - lo) * k as f64 / 1000.0).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Checks finiteness on 1001 sample points of `[lo, hi]`.
    pub fn check_bounded(&self, lo: f64, hi: f64) -> Result<()> {
        for k in 0..=1000 {
            let t = lo + (hi - lo) * k as f64 / 1000.0;
            if !self.at(t).is_finite() {
                return Err(Error::InvalidInput(format!("time modulation is not finite at t = {t}")));
            }
        }
        Ok(())
    }

    fn reversed(&self) -> Self {
        match self {
            Self::Table { times, values } => Self::Table {
                times: times.iter().rev().map(|t| -t).collect(),
                values: values.iter().rev().copied().collect(),
            },
            Self::Function(f) => {
                let f = f.clone();
                Self::Function(Arc::new(move |t| f(-t)))
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Component {
    f: CylindricalFunction,
    modulation: Option<Modulation>,
}

/// Time-dependent energy function `h(t; ρ) = Σ_c a_c(t) g_c(ρ(B_1), …, ρ(B_n))`.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    registry: ObservableRegistry,
    components: Vec<Component>,
}

impl Hamiltonian {
    pub fn autonomous(f: impl Into<CylindricalFunction>) -> Self {
        let f = f.into();
        Self { registry: f.registry().clone(), components: vec![Component { f, modulation: None }] }
    }

    pub fn modulated(f: impl Into<CylindricalFunction>, modulation: Modulation) -> Self {
        let f = f.into();
        Self { registry: f.registry().clone(), components: vec![Component { f, modulation: Some(modulation) }] }
    }

    /// Sum of components. Polynomial components are lifted to a common
    /// registry; custom components must already share it.
    pub fn from_components(parts: Vec<(CylindricalFunction, Option<Modulation>)>) -> Result<Self> {
        let mut iter = parts.iter();
        let first = iter.next().ok_or_else(|| Error::InvalidInput("Hamiltonian needs a component".into()))?;
        let mut registry = first.0.registry().clone();
        for (f, _) in iter {
            registry = registry.merge(f.registry())?.0;
        }
        let mut components = Vec::with_capacity(parts.len());
        for (f, modulation) in parts {
            let f = if f.registry() == &registry {
                f
            } else if let Some(p) = f.as_polynomial() {
                p.lift_to(&registry)?.to_cylindrical()
            } else {
                return Err(Error::InvalidInput("custom components must share one registry".into()));
            };
            components.push(Component { f, modulation });
        }
        Ok(Self { registry, components })
    }

    /// The zero Hamiltonian over a registry.
    pub fn zero(registry: ObservableRegistry) -> Self {
        Self::autonomous(CylindricalFunction::constant(registry, 0.0))
    }

    pub fn registry(&self) -> &ObservableRegistry {
        &self.registry
    }

    pub fn dim(&self) -> usize {
        self.registry.dim()
    }

    pub fn is_autonomous(&self) -> bool {
        self.components.iter().all(|c| c.modulation.is_none())
    }

    /// True when `Dh` vanishes identically, so that every flow is constant.
    pub fn is_trivial(&self) -> bool {
        self.registry.is_empty()
            || self.components.iter().all(|c| match c.f.scalar_map() {
                ScalarMap::Polynomial(p) => p.degree() == 0,
                ScalarMap::Custom { .. } => false,
            })
    }

    pub fn is_polynomial(&self) -> bool {
        self.components.iter().all(|c| matches!(c.f.scalar_map(), ScalarMap::Polynomial(_)))
    }

    fn coefficient(c: &Component, t: f64) -> f64 {
        c.modulation.as_ref().map_or(1.0, |m| m.at(t))
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.components.iter().map(|c| Self::coefficient(c, t) * c.f.value_at(x)).sum()
    }

    pub fn gradient(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for c in &self.components {
            let a = Self::coefficient(c, t);
            for (gi, v) in g.iter_mut().zip(c.f.gradient_at(x)) {
                *gi += a * v;
            }
        }
        g
    }

    pub fn hessian(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; x.len() * x.len()];
        for c in &self.components {
            let a = Self::coefficient(c, t);
            for (hi, v) in h.iter_mut().zip(c.f.hessian_at(x)) {
                *hi += a * v;
            }
        }
        h
    }

    pub fn evaluate(&self, t: f64, rho: &State) -> Result<f64> {
        Ok(self.value(t, &self.registry.moments(rho)?))
    }

    /// The generator `Dh(t; ρ)`.
    pub fn d_operator(&self, t: f64, rho: &State) -> Result<AlgebraElement> {
        let x = self.registry.moments(rho)?;
        Ok(self.generator_at(t, &x))
    }

    pub(crate) fn generator_at(&self, t: f64, x: &[f64]) -> AlgebraElement {
        let g = self.gradient(t, x);
        let d = self.dim();
        let mut m = AlgebraElement::zeros(d);
        let mut shift = 0.0;
        for (j, b) in self.registry.observables().iter().enumerate() {
            if g[j] != 0.0 {
                m = &m + &b.scale(g[j]);
                shift += g[j] * x[j];
            }
        }
        &m - &AlgebraElement::identity(d).scale(shift)
    }

    /// `h(t; ·)` as a function of states.
    pub fn at(&self, t: f64) -> HamiltonianAt<'_> {
        HamiltonianAt { h: self, t }
    }

    /// `h(t; ·)` as a polynomial, when every component is polynomial.
    pub fn polynomial_at(&self, t: f64) -> Option<PolynomialFunction> {
        let mut acc = PolynomialFunction::constant(self.registry.clone(), 0.0);
        for c in &self.components {
            let p = c.f.as_polynomial()?;
            acc = acc.add(&p.scale(Self::coefficient(c, t))).ok()?;
        }
        Some(acc)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            registry: self.registry.clone(),
            components: self.components.iter().map(|c| Component { f: c.f.scale(s), modulation: c.modulation.clone() }).collect(),
        }
    }

    /// `h̃(τ) = −h(−τ)`; flowing `h̃` forward from `−s` to `−t` is flowing `h`
    /// backward from `s` to `t`.
    pub fn time_reversed(&self) -> Self {
        Self {
            registry: self.registry.clone(),
            components: self
                .components
                .iter()
                .map(|c| Component { f: c.f.scale(-1.0), modulation: c.modulation.as_ref().map(Modulation::reversed) })
                .collect(),
        }
    }

    /// Per-component `(sup |a_c|, g_c)` over `[lo, hi]`.
    pub(crate) fn component_bounds(&self, lo: f64, hi: f64) -> Vec<(f64, &CylindricalFunction)> {
        self.components
            .iter()
            .map(|c| (c.modulation.as_ref().map_or(1.0, |m| m.sup_abs(lo, hi)), &c.f))
            .collect()
    }

    pub fn check_modulation(&self, lo: f64, hi: f64) -> Result<()> {
        for c in &self.components {
            if let Some(m) = &c.modulation {
                m.check_bounded(lo.min(hi), lo.max(hi))?;
            }
        }
        Ok(())
    }
}

/// A Hamiltonian frozen at time `t`.
#[derive(Clone, Copy, Debug)]
pub struct HamiltonianAt<'a> {
    h: &'a Hamiltonian,
    t: f64,
}

impl StateFunction for HamiltonianAt<'_> {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn evaluate(&self, rho: &State) -> Result<f64> {
        self.h.evaluate(self.t, rho)
    }

    fn d_operator(&self, rho: &State) -> Result<AlgebraElement> {
        self.h.d_operator(self.t, rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{d_operator, Polynomial};

    fn half_z2() -> PolynomialFunction {
        let r = ObservableRegistry::from_pauli(&["Z"]).unwrap();
        PolynomialFunction::new(r, Polynomial::from_terms(1, [(vec![2], 0.5)])).unwrap()
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let m = Modulation::table(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, -1.0]).unwrap();
        assert_eq!(m.at(-1.0), 1.0);
        assert_eq!(m.at(0.5), 2.0);
        assert_eq!(m.at(2.0), 1.0);
        assert_eq!(m.at(5.0), -1.0);
        assert_eq!(m.sup_abs(0.0, 2.0), 3.0);
        assert!(Modulation::table(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn generator_matches_d_operator() {
        let f = half_z2();
        let h = Hamiltonian::modulated(f.clone(), Modulation::function(|t| 1.0 + t));
        let rho = State::bloch(0.8, 0.0, 0.6).unwrap();
        let expect = d_operator(&f, &rho).unwrap().scale(1.5);
        assert!((&h.d_operator(0.5, &rho).unwrap() - &expect).max_abs() < 1e-15);
        assert!(!h.is_autonomous());
        assert!(!h.is_trivial());
    }

    #[test]
    fn time_reversal() {
        let h = Hamiltonian::modulated(half_z2(), Modulation::function(|t| 1.0 + t));
        let r = h.time_reversed();
        let x = [0.3];
        assert!((r.value(0.7, &x) + h.value(-0.7, &x)).abs() < 1e-15);
        let ht = Hamiltonian::modulated(half_z2(), Modulation::table(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap());
        let rt = ht.time_reversed();
        assert!((rt.value(-0.25, &x) + ht.value(0.25, &x)).abs() < 1e-15);
    }

    #[test]
    fn components_merge_registries() {
        let z = PolynomialFunction::observable("Z", crate::algebra::pauli_letter('Z').unwrap()).unwrap();
        let x = PolynomialFunction::observable("X", crate::algebra::pauli_letter('X').unwrap()).unwrap();
        let h = Hamiltonian::from_components(vec![(z.into(), None), (x.scale(0.3).into(), None)]).unwrap();
        assert_eq!(h.registry().len(), 2);
        let rho = State::bloch(0.5, 0.0, 0.5).unwrap();
        assert!((h.evaluate(0.0, &rho).unwrap() - 0.65).abs() < 1e-15);
        let p = h.polynomial_at(0.0).unwrap();
        assert!((p.evaluate(&rho).unwrap() - 0.65).abs() < 1e-15);
    }

    #[test]
    fn trivial_detection() {
        let r = ObservableRegistry::from_pauli(&["Z"]).unwrap();
        assert!(Hamiltonian::zero(r.clone()).is_trivial());
        assert!(Hamiltonian::autonomous(CylindricalFunction::constant(r, 2.0)).is_trivial());
        assert!(!Hamiltonian::autonomous(half_z2()).is_trivial());
    }
}
