use super::{ObservableRegistry, Polynomial, PolynomialFunction};
use crate::algebra::{commutator, pair, AlgebraElement, State};
use crate::error::{Error, Result};
use crate::C64;

/// A real function on the state space with a convex Gateaux derivative,
/// represented by the operator `Df(ρ)`.
pub trait StateFunction {
    fn dim(&self) -> usize;

    fn evaluate(&self, rho: &State) -> Result<f64>;

    /// The unique `Df(ρ)` with `ρ(Df(ρ)) = 0` and `υ(Df(ρ)) = df(ρ)(υ)`.
    fn d_operator(&self, rho: &State) -> Result<AlgebraElement>;

    /// `df(ρ)(υ)`, the derivative along the segment from `ρ` towards `υ`.
    fn gateaux(&self, rho: &State, ups: &State) -> Result<f64> {
        Ok(pair(ups, &self.d_operator(rho)?)?.re)
    }
}

pub fn evaluate<F: StateFunction + ?Sized>(f: &F, rho: &State) -> Result<f64> {
    f.evaluate(rho)
}

pub fn gateaux<F: StateFunction + ?Sized>(f: &F, rho: &State, ups: &State) -> Result<f64> {
    f.gateaux(rho, ups)
}

pub fn d_operator<F: StateFunction + ?Sized>(f: &F, rho: &State) -> Result<AlgebraElement> {
    f.d_operator(rho)
}

fn check_pair(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// `{f, g}(ρ) = ρ(i[Df(ρ), Dg(ρ)])`.
pub fn poisson_eval<F, G>(f: &F, g: &G, rho: &State) -> Result<f64>
where
    F: StateFunction + ?Sized,
    G: StateFunction + ?Sized,
{
    check_pair(f.dim(), g.dim())?;
    let df = f.d_operator(rho)?;
    let dg = g.d_operator(rho)?;
    Ok(pair(rho, &commutator(&df, &dg)?)?.re)
}

/// Symbolic bracket of two polynomial functions.
///
/// The result lives on the union of both registries, extended by the
/// commutators `i[B_j, B_k]` (up to scalar multiples of existing entries):
/// `{f, g} = Σ_{j<k} (∂_j f ∂_k g − ∂_k f ∂_j g) · ρ(i[B_j, B_k])`.
pub fn poisson_bracket(f: &PolynomialFunction, g: &PolynomialFunction) -> Result<PolynomialFunction> {
    check_pair(f.registry().dim(), g.registry().dim())?;
    let (base, gmap) = f.registry().merge(g.registry())?;
    let n = base.len();
    let fp = f.polynomial().extend(n);
    let gp = g.polynomial().substitute(n, &gmap);
    let df: Vec<Polynomial> = (0..n).map(|j| fp.partial(j)).collect();
    let dg: Vec<Polynomial> = (0..n).map(|j| gp.partial(j)).collect();

    let mut registry: ObservableRegistry = base.clone();
    let mut pieces: Vec<(Polynomial, usize, f64)> = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            let coef = df[j].mul(&dg[k]).add(&df[k].mul(&dg[j]).scale(-1.0));
            if coef.is_zero() {
                continue;
            }
            let c = commutator(base.get(j), base.get(k))?;
            if c.max_abs() <= 1e-14 * base.get(j).max_abs().max(1.0) * base.get(k).max_abs().max(1.0) {
                continue;
            }
            let names = base.names();
            let (idx, scale) = registry.intern(c, || format!("i[{},{}]", names[j], names[k]))?;
            pieces.push((coef, idx, scale));
        }
    }
    let total = registry.len();
    let mut out = Polynomial::zero(total);
    for (coef, idx, scale) in pieces {
        let var = Polynomial::variable(total, idx).scale(scale);
        out = out.add(&coef.extend(total).mul(&var));
    }
    PolynomialFunction::new(registry, out)
}

/// Complex-valued function given by its real and imaginary parts.
#[derive(Clone, Debug)]
pub struct ComplexFunction<F> {
    pub re: F,
    pub im: F,
}

/// `{Re f, Re g} − {Im f, Im g} + i({Im f, Re g} + {Re f, Im g})` at `ρ`.
pub fn complex_bracket<F, G>(f: &ComplexFunction<F>, g: &ComplexFunction<G>, rho: &State) -> Result<C64>
where
    F: StateFunction,
    G: StateFunction,
{
    let re = poisson_eval(&f.re, &g.re, rho)? - poisson_eval(&f.im, &g.im, rho)?;
    let im = poisson_eval(&f.im, &g.re, rho)? + poisson_eval(&f.re, &g.im, rho)?;
    Ok(C64::new(re, im))
}

/// First-order data of `f` at a base state: `υ ↦ f(ρ) + υ(Df(ρ))`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineObservableForm {
    pub operator_part: AlgebraElement,
    pub base_value: f64,
    pub base_state: State,
}

impl AffineObservableForm {
    pub fn at<F: StateFunction + ?Sized>(f: &F, rho: &State) -> Result<Self> {
        Ok(Self { operator_part: f.d_operator(rho)?, base_value: f.evaluate(rho)?, base_state: rho.clone() })
    }

    /// `df(ρ)(υ)`.
    pub fn derivative(&self, ups: &State) -> Result<f64> {
        Ok(pair(ups, &self.operator_part)?.re)
    }

    /// Tangent approximation `f(ρ) + df(ρ)(υ)`.
    pub fn linearization(&self, ups: &State) -> Result<f64> {
        Ok(self.base_value + self.derivative(ups)?)
    }
}
