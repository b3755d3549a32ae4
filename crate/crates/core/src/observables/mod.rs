//! Functions on the state space: cylindrical functions
//! `f(ρ) = g(ρ(B_1), …, ρ(B_n))`, polynomial ones, their derivatives and the
//! Poisson bracket `{f, g}(ρ) = ρ(i[Df(ρ), Dg(ρ)])`.

mod bracket;
mod cylindrical;
mod polynomial;
mod registry;

pub use bracket::{
    complex_bracket, d_operator, evaluate, gateaux, poisson_bracket, poisson_eval, AffineObservableForm,
    ComplexFunction, StateFunction,
};
pub use cylindrical::{CylindricalFunction, PolynomialFunction, ScalarMap, ValueFn, VectorFn};
pub use polynomial::Polynomial;
pub use registry::ObservableRegistry;
