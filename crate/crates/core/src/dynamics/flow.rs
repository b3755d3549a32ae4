use std::borrow::Cow;

use super::{linear_propagator, picard_flow, Hamiltonian, Propagator, SolverConfig};
use crate::algebra::{probe_basis, trace_product, AlgebraElement, State};
use crate::error::{Error, Result};
use crate::observables::{poisson_eval, PolynomialFunction, StateFunction};

/// Forward-time version of the problem: flowing `h` from `s` back to `t < s`
/// is flowing the time-reversed Hamiltonian from `−s` to `−t`.
pub(crate) fn oriented(h: &Hamiltonian, s: f64, t: f64) -> (Cow<'_, Hamiltonian>, f64, f64) {
    if t >= s {
        (Cow::Borrowed(h), s, t)
    } else {
        (Cow::Owned(h.time_reversed()), -s, -t)
    }
}

/// `ϖ^h(s, t)(ρ)`.
pub fn classical_flow(h: &Hamiltonian, rho: &State, s: f64, t: f64, cfg: &SolverConfig) -> Result<State> {
    if s == t {
        cfg.validate()?;
        return Ok(rho.clone());
    }
    let (h, s, t) = oriented(h, s, t);
    Ok(picard_flow(&h, rho, s, &[s, t], cfg)?.last().clone())
}

/// Flow endpoint together with the propagator `V_{t,s}` of its self-consistent trajectory.
pub fn flow_with_propagator(h: &Hamiltonian, rho: &State, s: f64, t: f64, cfg: &SolverConfig) -> Result<(State, Propagator)> {
    if s == t {
        cfg.validate()?;
        return Ok((rho.clone(), Propagator::identity(h.dim(), s)));
    }
    let (hh, s2, t2) = oriented(h, s, t);
    let traj = picard_flow(&hh, rho, s2, &[s2, t2], cfg)?;
    let p = linear_propagator(&hh, &traj, s2, t2, cfg)?;
    Ok((traj.last().clone(), Propagator { unitary: p.unitary, span: (s, t) }))
}

/// `(V^h_{t,s} f)(ρ) = f(ϖ^h(s, t)(ρ))`.
pub fn pushforward<F: StateFunction + ?Sized>(
    h: &Hamiltonian,
    f: &F,
    s: f64,
    t: f64,
    rho: &State,
    cfg: &SolverConfig,
) -> Result<f64> {
    f.evaluate(&classical_flow(h, rho, s, t, cfg)?)
}

/// `max_P |(ϖ(s,t)ρ − ϖ(r,t)ϖ(s,r)ρ)(P)|` over the probe basis.
pub fn cocycle_defect(h: &Hamiltonian, rho: &State, s: f64, r: f64, t: f64, cfg: &SolverConfig) -> Result<f64> {
    let direct = classical_flow(h, rho, s, t, cfg)?;
    let mid = classical_flow(h, rho, s, r, cfg)?;
    let composed = classical_flow(h, &mid, r, t, cfg)?;
    Ok(probe_distance(&direct, &composed))
}

/// `max_P |(ρ₁ − ρ₂)(P)|` over the probe basis, whose elements have norm 1
/// for Pauli strings and at most 1 for Gell-Mann matrices.
pub fn probe_distance(a: &State, b: &State) -> f64 {
    let diff = a.matrix() - b.matrix();
    probe_basis(a.dim())
        .iter()
        .map(|(_, p)| trace_product(&diff, p.matrix()).norm())
        .fold(0.0, f64::max)
}

/// The function `ρ ↦ f(ϖ^h(s, t)(ρ))`, with its derivative obtained from
/// one-sided finite differences along segments towards the states
/// `(1 ± P/‖P‖)/d`, `P` running over the probe basis.
pub struct FlowPushforward<'a, F: ?Sized> {
    pub h: &'a Hamiltonian,
    pub f: &'a F,
    pub s: f64,
    pub t: f64,
    pub cfg: &'a SolverConfig,
    /// Finite-difference step along segments.
    pub lambda: f64,
}

impl<F: StateFunction + ?Sized> FlowPushforward<'_, F> {
    fn directional(&self, rho: &State, ups: &State, base: f64) -> Result<f64> {
        let l = self.lambda;
        let f1 = self.evaluate(&rho.mix(ups, l)?)?;
        let f2 = self.evaluate(&rho.mix(ups, 2.0 * l)?)?;
        Ok((-3.0 * base + 4.0 * f1 - f2) / (2.0 * l))
    }
}

impl<F: StateFunction + ?Sized> StateFunction for FlowPushforward<'_, F> {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn evaluate(&self, rho: &State) -> Result<f64> {
        pushforward(self.h, self.f, self.s, self.t, rho, self.cfg)
    }

    fn d_operator(&self, rho: &State) -> Result<AlgebraElement> {
        let d = rho.dim();
        let df = d as f64;
        let base = self.evaluate(rho)?;
        let id = AlgebraElement::identity(d);
        let mut acc = AlgebraElement::zeros(d);
        for (_, p) in probe_basis(d) {
            let norm = p.operator_norm();
            let plus = State::new((&id + &p.scale(1.0 / norm)).scale(1.0 / df).into_matrix())?;
            let minus = State::new((&id - &p.scale(1.0 / norm)).scale(1.0 / df).into_matrix())?;
            let dp = self.directional(rho, &plus, base)?;
            let dm = self.directional(rho, &minus, base)?;
            let tr_p = 0.5 * df * norm * (dp - dm);
            acc = &acc + &p.scale(tr_p / p.real_inner(&p));
        }
        let shift = rho.expect(&acc);
        Ok(&acc - &id.scale(shift))
    }
}

/// Residuals of the two Liouville equations at `(s, t)`:
/// `r_t = |∂_t V_{t,s}f − V_{t,s}{h(t), f}|` and
/// `r_s = |∂_s V_{t,s}f + {h(s), V_{t,s}f}|`, at `ρ`, with central
/// differences of step `delta` in time.
pub fn liouville_residual(
    h: &Hamiltonian,
    f: &PolynomialFunction,
    rho: &State,
    s: f64,
    t: f64,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    if !(1e-5..=1e-2).contains(&delta) {
        return Err(Error::InvalidInput(format!("finite-difference step {delta} outside [1e-5, 1e-2]")));
    }
    let p = |s: f64, t: f64| pushforward(h, f, s, t, rho, cfg);
    let dt = (p(s, t + delta)? - p(s, t - delta)?) / (2.0 * delta);
    let evolved = classical_flow(h, rho, s, t, cfg)?;
    let r_t = (dt - poisson_eval(&h.at(t), f, &evolved)?).abs();

    let ds = (p(s + delta, t)? - p(s - delta, t)?) / (2.0 * delta);
    let wrapped = FlowPushforward { h, f, s, t, cfg, lambda: 1e-3 };
    let r_s = (ds + poisson_eval(&h.at(s), &wrapped, rho)?).abs();
    Ok((r_t, r_s))
}
