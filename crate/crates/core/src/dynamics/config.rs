use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OdeMethod {
    #[default]
    Rk4,
}

/// Numerical parameters shared by the flow solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Lipschitz constant of `ρ ↦ Dh(t; ρ)`.
    pub lipschitz_d0: f64,
    /// Length of the fixed-point windows; needs `2·D0·window ≤ 0.5`.
    pub window: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub ode_step: f64,
    #[serde(default)]
    pub ode_method: OdeMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { lipschitz_d0: 1.0, window: 0.25, picard_tol: 1e-10, picard_max_iter: 200, ode_step: 0.01, ode_method: OdeMethod::Rk4 }
    }
}

impl SolverConfig {
    /// Config whose window is the largest one allowed by `d0`, capped at `max_window`.
    pub fn for_lipschitz(d0: f64, max_window: f64) -> Self {
        let window = if d0 > 0.0 { (0.25 / d0).min(max_window) } else { max_window };
        Self { lipschitz_d0: d0, window, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
            }
        };
        if !(self.lipschitz_d0 >= 0.0 && self.lipschitz_d0.is_finite()) {
            return Err(Error::InvalidInput(format!("lipschitz_d0 must be nonnegative, got {}", self.lipschitz_d0)));
        }
        positive(self.window, "window")?;
        positive(self.picard_tol, "picard_tol")?;
        positive(self.ode_step, "ode_step")?;
        if self.picard_max_iter == 0 {
            return Err(Error::InvalidInput("picard_max_iter must be at least 1".into()));
        }
        let product = 2.0 * self.lipschitz_d0 * self.window;
        if product > 0.5 {
            return Err(Error::ContractionViolated { product });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_bound_enforced() {
        let mut c = SolverConfig { lipschitz_d0: 2.0, window: 0.125, ..Default::default() };
        assert!(c.validate().is_ok());
        c.window = 0.2;
        assert!(matches!(c.validate(), Err(Error::ContractionViolated { .. })));
        c.lipschitz_d0 = 0.0;
        assert!(c.validate().is_ok());
        c.ode_step = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn window_from_lipschitz() {
        let c = SolverConfig::for_lipschitz(2.0, 1.0);
        assert_eq!(c.window, 0.125);
        assert!(c.validate().is_ok());
        assert_eq!(SolverConfig::for_lipschitz(0.0, 0.5).window, 0.5);
    }
}
