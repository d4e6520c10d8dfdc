use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensionless parameter triple `a = (eps, mu, kappa)` with
/// `eps in (0,1]`, `mu in [0,1]`, `kappa in [0,1]`.
///
/// `eps` is the Mach number; `mu` and `kappa` weight viscosity and heat
/// conduction (inverse Reynolds / Peclet numbers). The derived scale
/// `nu = sqrt(mu + kappa)` is recomputed on demand and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamTriple {
    pub eps: f64,
    pub mu: f64,
    pub kappa: f64,
}

impl ParamTriple {
    pub fn new(eps: f64, mu: f64, kappa: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0,1], got {eps}"
            )));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "mu must lie in [0,1], got {mu}"
            )));
        }
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in [0,1], got {kappa}"
            )));
        }
        Ok(Self { eps, mu, kappa })
    }

    /// `nu := sqrt(mu + kappa)`.
    pub fn nu(&self) -> f64 {
        (self.mu + self.kappa).sqrt()
    }

    /// The weight `eps * nu` used by the composite norms and the
    /// frequency-split cut `|xi| ~ 1/(eps nu)`.
    pub fn eps_nu(&self) -> f64 {
        self.eps * self.nu()
    }

    pub fn label(&self) -> String {
        format!("eps={},mu={},kappa={}", self.eps, self.mu, self.kappa)
    }
}
