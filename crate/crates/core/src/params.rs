use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitude parameter `eps` and long-wave parameter `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    eps: f64,
    mu: f64,
}

impl ModelParams {
    pub const MU_MAX: f64 = 0.25;

    /// Validated constructor for the long-wave regime: `0 < mu <= 0.25` and
    /// `0 < eps <= 2 mu`.
    pub fn new(eps: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= Self::MU_MAX) {
            return Err(Error::InvalidParams(format!(
                "mu = {mu} outside (0, {}]",
                Self::MU_MAX
            )));
        }
        if !(eps > 0.0 && eps <= 2.0 * mu) {
            return Err(Error::InvalidParams(format!(
                "eps = {eps} outside (0, 2*mu = {}]",
                2.0 * mu
            )));
        }
        Ok(Self { eps, mu })
    }

    /// Skips the regime check. Used for formal limits such as the
    /// linearized system (`eps = 0`) or the `eps = mu = 0` leading order.
    pub fn unchecked(eps: f64, mu: f64) -> Self {
        Self { eps, mu }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_bounds() {
        assert!(ModelParams::new(0.04, 0.04).is_ok());
        assert!(ModelParams::new(0.08, 0.04).is_ok());
        assert!(ModelParams::new(0.081, 0.04).is_err());
        assert!(ModelParams::new(0.0, 0.04).is_err());
        assert!(ModelParams::new(0.1, 0.3).is_err());
        assert!(ModelParams::new(0.01, -0.01).is_err());
        assert!(ModelParams::new(f64::NAN, 0.04).is_err());
    }
}
