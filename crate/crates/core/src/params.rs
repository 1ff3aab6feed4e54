use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical rates and frequencies of the two-emitter cavity model.
///
/// The emitters sit at `omega0 - delta`; `gamma_a` is the cavity decay
/// rate and `gamma_sigma` the emitter decay rate (per emitter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub omega0: f64,
    pub delta: f64,
    pub g: f64,
    pub gamma_a: f64,
    pub gamma_sigma: f64,
}

impl SystemParams {
    pub fn new(omega0: f64, delta: f64, g: f64, gamma_a: f64, gamma_sigma: f64) -> Result<Self> {
        let p = Self {
            omega0,
            delta,
            g,
            gamma_a,
            gamma_sigma,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant parameters with the given decay rates.
    pub fn resonant(omega0: f64, g: f64, gamma_a: f64, gamma_sigma: f64) -> Result<Self> {
        Self::new(omega0, 0.0, g, gamma_a, gamma_sigma)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega0, self.delta, self.g, self.gamma_a, self.gamma_sigma];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite value".into()));
        }
        if self.g <= 0.0 {
            return Err(Error::InvalidParams(format!("g must be > 0, got {}", self.g)));
        }
        if self.gamma_a < 0.0 || self.gamma_sigma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "decay rates must be >= 0, got gamma_a = {}, gamma_sigma = {}",
                self.gamma_a, self.gamma_sigma
            )));
        }
        Ok(())
    }

    /// (γ_a + γ_σ)/4
    pub fn gamma_plus(&self) -> f64 {
        (self.gamma_a + self.gamma_sigma) / 4.0
    }

    /// (γ_a − γ_σ)/4
    pub fn gamma_minus(&self) -> f64 {
        (self.gamma_a - self.gamma_sigma) / 4.0
    }

    pub fn emitter_frequency(&self) -> f64 {
        self.omega0 - self.delta
    }

    /// Same system seen from the frame rotating at `omega0`.
    pub fn rotating_frame(&self) -> Self {
        Self { omega0: 0.0, ..*self }
    }

    pub fn with_omega0(self, omega0: f64) -> Self {
        Self { omega0, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn with_rates(self, gamma_a: f64, gamma_sigma: f64) -> Self {
        Self {
            gamma_a,
            gamma_sigma,
            ..self
        }
    }

    /// Smallest nonzero decay rate, if any.
    pub fn min_nonzero_rate(&self) -> Option<f64> {
        [self.gamma_a, self.gamma_sigma]
            .into_iter()
            .filter(|r| *r > 0.0)
            .reduce(f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_rates() {
        let p = SystemParams::new(5.0, 0.0, 1.0, 0.3, 0.1).unwrap();
        assert!((p.gamma_plus() - 0.1).abs() < 1e-15);
        assert!((p.gamma_minus() - 0.05).abs() < 1e-15);
        assert!(p.gamma_plus() >= p.gamma_minus().abs());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SystemParams::new(5.0, 0.0, 0.0, 0.1, 0.1).is_err());
        assert!(SystemParams::new(5.0, 0.0, 1.0, -0.1, 0.1).is_err());
        assert!(SystemParams::new(5.0, 0.0, 1.0, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn min_rate() {
        let p = SystemParams::new(5.0, 0.0, 1.0, 0.0, 0.2).unwrap();
        assert_eq!(p.min_nonzero_rate(), Some(0.2));
        assert_eq!(p.with_rates(0.0, 0.0).min_nonzero_rate(), None);
    }
}
