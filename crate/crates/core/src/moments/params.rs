use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inverse temperatures above this are rejected unless explicitly allowed.
pub const DEFAULT_BETA_GUARD: f64 = 0.25;

/// Inverse temperature and external field.
///
/// The Gibbs weight used throughout is
/// `exp(beta / sqrt(N) * sum_{i<j} g_ij s_i s_j + h * sum_i s_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
}

/// Acceptance policy for parameters outside the regime where the limit theory
/// is known to hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPolicy {
    pub beta_guard: f64,
    pub allow_high_beta: bool,
}

impl Default for ParamPolicy {
    fn default() -> Self {
        ParamPolicy {
            beta_guard: DEFAULT_BETA_GUARD,
            allow_high_beta: false,
        }
    }
}

impl ModelParams {
    /// Checks signs and finiteness only; see [`ModelParams::validate`] for the
    /// temperature guard.
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")));
        }
        if !h.is_finite() || h < 0.0 {
            return Err(Error::invalid(format!("h must be finite and >= 0, got {h}")));
        }
        Ok(ModelParams { beta, h })
    }

    /// Applies the temperature guard and returns any warnings.
    pub fn validate(&self, policy: &ParamPolicy) -> Result<Vec<String>> {
        if self.beta > policy.beta_guard && !policy.allow_high_beta {
            return Err(Error::invalid(format!(
                "beta = {} exceeds the high-temperature guard {} (pass --allow-high-beta to override)",
                self.beta, policy.beta_guard
            )));
        }
        let mut warnings = Vec::new();
        if self.h == 0.0 {
            warnings.push("h = 0: uniqueness of q2 is only guaranteed for h > 0".to_string());
        }
        Ok(warnings)
    }

    pub fn beta2(&self) -> f64 {
        self.beta * self.beta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_rejects_high_beta_unless_allowed() {
        let p = ModelParams::new(0.3, 0.3).unwrap();
        let err = p.validate(&ParamPolicy::default()).unwrap_err();
        assert!(err.to_string().contains("0.25"));
        let allow = ParamPolicy {
            allow_high_beta: true,
            ..Default::default()
        };
        assert!(p.validate(&allow).unwrap().is_empty());
    }

    #[test]
    fn zero_field_warns() {
        let p = ModelParams::new(0.1, 0.0).unwrap();
        assert_eq!(p.validate(&ParamPolicy::default()).unwrap().len(), 1);
    }

    #[test]
    fn rejects_negative_inputs() {
        assert!(ModelParams::new(-0.1, 0.3).is_err());
        assert!(ModelParams::new(0.1, -0.3).is_err());
        assert!(ModelParams::new(f64::NAN, 0.3).is_err());
    }
}
