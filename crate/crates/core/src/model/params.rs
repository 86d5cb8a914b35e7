use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Which system is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Euler coupled to the diffusive stress equation, with `Q` as configured.
    Full,
    /// Same system with `Q ≡ 0`.
    QZero,
    /// Velocity slaved to the stress through `−Δu + ∇p = div τ`; no vorticity
    /// equation.
    StokesToy,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::QZero => "q_zero",
            Variant::StokesToy => "stokes_toy",
        })
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(Variant::Full),
            "q_zero" => Ok(Variant::QZero),
            "stokes_toy" => Ok(Variant::StokesToy),
            other => Err(format!("unknown variant '{other}' (expected full, q_zero or stokes_toy)")),
        }
    }
}

/// Physical constants of the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Velocity viscosity `ν ≥ 0`.
    pub nu: f64,
    /// Stress diffusivity `μ`.
    pub mu: f64,
    /// Stress coupling `K ≥ 0` in the momentum equation.
    pub coupling: f64,
    /// Velocity forcing `α` of the stress equation.
    pub alpha: f64,
    /// Stress relaxation `β ≥ 0`.
    pub beta: f64,
    /// Slip parameter `b ∈ [−1, 1]` of `Q`.
    pub slip: f64,
    pub q_enabled: bool,
    pub variant: Variant,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            nu: 0.0,
            mu: 1.0,
            coupling: 1.0,
            alpha: 1.0,
            beta: 0.0,
            slip: 0.0,
            q_enabled: false,
            variant: Variant::QZero,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidParams(m));
        for (name, v) in [
            ("nu", self.nu),
            ("mu", self.mu),
            ("K", self.coupling),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("b", self.slip),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.nu < 0.0 {
            return bad(format!("nu >= 0 required, got {}", self.nu));
        }
        match self.variant {
            Variant::Full | Variant::QZero if self.mu <= 0.0 => {
                return bad(format!("mu > 0 required for the {} variant, got {}", self.variant, self.mu));
            }
            Variant::StokesToy if self.mu < 0.0 => {
                return bad(format!("mu >= 0 required, got {}", self.mu));
            }
            _ => {}
        }
        if self.coupling < 0.0 {
            return bad(format!("K >= 0 required, got {}", self.coupling));
        }
        if self.beta < 0.0 {
            return bad(format!("beta >= 0 required, got {}", self.beta));
        }
        if !(-1.0..=1.0).contains(&self.slip) {
            return bad(format!("b must lie in [-1, 1], got {}", self.slip));
        }
        if self.variant == Variant::QZero && self.q_enabled {
            return bad("the q_zero variant requires q_enabled = false".into());
        }
        Ok(())
    }

    /// Whether `Q(∇u, τ)` enters the stress equation.
    pub fn q_active(&self) -> bool {
        self.q_enabled && self.variant != Variant::QZero
    }

    /// Damping rate `λ = Kα/(2μ)` of the transformed vorticity.
    pub fn damping_rate(&self) -> f64 {
        self.coupling * self.alpha / (2.0 * self.mu)
    }

    /// Value of a parameter by its configuration name.
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "nu" => self.nu,
            "mu" => self.mu,
            "K" | "coupling" => self.coupling,
            "alpha" => self.alpha,
            "beta" => self.beta,
            "b" | "slip" => self.slip,
            _ => return None,
        })
    }

    /// Sets a numeric parameter by its configuration name.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "nu" => &mut self.nu,
            "mu" => &mut self.mu,
            "K" | "coupling" => &mut self.coupling,
            "alpha" => &mut self.alpha,
            "beta" => &mut self.beta,
            "b" | "slip" => &mut self.slip,
            _ => return false,
        };
        *slot = value;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ModelParams::default().validate().unwrap();
    }

    #[test]
    fn constraint_violations() {
        let p = ModelParams { mu: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ModelParams { mu: 0.0, variant: Variant::StokesToy, ..Default::default() };
        assert!(p.validate().is_ok());
        let p = ModelParams { q_enabled: true, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ModelParams { slip: 1.5, variant: Variant::Full, ..Default::default() };
        assert!(p.validate().is_err());
        // Negative alpha is allowed for the Q = 0 system.
        let p = ModelParams { alpha: -2.0, ..Default::default() };
        assert!(p.validate().is_ok());
    }

    #[test]
    fn damping_rate_carries_half() {
        let p = ModelParams { coupling: 2.0, alpha: 3.0, mu: 0.5, ..Default::default() };
        assert_eq!(p.damping_rate(), 6.0);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [Variant::Full, Variant::QZero, Variant::StokesToy] {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("stokes".parse::<Variant>().is_err());
    }
}
