use crate::spectral::{ops, Grid, ScalarField, SymTensorField, VectorField, VelocityGradient};

use super::{stokes_toy_velocity, ModelError, Variant};

/// Prognostic pair `(ω, τ)` at time `t` with the velocity and its gradient
/// cached alongside.
///
/// For the Stokes toy variant the velocity is slaved to `τ` and `ω` is its
/// curl; otherwise `u = BS(ω)`.
#[derive(Clone, Debug)]
pub struct SimState {
    pub t: f64,
    omega: ScalarField,
    tau: SymTensorField,
    velocity: VectorField,
    grad: VelocityGradient,
}

impl SimState {
    /// Builds a state whose velocity comes from Biot–Savart.
    ///
    /// `ω` is stored as given; Biot–Savart has already rejected any mean
    /// above roundoff level.
    pub fn new(t: f64, omega: ScalarField, tau: SymTensorField) -> Result<Self, ModelError> {
        assert_eq!(omega.grid(), tau.grid(), "omega and tau live on different grids");
        let velocity = ops::biot_savart(&omega)?;
        let grad = ops::velocity_gradient(&velocity);
        Ok(SimState { t, omega, tau, velocity, grad })
    }

    /// Builds a Stokes-toy state: `u` from `τ`, `ω = curl u`.
    pub fn stokes_toy(t: f64, tau: SymTensorField) -> Self {
        let velocity = stokes_toy_velocity(&tau);
        let omega = ops::curl(&velocity);
        let grad = ops::velocity_gradient(&velocity);
        SimState { t, omega, tau, velocity, grad }
    }

    /// Dispatches on the variant; `omega` is ignored for the Stokes toy.
    pub fn for_variant(
        t: f64,
        omega: ScalarField,
        tau: SymTensorField,
        variant: Variant,
    ) -> Result<Self, ModelError> {
        match variant {
            Variant::StokesToy => Ok(Self::stokes_toy(t, tau)),
            _ => Self::new(t, omega, tau),
        }
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::new(0.0, ScalarField::zeros(grid), SymTensorField::zeros(grid)).expect("zero vorticity")
    }

    pub fn grid(&self) -> &Grid {
        self.omega.grid()
    }

    pub fn omega(&self) -> &ScalarField {
        &self.omega
    }

    pub fn tau(&self) -> &SymTensorField {
        &self.tau
    }

    pub fn velocity(&self) -> &VectorField {
        &self.velocity
    }

    pub fn grad(&self) -> &VelocityGradient {
        &self.grad
    }

    pub fn into_parts(self) -> (f64, ScalarField, SymTensorField) {
        (self.t, self.omega, self.tau)
    }

    pub fn is_finite(&self) -> bool {
        self.omega.is_finite() && self.tau.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_matches_vorticity() {
        let g = Grid::periodic_square(16).unwrap();
        let w = ScalarField::from_fn(&g, |x, y| (x + y).sin() + (2.0 * x).cos());
        let s = SimState::new(0.0, w.clone(), SymTensorField::zeros(&g)).unwrap();
        assert!(ops::max_mode_divergence(s.velocity()) < 1e-14);
        let back = ops::curl(s.velocity());
        assert!((&back - &w).l2_norm() < 1e-12 * w.l2_norm());
    }

    #[test]
    fn mean_vorticity_rejected() {
        let g = Grid::periodic_square(8).unwrap();
        let r = SimState::new(0.0, ScalarField::constant(&g, 1.0), SymTensorField::zeros(&g));
        assert!(matches!(r, Err(ModelError::Spectral(_))));
    }
}
