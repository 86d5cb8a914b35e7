//! The Oldroyd-type system in vorticity form.
//!
//! ```text
//! ω_t + u·∇ω = K curl div τ + νΔω,                     u = BS(ω)
//! τ_t + u·∇τ + βτ = μΔτ + α Du + [Q on] Q(∇u, τ)
//! ```
//!
//! and the transformed vorticity `Γ = μω − K Rτ` with `R = Δ⁻¹ curl div`.

mod gamma;
mod params;
mod rhs;
mod state;

use thiserror::Error;

use crate::spectral::SpectralError;

pub use gamma::{
    commutator_r_advect, gamma_of, gamma_rhs_damped, gamma_rhs_theoretical, gamma_source,
    stokes_toy_velocity,
};
pub use params::{ModelParams, Variant};
pub use rhs::{q_form, rhs, StateDerivative};
pub use state::SimState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("the transformed-vorticity equation requires nu = 0, got nu = {0}")]
    ViscousGamma(f64),
    #[error("{0} is not defined for the {1} variant")]
    UnsupportedVariant(&'static str, Variant),
    #[error("the energy identity has a Q source term; run it with Q disabled")]
    QEnabled,
}
