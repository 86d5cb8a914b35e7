use crate::spectral::ops;
use crate::spectral::{ScalarField, SymTensorField, VectorField};

use super::{q_form, ModelError, ModelParams, SimState, Variant};

/// `Γ = μω − K Rτ`.
pub fn gamma_of(state: &SimState, params: &ModelParams) -> ScalarField {
    state
        .omega()
        .scale(params.mu)
        .axpy(-params.coupling, &ops::riesz_r(state.tau()))
}

/// `[R, u·∇]τ = R(u·∇τ) − u·∇(Rτ)`, both products dealiased.
pub fn commutator_r_advect(u: &VectorField, tau: &SymTensorField) -> ScalarField {
    let first = ops::riesz_r(&ops::advect_tensor(u, tau));
    let second = ops::advect(u, &ops::riesz_r(tau));
    &first - &second
}

fn check_gamma_preconditions(params: &ModelParams) -> Result<(), ModelError> {
    if params.variant == Variant::StokesToy {
        return Err(ModelError::UnsupportedVariant("the Gamma equation", params.variant));
    }
    if params.nu != 0.0 {
        return Err(ModelError::ViscousGamma(params.nu));
    }
    Ok(())
}

/// Non-transport part of the `Γ` equation:
/// `Kβ Rτ − (Kα/2) ω + K[R, u·∇]τ − [Q on] K R(Q(∇u, τ))`.
///
/// The `½` on the `α` term is `R(Du) = ω/2` for `Du = ½(∇u + ∇uᵀ)`.
pub fn gamma_source(state: &SimState, params: &ModelParams) -> Result<ScalarField, ModelError> {
    check_gamma_preconditions(params)?;
    let k = params.coupling;
    let r_tau = ops::riesz_r(state.tau());
    let mut out = r_tau
        .scale(k * params.beta)
        .axpy(-0.5 * k * params.alpha, state.omega())
        .axpy(k, &commutator_r_advect(state.velocity(), state.tau()));
    if params.q_active() {
        let q = q_form(state.grad(), state.tau(), params.slip);
        out = out.axpy(-k, &ops::riesz_r(&q));
    }
    Ok(out)
}

/// `∂tΓ` predicted by the transport equation `∂tΓ + u·∇Γ = source`. Requires
/// `ν = 0`.
pub fn gamma_rhs_theoretical(state: &SimState, params: &ModelParams) -> Result<ScalarField, ModelError> {
    let source = gamma_source(state, params)?;
    let gamma = gamma_of(state, params);
    Ok(&source - &ops::advect(state.velocity(), &gamma))
}

/// The same right-hand side written with explicit damping:
/// `−u·∇Γ − λΓ + (Kβ − λK) Rτ + K[R, u·∇]τ − K R(Q)`, `λ = Kα/(2μ)`.
pub fn gamma_rhs_damped(state: &SimState, params: &ModelParams) -> Result<ScalarField, ModelError> {
    check_gamma_preconditions(params)?;
    let k = params.coupling;
    let lambda = params.damping_rate();
    let gamma = gamma_of(state, params);
    let mut out = ops::advect(state.velocity(), &gamma)
        .scale(-1.0)
        .axpy(-lambda, &gamma)
        .axpy(k * params.beta - lambda * k, &ops::riesz_r(state.tau()))
        .axpy(k, &commutator_r_advect(state.velocity(), state.tau()));
    if params.q_active() {
        let q = q_form(state.grad(), state.tau(), params.slip);
        out = out.axpy(-k, &ops::riesz_r(&q));
    }
    Ok(out)
}

/// Velocity of the Stokes toy `−Δu + ∇p = div τ`, `div u = 0`:
/// `u = −P Δ⁻¹ div τ`.
pub fn stokes_toy_velocity(tau: &SymTensorField) -> VectorField {
    let f = ops::div_tensor(tau);
    let rhs = f.map(|c| ops::invert_laplacian(c).scale(-1.0));
    ops::leray_project(&rhs)
}
