use crate::spectral::ops::{self, dealiased_from_pointwise};
use crate::spectral::{ScalarField, SymTensorField, VelocityGradient};

use super::{ModelParams, SimState, Variant};

/// Time derivative of `(ω, τ)` split into the diagonal stiff part
/// (`νΔω`, `μΔτ − βτ`) and the explicit remainder.
#[derive(Clone, Debug)]
pub struct StateDerivative {
    pub stiff_omega: ScalarField,
    pub stiff_tau: SymTensorField,
    pub explicit_omega: ScalarField,
    pub explicit_tau: SymTensorField,
}

impl StateDerivative {
    pub fn omega(&self) -> ScalarField {
        &self.stiff_omega + &self.explicit_omega
    }

    pub fn tau(&self) -> SymTensorField {
        self.stiff_tau.add(&self.explicit_tau)
    }
}

/// `Q(∇u, τ) = Ωτ − τΩ + b(Du τ + τ Du)`, evaluated pointwise and dealiased.
pub fn q_form(grad: &VelocityGradient, tau: &SymTensorField, slip: f64) -> SymTensorField {
    let g = tau.grid();
    let (d11, d21, d12, d22) = (
        grad.d1u1.physical(),
        grad.d2u1.physical(),
        grad.d1u2.physical(),
        grad.d2u2.physical(),
    );
    let (a, c, d) = (tau.xx.physical(), tau.xy.physical(), tau.yy.physical());
    let skew = |i: usize| 0.5 * (d12[i] - d21[i]);
    let shear = |i: usize| 0.5 * (d12[i] + d21[i]);
    let xx = dealiased_from_pointwise(g, |i| {
        2.0 * skew(i) * c[i] + 2.0 * slip * (d11[i] * a[i] + shear(i) * c[i])
    });
    let xy = dealiased_from_pointwise(g, |i| {
        let r = shear(i);
        skew(i) * (d[i] - a[i]) + slip * (d11[i] * c[i] + r * d[i] + r * a[i] + d22[i] * c[i])
    });
    let yy = dealiased_from_pointwise(g, |i| {
        -2.0 * skew(i) * c[i] + 2.0 * slip * (shear(i) * c[i] + d22[i] * d[i])
    });
    SymTensorField::new(xx, xy, yy)
}

/// Right-hand side of the system at `state`.
///
/// Every quadratic product is dealiased. For the Stokes toy the vorticity
/// equation is dropped and `dω = 0`.
pub fn rhs(state: &SimState, params: &ModelParams) -> StateDerivative {
    let u = state.velocity();
    let tau = state.tau();
    let omega = state.omega();

    let stiff_tau = tau.map(|c| {
        let g = c.grid().clone();
        let (mu, beta) = (params.mu, params.beta);
        c.map_modes(move |i, v| v * (-(beta + mu * g.k_squared(i))))
    });
    let mut explicit_tau = ops::advect_tensor(u, tau)
        .scale(-1.0)
        .axpy(params.alpha, &ops::sym_part(state.grad()));
    if params.q_active() {
        explicit_tau = explicit_tau.add(&q_form(state.grad(), tau, params.slip));
    }

    let (stiff_omega, explicit_omega) = if params.variant == Variant::StokesToy {
        let z = ScalarField::zeros(state.grid());
        (z.clone(), z)
    } else {
        let stiff = ops::laplacian(omega).scale(params.nu);
        let explicit = ops::advect(u, omega)
            .scale(-1.0)
            .axpy(params.coupling, &ops::curl_div(tau))
            .without_mean();
        (stiff, explicit)
    };

    StateDerivative {
        stiff_omega,
        stiff_tau,
        explicit_omega,
        explicit_tau,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::spectral::{Grid, VectorField};

    fn grid(n: usize) -> Grid {
        Grid::periodic_square(n).unwrap()
    }

    fn close(a: &ScalarField, b: &ScalarField, tol: f64) -> bool {
        (a - b).l2_norm() <= tol * (1.0 + b.l2_norm())
    }

    fn params() -> ModelParams {
        ModelParams {
            nu: 0.3,
            mu: 0.7,
            coupling: 1.3,
            alpha: 0.9,
            beta: 0.4,
            slip: 0.5,
            q_enabled: true,
            variant: Variant::Full,
        }
    }

    #[test]
    fn q_of_zero_stress_vanishes() {
        let g = grid(16);
        let u = random::divergence_free(&g, 1, 4, 1.0, &mut random::rng(1)).unwrap();
        let q = q_form(&ops::velocity_gradient(&u), &SymTensorField::zeros(&g), 0.7);
        assert!(q.l2_norm() < 1e-15);
    }

    #[test]
    fn corotational_q_example() {
        let g = grid(16);
        let u = VectorField::new(ScalarField::zeros(&g), ScalarField::from_fn(&g, |x, _| -x.cos()));
        let tau = SymTensorField::new(
            ScalarField::constant(&g, 1.0),
            ScalarField::zeros(&g),
            ScalarField::zeros(&g),
        );
        let q = q_form(&ops::velocity_gradient(&u), &tau, 0.0);
        assert!(q.xx.l2_norm() < 1e-14 && q.yy.l2_norm() < 1e-14);
        assert!(close(&q.xy, &ScalarField::from_fn(&g, |x, _| -0.5 * x.sin()), 1e-14));
    }

    #[test]
    fn slip_term_with_identity_stress() {
        // Symmetric gradient (Ω = 0): u = ∇φ-like straining field, τ = I.
        let g = grid(16);
        let u = VectorField::new(
            ScalarField::from_fn(&g, |x, y| x.sin() * y.cos()),
            ScalarField::from_fn(&g, |x, y| x.cos() * y.sin()),
        );
        let grad = ops::velocity_gradient(&u);
        assert!((&grad.d1u2 - &grad.d2u1).l2_norm() < 1e-14);
        let q = q_form(&grad, &SymTensorField::scaled_identity(&g, 1.0), 1.0);
        let du2 = ops::sym_grad(&u).scale(2.0);
        assert!(close(&q.xx, &du2.xx, 1e-14));
        assert!(close(&q.xy, &du2.xy, 1e-14));
        assert!(close(&q.yy, &du2.yy, 1e-14));
    }

    #[test]
    fn diagonal_stress_relaxes_without_vorticity_source() {
        let g = grid(16);
        let c = ScalarField::from_fn(&g, |x, _| x.cos());
        let tau = SymTensorField::new(c.clone(), ScalarField::zeros(&g), c.clone());
        let s = SimState::new(0.0, ScalarField::zeros(&g), tau).unwrap();
        let p = params();
        let d = rhs(&s, &p);
        let expect = c.scale(-(p.beta + p.mu));
        let dt = d.tau();
        assert!(close(&dt.xx, &expect, 1e-14) && close(&dt.yy, &expect, 1e-14));
        assert!(dt.xy.l2_norm() < 1e-14);
        assert!(d.omega().l2_norm() < 1e-14);
    }

    #[test]
    fn zero_state_has_zero_derivative() {
        let g = grid(16);
        let d = rhs(&SimState::zero(&g), &params());
        assert_eq!(d.omega().max_coeff(), 0.0);
        assert_eq!(d.tau().l2_norm(), 0.0);
    }

    #[test]
    fn single_mode_vorticity_forces_stress() {
        let g = grid(16);
        let w = ScalarField::from_fn(&g, |x, y| (x + 2.0 * y).sin());
        let s = SimState::new(0.0, w.clone(), SymTensorField::zeros(&g)).unwrap();
        let p = params();
        let d = rhs(&s, &p);
        let du = ops::sym_grad(s.velocity()).scale(p.alpha);
        let dt = d.tau();
        assert!(close(&dt.xx, &du.xx, 1e-13) && close(&dt.xy, &du.xy, 1e-13) && close(&dt.yy, &du.yy, 1e-13));
        assert!(close(&d.omega(), &ops::laplacian(&w).scale(p.nu), 1e-13));
    }

    #[test]
    fn stokes_toy_drops_vorticity_equation() {
        let g = grid(16);
        let tau = random::tensor(&g, 1, 4, 1.0, &mut random::rng(3)).unwrap();
        let s = SimState::stokes_toy(0.0, tau);
        let p = ModelParams { variant: Variant::StokesToy, mu: 0.0, ..params() };
        let d = rhs(&s, &p);
        assert_eq!(d.omega().max_coeff(), 0.0);
        assert!(d.tau().l2_norm() > 0.0);
    }

    #[test]
    fn split_adds_up() {
        let g = grid(32);
        let mut rng = random::rng(9);
        let w = random::band_limited_rms(&g, 1, 8, 1.0, &mut rng).unwrap();
        let tau = random::tensor(&g, 1, 8, 1.0, &mut rng).unwrap();
        let s = SimState::new(0.0, w, tau).unwrap();
        let d = rhs(&s, &params());
        let total = d.omega();
        assert!((&(&total - &d.stiff_omega) - &d.explicit_omega).l2_norm() < 1e-12 * total.l2_norm());
        assert!(d.omega().mean().abs() < 1e-15);
    }
}
