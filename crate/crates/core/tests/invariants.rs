use oldroyd_core::diagnostics::{cross_term_residual, energy_identity_residual, gamma_residual};
use oldroyd_core::experiment::snapshot::{decode, encode};
use oldroyd_core::model::{ModelParams, SimState, Variant};
use oldroyd_core::random;
use oldroyd_core::spectral::{ops, Grid, ScalarField};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::periodic_square(32).unwrap()
}

fn state(seed: u64, k: u32) -> SimState {
    let g = grid();
    let mut rng = random::rng(seed);
    let w = random::band_limited_rms(&g, 1, k, 1.0, &mut rng).unwrap();
    let tau = random::tensor(&g, 0, k, 1.0, &mut rng).unwrap();
    SimState::new(0.0, w, tau).unwrap()
}

prop_compose! {
    fn model()(
        mu in 0.05f64..3.0,
        coupling in 0.0f64..3.0,
        alpha in -2.0f64..2.0,
        beta in 0.0f64..2.0,
        slip in -1.0f64..=1.0,
        q in any::<bool>(),
    ) -> ModelParams {
        ModelParams {
            nu: 0.0,
            mu,
            coupling,
            alpha,
            beta,
            slip,
            q_enabled: q,
            variant: if q { Variant::Full } else { Variant::QZero },
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_round_trip(values in proptest::collection::vec(-1e3f64..1e3, 32 * 32)) {
        let g = grid();
        let f = ScalarField::from_physical(&g, values.clone()).unwrap();
        let back = ScalarField::from_coeffs(&g, f.coeffs().to_vec()).unwrap();
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in back.physical().iter().zip(&values) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn strain_maps_to_half_vorticity(seed in any::<u64>(), k in 1u32..=10) {
        let g = grid();
        let u = random::divergence_free(&g, 1, k, 1.0, &mut random::rng(seed)).unwrap();
        let w = ops::curl(&u);
        let r = ops::riesz_r(&ops::sym_grad(&u));
        prop_assert!((&r - &w.scale(0.5)).l2_norm() <= 1e-12 * w.l2_norm());
    }

    #[test]
    fn advection_is_skew(seed in any::<u64>(), k in 1u32..=10) {
        let g = grid();
        let mut rng = random::rng(seed);
        let u = random::divergence_free(&g, 1, k, 1.0, &mut rng).unwrap();
        let w = random::band_limited(&g, 1, k, &mut rng).unwrap();
        let scale = u.l2_norm() * w.l2_norm() * w.l2_norm();
        prop_assert!(ops::advect(&u, &w).inner(&w).abs() <= 1e-12 * scale);
    }

    #[test]
    fn velocity_is_divergence_free(seed in any::<u64>()) {
        let s = state(seed, 10);
        prop_assert!(ops::max_mode_divergence(s.velocity()) <= 1e-13 * s.omega().max_coeff());
    }

    #[test]
    fn energy_identity_holds(seed in any::<u64>(), p in model()) {
        let p = ModelParams { q_enabled: false, variant: Variant::QZero, ..p };
        prop_assert!(energy_identity_residual(&state(seed, 10), &p).unwrap() <= 1e-9);
    }

    #[test]
    fn gamma_equation_holds(seed in any::<u64>(), p in model()) {
        prop_assert!(gamma_residual(&state(seed, 10), &p).unwrap() <= 1e-10);
    }

    #[test]
    fn cross_terms_cancel(seed in any::<u64>()) {
        let g = grid();
        let mut rng = random::rng(seed);
        let u = random::divergence_free(&g, 1, 10, 1.0, &mut rng).unwrap();
        let tau = random::tensor(&g, 0, 10, 1.0, &mut rng).unwrap();
        prop_assert!(cross_term_residual(&u, &tau) <= 1e-10);
    }

    #[test]
    fn snapshot_round_trip(seed in any::<u64>(), p in model()) {
        let bytes = encode(&state(seed, 10), &p);
        let again = encode(&decode(&bytes).unwrap().state(&p).unwrap(), &p);
        prop_assert_eq!(again, bytes);
    }
}
