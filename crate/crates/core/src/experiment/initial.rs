use crate::besov::{sobolev_norm, DyadicDecomposition};
use crate::model::{ModelParams, SimState, Variant};
use crate::random;
use crate::spectral::{Grid, ScalarField, SymTensorField};

use super::config::{InitialKind, InitialSpec};
use super::snapshot::load_snapshot;
use super::ExperimentError;

/// `‖(u,τ)‖_{H¹} + ‖ω‖_{B⁰∞,1} + ‖τ‖_{B⁰∞,1}`, the size of initial data in
/// the small-data regime. The `H¹` norm of the pair is the root sum of
/// squares of the component norms.
pub fn smallness_norm(state: &SimState, dec: &DyadicDecomposition) -> f64 {
    let u = state.velocity();
    let tau = state.tau();
    let h1_sq = [&u.x, &u.y].iter().map(|c| sobolev_norm(c, 1.0).powi(2)).sum::<f64>()
        + sobolev_norm(&tau.xx, 1.0).powi(2)
        + 2.0 * sobolev_norm(&tau.xy, 1.0).powi(2)
        + sobolev_norm(&tau.yy, 1.0).powi(2);
    let inf = f64::INFINITY;
    let besov = dec.besov_norm(state.omega(), 0.0, inf, 1.0).expect("valid indices")
        + dec.tensor_besov_norm(tau, 0.0, inf, 1.0).expect("valid indices");
    h1_sq.sqrt() + besov
}

fn taylor_green(grid: &Grid, a: f64, a_tau: f64) -> (ScalarField, SymTensorField) {
    let k = grid.base_wavenumber();
    let omega = ScalarField::from_fn(grid, move |x, y| 2.0 * a * (k * x).cos() * (k * y).cos());
    let tau = SymTensorField::new(
        ScalarField::from_fn(grid, move |x, _| a_tau * (2.0 * k * x).cos()),
        ScalarField::from_fn(grid, move |x, y| a_tau * (k * x).sin() * (k * y).sin()),
        ScalarField::from_fn(grid, move |_, y| -a_tau * (2.0 * k * y).cos()),
    );
    (omega.without_mean(), tau)
}

fn single_mode(grid: &Grid, mode: (i64, i64), a: f64, a_tau: f64) -> (ScalarField, SymTensorField) {
    let k = grid.base_wavenumber();
    let (k1, k2) = (mode.0 as f64 * k, mode.1 as f64 * k);
    let omega = ScalarField::from_fn(grid, move |x, y| a * (k1 * x + k2 * y).cos());
    let tau = SymTensorField::new(
        ScalarField::zeros(grid),
        ScalarField::from_fn(grid, move |x, y| a_tau * (k1 * x + k2 * y).cos()),
        ScalarField::zeros(grid),
    );
    (omega, tau)
}

/// Builds the initial state described by `spec` on `grid`.
pub fn make_initial_data(
    spec: &InitialSpec,
    grid: &Grid,
    params: &ModelParams,
) -> Result<SimState, ExperimentError> {
    let (t0, omega, tau) = match spec.kind {
        InitialKind::TaylorGreen => {
            let (w, t) = taylor_green(grid, spec.amplitude, spec.tau_amplitude);
            (0.0, w, t)
        }
        InitialKind::SingleMode => {
            let (w, t) = single_mode(grid, spec.mode, spec.amplitude, spec.tau_amplitude);
            (0.0, w, t)
        }
        InitialKind::RandomBandLimited => {
            let seed = spec
                .seed
                .ok_or_else(|| ExperimentError::Setup("random initial data requires a seed".into()))?;
            let mut rng = random::rng(seed);
            let w = random::band_limited_rms(grid, spec.k_lo.max(1), spec.k_hi, spec.amplitude, &mut rng)?;
            let t = random::tensor(grid, spec.k_lo, spec.k_hi, spec.tau_amplitude, &mut rng)?;
            (0.0, w, t)
        }
        InitialKind::FromSnapshot => {
            let path = spec
                .path
                .as_ref()
                .ok_or_else(|| ExperimentError::Setup("from_snapshot requires a path".into()))?;
            let snap = load_snapshot(path)?;
            if snap.grid.n() != grid.n() || snap.grid.length() != grid.length() {
                return Err(ExperimentError::Setup(format!(
                    "snapshot {} holds a {}-point grid of length {}, the configuration asks for {} points of length {}; resampling is not supported",
                    path.display(),
                    snap.grid.n(),
                    snap.grid.length(),
                    grid.n(),
                    grid.length()
                )));
            }
            (snap.t, snap.omega, snap.tau)
        }
    };
    let state = SimState::for_variant(t0, omega, tau, params.variant)?;
    match spec.delta {
        Some(delta) => rescale_to(state, delta, params.variant),
        None => Ok(state),
    }
}

fn rescale_to(state: SimState, delta: f64, variant: Variant) -> Result<SimState, ExperimentError> {
    let dec = DyadicDecomposition::new(state.grid());
    let size = smallness_norm(&state, &dec);
    let factor = if size > 0.0 { delta / size } else { 0.0 };
    let (t, w, tau) = state.into_parts();
    Ok(SimState::for_variant(t, w.scale(factor), tau.scale(factor), variant)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::ExperimentConfig;
    use crate::spectral::ops;

    fn spec(kind: InitialKind) -> InitialSpec {
        InitialSpec {
            kind,
            seed: Some(3),
            k_hi: 5,
            ..ExperimentConfig::default().initial
        }
    }

    #[test]
    fn taylor_green_velocity_matches_formula() {
        let g = Grid::periodic_square(32).unwrap();
        let s = make_initial_data(&spec(InitialKind::TaylorGreen), &g, &ModelParams::default()).unwrap();
        let ux = ScalarField::from_fn(&g, |x, y| -x.cos() * y.sin());
        let uy = ScalarField::from_fn(&g, |x, y| x.sin() * y.cos());
        assert!((&s.velocity().x - &ux).l2_norm() < 1e-12);
        assert!((&s.velocity().y - &uy).l2_norm() < 1e-12);
        assert!(s.tau().xx.l2_norm() > 0.0);
    }

    #[test]
    fn delta_scaling_is_exact() {
        let g = Grid::periodic_square(32).unwrap();
        let dec = DyadicDecomposition::new(&g);
        let p = ModelParams::default();
        for kind in [InitialKind::TaylorGreen, InitialKind::RandomBandLimited, InitialKind::SingleMode] {
            let sp = InitialSpec { delta: Some(0.05), ..spec(kind) };
            let s = make_initial_data(&sp, &g, &p).unwrap();
            assert!((smallness_norm(&s, &dec) - 0.05).abs() < 1e-10 * 0.05);
        }
        let zero = InitialSpec { delta: Some(0.0), ..spec(InitialKind::RandomBandLimited) };
        let s = make_initial_data(&zero, &g, &p).unwrap();
        assert_eq!(s.omega().max_coeff(), 0.0);
        assert_eq!(s.tau().l2_norm(), 0.0);
    }

    #[test]
    fn random_data_is_deterministic_and_band_limited() {
        let g = Grid::periodic_square(32).unwrap();
        let p = ModelParams::default();
        let a = make_initial_data(&spec(InitialKind::RandomBandLimited), &g, &p).unwrap();
        let b = make_initial_data(&spec(InitialKind::RandomBandLimited), &g, &p).unwrap();
        assert_eq!(a.omega().coeffs(), b.omega().coeffs());
        assert_eq!(a.omega().mean(), 0.0);
        assert_eq!(ops::dealias(a.omega()).coeffs(), a.omega().coeffs());
        let too_wide = InitialSpec { k_hi: 20, ..spec(InitialKind::RandomBandLimited) };
        assert!(make_initial_data(&too_wide, &g, &p).is_err());
    }

    #[test]
    fn stokes_toy_velocity_follows_stress() {
        let g = Grid::periodic_square(32).unwrap();
        let p = ModelParams { variant: Variant::StokesToy, mu: 0.0, ..Default::default() };
        let s = make_initial_data(&spec(InitialKind::SingleMode), &g, &p).unwrap();
        // τ₁₂ = cos x gives u = (0, −sin x).
        let expect = ScalarField::from_fn(&g, |x, _| -x.sin());
        assert!((&s.velocity().y - &expect).l2_norm() < 1e-12);
    }
}
