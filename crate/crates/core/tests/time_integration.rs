use oldroyd_core::model::{gamma_of, rhs, gamma_rhs_theoretical, ModelParams, SimState, Variant};
use oldroyd_core::random;
use oldroyd_core::spectral::{Grid, ScalarField, SymTensorField};
use oldroyd_core::timestep::{integrate, Cadence, Integrator, Scheme, StepConfig};

fn smooth_state(n: usize, seed: u64, amp: f64) -> SimState {
    let g = Grid::periodic_square(n).unwrap();
    let mut rng = random::rng(seed);
    let w = random::band_limited_rms(&g, 1, 5, amp, &mut rng).unwrap();
    let tau = random::tensor(&g, 0, 5, amp, &mut rng).unwrap();
    SimState::new(0.0, w, tau).unwrap()
}

fn run_fixed(s0: &SimState, p: &ModelParams, scheme: Scheme, dt: f64, t_end: f64) -> SimState {
    let cfg = StepConfig::fixed(scheme, dt, t_end);
    integrate(s0.clone(), p, &cfg, Cadence::Steps(usize::MAX), |_| Ok(())).unwrap()
}

fn distance(a: &SimState, b: &SimState) -> f64 {
    ((a.omega() - b.omega()).l2_norm().powi(2) + a.tau().sub(b.tau()).l2_norm().powi(2)).sqrt()
}

fn observed_order(scheme: Scheme) -> Vec<f64> {
    let s0 = smooth_state(32, 11, 1.0);
    let p = ModelParams { mu: 0.5, coupling: 1.0, alpha: 1.0, beta: 0.2, ..Default::default() };
    let t_end = 0.4;
    let dts = [0.04, 0.02, 0.01];
    let reference = run_fixed(&s0, &p, scheme, dts[2] / 8.0, t_end);
    let errs: Vec<f64> = dts.iter().map(|&dt| distance(&run_fixed(&s0, &p, scheme, dt, t_end), &reference)).collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn ifrk2_is_second_order() {
    for o in observed_order(Scheme::Ifrk2) {
        assert!((o - 2.0).abs() < 0.3, "order {o}");
    }
}

#[test]
fn ifrk4_is_fourth_order() {
    for o in observed_order(Scheme::Ifrk4) {
        assert!((o - 4.0).abs() < 0.5, "order {o}");
    }
}

#[test]
fn euler_enstrophy_drift_shrinks_with_dt() {
    let g = Grid::periodic_square(32).unwrap();
    let w = random::band_limited_rms(&g, 1, 5, 1.0, &mut random::rng(3)).unwrap();
    let s0 = SimState::new(0.0, w, SymTensorField::zeros(&g)).unwrap();
    let p = ModelParams { coupling: 0.0, alpha: 0.0, ..Default::default() };
    let e0 = s0.omega().l2_norm();
    let drift = |dt: f64| (run_fixed(&s0, &p, Scheme::Ifrk2, dt, 0.5).omega().l2_norm() - e0).abs();
    let (a, b) = (drift(0.02), drift(0.01));
    assert!(a < 1e-3 * e0, "{a}");
    assert!(b < a / 3.0, "{a} {b}");
}

#[test]
fn gamma_rhs_matches_central_difference_in_time() {
    let s0 = smooth_state(32, 8, 1.0);
    for q in [false, true] {
        let p = ModelParams {
            mu: 0.7,
            coupling: 1.2,
            alpha: 0.9,
            beta: 0.4,
            slip: 0.3,
            q_enabled: q,
            variant: if q { Variant::Full } else { Variant::QZero },
            ..Default::default()
        };
        let predicted = gamma_rhs_theoretical(&s0, &p).unwrap();
        let mut errs = Vec::new();
        for h in [1e-2, 5e-3] {
            let fwd = explicit_rk4(&s0, &p, h / 16.0, 16);
            let back = explicit_rk4(&s0, &p, -h / 16.0, 16);
            let fd = (&gamma_of(&fwd, &p) - &gamma_of(&back, &p)).scale(0.5 / h);
            errs.push((&fd - &predicted).l2_norm() / predicted.l2_norm());
        }
        assert!(errs[0] < 1e-2, "{errs:?}");
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.0 && ratio < 5.0, "{errs:?}");
    }
}

/// Classical RK4 on the full right-hand side; `dt` may be negative.
fn explicit_rk4(s0: &SimState, p: &ModelParams, dt: f64, steps: usize) -> SimState {
    let f = |s: &SimState| {
        let d = rhs(s, p);
        (d.omega(), d.tau())
    };
    let shift = |s: &SimState, k: &(ScalarField, SymTensorField), c: f64| {
        SimState::new(s.t + c, s.omega().axpy(c, &k.0), s.tau().axpy(c, &k.1)).unwrap()
    };
    let mut s = s0.clone();
    for _ in 0..steps {
        let k1 = f(&s);
        let k2 = f(&shift(&s, &k1, 0.5 * dt));
        let k3 = f(&shift(&s, &k2, 0.5 * dt));
        let k4 = f(&shift(&s, &k3, dt));
        let w = s.omega().axpy(dt / 6.0, &k1.0).axpy(dt / 3.0, &k2.0).axpy(dt / 3.0, &k3.0).axpy(dt / 6.0, &k4.0);
        let tau = s.tau().axpy(dt / 6.0, &k1.1).axpy(dt / 3.0, &k2.1).axpy(dt / 3.0, &k3.1).axpy(dt / 6.0, &k4.1);
        s = SimState::new(s.t + dt, w, tau).unwrap();
    }
    s
}

#[test]
fn integrator_is_reusable() {
    let s0 = smooth_state(16, 1, 0.3);
    let it = Integrator::new(ModelParams::default(), StepConfig::default());
    let a = it.step(&s0, 0.01).unwrap();
    let b = it.step(&s0, 0.01).unwrap();
    assert_eq!(a.omega().physical(), b.omega().physical());
}
