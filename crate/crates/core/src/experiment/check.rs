//! The invariant battery behind the `check` command.

use crate::besov::DyadicDecomposition;
use crate::diagnostics::{commutator_ratio, cross_term_residual, energy_identity_residual, gamma_residual};
use crate::model::{commutator_r_advect, ModelParams, SimState, Variant};
use crate::par;
use crate::random;
use crate::spectral::{ops, Grid, ScalarField, SymTensorField, VectorField};
use crate::timestep::{integrate, step, Cadence, Scheme, StepConfig};

use super::snapshot::{decode, encode};

/// Operator under test for the cancellation identity; replaceable so that a
/// deliberately broken operator can be shown to fail the battery.
pub type TensorToScalar = fn(&SymTensorField) -> ScalarField;

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Smaller ensembles and grids.
    pub quick: bool,
    pub riesz_r: TensorToScalar,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            quick: false,
            riesz_r: ops::riesz_r,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }
}

fn band(grid: &Grid) -> u32 {
    (grid.dealias_cutoff() as u32).min(8)
}

/// Random band-limited state with `ω` and `τ` of unit rms.
pub fn random_state(n: usize, seed: u64) -> SimState {
    let g = Grid::periodic_square(n).expect("valid size");
    let k = band(&g);
    let mut rng = random::rng(seed);
    let w = random::band_limited_rms(&g, 1, k, 1.0, &mut rng).expect("band fits");
    let tau = random::tensor(&g, 0, k, 1.0, &mut rng).expect("band fits");
    SimState::new(0.0, w, tau).expect("zero-mean vorticity")
}

fn random_pair(n: usize, seed: u64, k_hi: u32) -> (VectorField, SymTensorField) {
    let g = Grid::periodic_square(n).expect("valid size");
    let mut rng = random::rng(seed);
    let u = random::divergence_free(&g, 1, k_hi, 1.0, &mut rng).expect("band fits");
    let tau = random::tensor(&g, 0, k_hi, 1.0, &mut rng).expect("band fits");
    (u, tau)
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

fn test_params(q: bool) -> ModelParams {
    ModelParams {
        nu: 0.0,
        mu: 0.7,
        coupling: 1.3,
        alpha: 0.9,
        beta: 0.2,
        slip: 0.4,
        q_enabled: q,
        variant: if q { Variant::Full } else { Variant::QZero },
    }
}

/// `max ‖R(Du) − ω/2‖ / ‖ω‖` over random divergence-free fields.
pub fn cancellation_defect(riesz_r: TensorToScalar, n: usize, samples: u64) -> f64 {
    let seeds: Vec<u64> = (0..samples).collect();
    let errs = par::map(&seeds, |&s| {
        let g = Grid::periodic_square(n).expect("valid size");
        let u = random::divergence_free(&g, 1, band(&g), 1.0, &mut random::rng(1000 + s)).expect("band fits");
        let omega = ops::curl(&u);
        let r = riesz_r(&ops::sym_grad(&u));
        (&r - &omega.scale(0.5)).l2_norm() / omega.l2_norm()
    });
    max_of(&errs)
}

/// Largest implied commutator constant over an ensemble whose members vary in
/// bandwidth; the same continuous fields are used at every resolution.
pub fn commutator_constant(n: usize, samples: u64, epsilon: f64) -> f64 {
    let seeds: Vec<u64> = (0..samples).collect();
    let dec = DyadicDecomposition::new(&Grid::periodic_square(n).expect("valid size"));
    let ratios = par::map(&seeds, |&s| {
        let k_hi = 2 + (s % 7) as u32;
        let (u, tau) = random_pair(n, 5000 + s, k_hi);
        commutator_ratio(&dec, &u, &tau, epsilon)
            .expect("valid indices")
            .unwrap_or(0.0)
    });
    max_of(&ratios)
}

/// Observed convergence orders on the `Q = 0` system from errors against a
/// reference run with an eight times smaller step.
pub fn temporal_orders(scheme: Scheme, n: usize, dts: &[f64], t_end: f64) -> Vec<f64> {
    let g = Grid::periodic_square(n).expect("valid size");
    let k = band(&g).min(5);
    let mut rng = random::rng(77);
    let w = random::band_limited_rms(&g, 1, k, 1.0, &mut rng).expect("band fits");
    let tau = random::tensor(&g, 0, k, 1.0, &mut rng).expect("band fits");
    let s0 = SimState::new(0.0, w, tau).expect("zero-mean vorticity");
    let p = ModelParams {
        mu: 0.5,
        coupling: 1.0,
        alpha: 1.0,
        beta: 0.2,
        ..Default::default()
    };
    let run = |dt: f64| {
        integrate(
            s0.clone(),
            &p,
            &StepConfig::fixed(scheme, dt, t_end),
            Cadence::Steps(usize::MAX),
            |_| Ok(()),
        )
        .expect("smooth data integrates")
    };
    let finest = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let reference = run(finest / 8.0);
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let s = run(dt);
            let dw = (s.omega() - reference.omega()).l2_norm();
            let dt_ = s.tau().sub(reference.tau()).l2_norm();
            dw.hypot(dt_)
        })
        .collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Error of one step of the pure relaxation–diffusion problem against its
/// closed form.
pub fn stiff_defect(scheme: Scheme) -> f64 {
    let g = Grid::periodic_square(32).expect("valid size");
    let tau = random::tensor(&g, 0, 10, 1.0, &mut random::rng(9)).expect("band fits");
    let s = SimState::new(0.0, ScalarField::zeros(&g), tau.clone()).expect("zero vorticity");
    let p = ModelParams {
        coupling: 0.0,
        alpha: 0.0,
        mu: 0.4,
        beta: 0.3,
        ..Default::default()
    };
    let dt = 0.25;
    let out = step(&s, dt, &p, &StepConfig::fixed(scheme, dt, dt)).expect("linear step");
    let exact = tau.map(|c| c.map_modes(|i, v| v * (-(p.beta + p.mu * g.k_squared(i)) * dt).exp()));
    out.tau().sub(&exact).l2_norm() / exact.l2_norm()
}

/// Runs every check and returns one result per line of the table.
pub fn run_checks(opts: &CheckOptions) -> Vec<CheckResult> {
    let quick = opts.quick;
    let (n, samples) = if quick { (32, 10) } else { (64, 100) };
    let mut out = Vec::new();

    let defect = cancellation_defect(opts.riesz_r, n, samples);
    out.push(CheckResult::new(
        "cancellation R(Du) = omega/2",
        defect <= 1e-12,
        format!("max relative defect {defect:.2e} over {samples} fields at n = {n} (tol 1e-12)"),
    ));

    let seeds: Vec<u64> = (0..samples).collect();
    let gamma = par::map(&seeds, |&s| {
        let st = random_state(32, s);
        let a = gamma_residual(&st, &test_params(false)).expect("inviscid");
        let b = gamma_residual(&st, &test_params(true)).expect("inviscid");
        a.max(b)
    });
    let g = max_of(&gamma);
    out.push(CheckResult::new(
        "Gamma equation residual",
        g <= 1e-10,
        format!("max {g:.2e} over {samples} states, Q on and off (tol 1e-10)"),
    ));

    let energy = par::map(&seeds, |&s| {
        energy_identity_residual(&random_state(32, 200 + s), &test_params(false)).expect("Q off")
    });
    let e = max_of(&energy);
    out.push(CheckResult::new(
        "weighted energy identity",
        e <= 1e-9,
        format!("max {e:.2e} over {samples} states (tol 1e-9)"),
    ));

    let cross = par::map(&seeds, |&s| {
        let (u, tau) = random_pair(32, 300 + s, 8);
        cross_term_residual(&u, &tau)
    });
    let c = max_of(&cross);
    out.push(CheckResult::new(
        "cross-term cancellation",
        c <= 1e-10,
        format!("max {c:.2e} over {samples} pairs (tol 1e-10)"),
    ));

    let skew = par::map(&seeds, |&s| {
        let (u, tau) = random_pair(32, 400 + s, 8);
        let w = ops::curl(&tau_to_velocity(&tau));
        let a = ops::advect(&u, &w).inner(&w).abs() / (u.l2_norm() * w.l2_norm() * w.l2_norm());
        let adv = ops::advect_tensor(&u, &tau);
        let b = adv.inner(&tau).abs() / (u.l2_norm() * tau.l2_norm() * tau.l2_norm());
        a.max(b)
    });
    let k = max_of(&skew);
    out.push(CheckResult::new(
        "advection skew-symmetry",
        k <= 1e-10,
        format!("max {k:.2e} over {samples} pairs (tol 1e-10)"),
    ));

    let trivial = {
        let g = Grid::periodic_square(32).expect("valid size");
        let (u, tau) = random_pair(32, 17, 8);
        let uc = VectorField::new(ScalarField::constant(&g, 0.3), ScalarField::constant(&g, -0.8));
        let tc = SymTensorField::new(
            ScalarField::constant(&g, 1.0),
            ScalarField::constant(&g, 2.0),
            ScalarField::constant(&g, -0.5),
        );
        let a = commutator_r_advect(&uc, &tau).l2_norm() / tau.l2_norm();
        let b = commutator_r_advect(&u, &tc).max_coeff();
        a.max(b)
    };
    let (n_lo, n_hi, ens) = if quick { (32, 64, 20) } else { (64, 128, 200) };
    let c_lo = commutator_constant(n_lo, ens, 0.5);
    let c_hi = commutator_constant(n_hi, ens, 0.5);
    let drift = (c_hi / c_lo - 1.0).abs();
    out.push(CheckResult::new(
        "commutator estimate ledger",
        trivial <= 1e-12 && c_lo.is_finite() && c_lo > 0.0 && drift <= 0.2,
        format!(
            "constant {c_lo:.4} (n = {n_lo}) vs {c_hi:.4} (n = {n_hi}), change {:.1}% (tol 20%); trivial cases {trivial:.1e}",
            100.0 * drift
        ),
    ));

    let (on, dts): (usize, &[f64]) = if quick { (16, &[0.04, 0.02, 0.01]) } else { (32, &[0.04, 0.02, 0.01]) };
    for (scheme, name, target, tol) in [
        (Scheme::Ifrk2, "IFRK2 temporal order", 2.0, 0.3),
        (Scheme::Ifrk4, "IFRK4 temporal order", 4.0, 0.5),
    ] {
        let orders = temporal_orders(scheme, on, dts, 0.4);
        let ok = orders.iter().all(|o| (o - target).abs() <= tol);
        let shown: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
        out.push(CheckResult::new(
            name,
            ok,
            format!("observed [{}], expected {target} +- {tol}", shown.join(", ")),
        ));
    }

    let stiff = stiff_defect(Scheme::Ifrk2).max(stiff_defect(Scheme::Ifrk4));
    out.push(CheckResult::new(
        "stiff part exact",
        stiff <= 1e-12,
        format!("relative error {stiff:.2e} against the closed form (tol 1e-12)"),
    ));

    let st = random_state(32, 5);
    let p = test_params(true);
    let bytes = encode(&st, &p);
    let again = decode(&bytes)
        .ok()
        .and_then(|s| s.state(&p).ok())
        .map(|s| encode(&s, &p));
    out.push(CheckResult::new(
        "snapshot round trip",
        again.as_deref() == Some(bytes.as_slice()),
        format!("{} bytes", bytes.len()),
    ));
    out
}

fn tau_to_velocity(tau: &SymTensorField) -> VectorField {
    ops::leray_project(&ops::div_tensor(tau))
}

pub fn format_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in results {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        s += &format!("{mark}  {:<width$}  {}\n", r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    s += &format!("{} checks, {} failed\n", results.len(), failed);
    s
}
