//! Monitored quantities, identity residuals, inequality ledgers and decay
//! fits.
//!
//! Time derivatives in the identities are semi-discrete: they are assembled
//! from [`rhs`] at a single state, so they carry no time-stepping error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::besov::{tensor_sobolev_norm, vector_sobolev_norm, BesovError, DyadicDecomposition};
use crate::model::{
    commutator_r_advect, gamma_of, gamma_rhs_theoretical, gamma_source, rhs, ModelError, ModelParams,
    SimState, Variant,
};
use crate::spectral::{ops, Grid, ScalarField, SymTensorField, VectorField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Besov(#[from] BesovError),
    #[error("times must be strictly increasing (entry {index})")]
    Unsorted { index: usize },
    #[error("decay fit needs positive values, entry {index} is {value}")]
    NonPositive { index: usize, value: f64 },
    #[error("decay fit needs at least {needed} samples, got {found}")]
    TooFewSamples { found: usize, needed: usize },
}

/// Settings of the per-observation diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Regularity `ε` of the `B^ε_{∞,1}` stress norm.
    pub epsilon: f64,
    /// Orders `s` of the recorded `Hˢ` norms of `u` and `τ`.
    pub hs: Vec<f64>,
    /// Weight `M` of the functional `N`.
    pub n_weight: f64,
    /// Order `s` of `‖u‖_{Hˢ}` inside the logarithmic velocity-gradient bound.
    pub log_sobolev_s: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            epsilon: 0.5,
            hs: vec![1.0, 2.0, 3.0],
            n_weight: 10.0,
            log_sobolev_s: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsNorm {
    pub s: f64,
    pub u: f64,
    pub tau: f64,
}

/// One observation. Quantities that are undefined for the configured model
/// (for instance the `Γ` residual when `ν ≠ 0`) are `None` and serialize as
/// `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub u_l2: f64,
    pub tau_l2: f64,
    pub grad_u_l2: f64,
    pub grad_tau_l2: f64,
    pub lap_tau_l2: f64,
    pub omega_linf: f64,
    pub omega_l2: f64,
    pub gamma_linf: f64,
    pub gamma_b0_inf1: f64,
    pub tau_b_eps_inf1: f64,
    pub tau_h2: f64,
    pub grad_u_linf: f64,
    pub bkm_accum: f64,
    pub energy_weighted: f64,
    pub n_value: f64,
    pub energy_identity_residual: Option<f64>,
    pub gamma_residual: Option<f64>,
    pub commutator_norm: f64,
    pub commutator_ratio: Option<f64>,
    pub gamma_source_linf: Option<f64>,
    pub gamma_majorant: Option<f64>,
    pub bkm_log_ratio: Option<f64>,
    pub enstrophy_lhs: Option<f64>,
    pub enstrophy_majorant: Option<f64>,
    pub hs_norms: Vec<HsNorm>,
}

fn weighted_sum(f: &ScalarField, power: i32) -> f64 {
    let g = f.grid();
    let s: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| g.k_squared(i).powi(power) * c.norm_sqr())
        .sum();
    s * g.area()
}

fn tensor_weighted_sum(tau: &SymTensorField, power: i32) -> f64 {
    weighted_sum(&tau.xx, power) + 2.0 * weighted_sum(&tau.xy, power) + weighted_sum(&tau.yy, power)
}

/// `‖∇τ‖²_{L²}` with Frobenius weights.
pub fn grad_tensor_sqr(tau: &SymTensorField) -> f64 {
    tensor_weighted_sum(tau, 1)
}

/// `‖Δτ‖²_{L²}` with Frobenius weights.
pub fn lap_tensor_sqr(tau: &SymTensorField) -> f64 {
    tensor_weighted_sum(tau, 2)
}

/// `½(α‖u‖² + K‖τ‖²)`.
pub fn energy_weighted(state: &SimState, params: &ModelParams) -> f64 {
    let u = state.velocity().l2_norm();
    let tau = state.tau().l2_norm();
    0.5 * (params.alpha * u * u + params.coupling * tau * tau)
}

/// `N = M(α‖u‖² + K‖τ‖²) + M(α‖∇u‖² + K‖∇τ‖²) + ‖Γ‖²`.
pub fn n_functional(state: &SimState, params: &ModelParams, m: f64) -> f64 {
    let (a, k) = (params.alpha, params.coupling);
    let u = state.velocity().l2_norm();
    let tau = state.tau().l2_norm();
    let low = a * u * u + k * tau * tau;
    let high = a * state.grad().l2_norm_sqr() + k * grad_tensor_sqr(state.tau());
    let gamma = gamma_of(state, params).l2_norm();
    m * (low + high) + gamma * gamma
}

fn require_energy_structure(params: &ModelParams) -> Result<(), ModelError> {
    if params.variant == Variant::StokesToy {
        return Err(ModelError::UnsupportedVariant("the energy identity", params.variant));
    }
    if params.q_active() {
        return Err(ModelError::QEnabled);
    }
    Ok(())
}

/// Relative residual of the weighted energy law
/// `d/dt ½(α‖u‖² + K‖τ‖²) = −μK‖∇τ‖² − βK‖τ‖² − να‖ω‖²`,
/// with the left side assembled from [`rhs`].
pub fn energy_identity_residual(state: &SimState, params: &ModelParams) -> Result<f64, ModelError> {
    require_energy_structure(params)?;
    let d = rhs(state, params);
    let du = ops::biot_savart(&d.omega())?;
    let (a, k) = (params.alpha, params.coupling);
    let rate_u = a * state.velocity().inner(&du);
    let rate_tau = k * state.tau().inner(&d.tau());
    let tau = state.tau().l2_norm();
    let omega = state.omega().l2_norm();
    let sinks = [
        params.mu * k * grad_tensor_sqr(state.tau()),
        params.beta * k * tau * tau,
        params.nu * a * omega * omega,
    ];
    let residual = rate_u + rate_tau + sinks.iter().sum::<f64>();
    let scale = rate_u.abs() + rate_tau.abs() + sinks.iter().map(|s| s.abs()).sum::<f64>();
    Ok(if scale == 0.0 { 0.0 } else { residual.abs() / scale })
}

/// Both sides of the enstrophy inequality
/// `d/dt(‖∇u‖² + ‖∇τ‖²) + ½‖Δτ‖² ≤ C ‖∇u‖² ‖∇τ‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnstrophyBalance {
    pub lhs: f64,
    pub majorant: f64,
}

impl EnstrophyBalance {
    /// Implied constant `lhs / majorant`, when the majorant is nonzero.
    pub fn constant(&self) -> Option<f64> {
        (self.majorant > 1e-300).then(|| self.lhs / self.majorant)
    }
}

pub fn enstrophy_balance(state: &SimState, params: &ModelParams) -> Result<EnstrophyBalance, ModelError> {
    require_energy_structure(params)?;
    let d = rhs(state, params);
    let tau = state.tau();
    let d_grad_u = 2.0 * state.omega().inner(&d.omega());
    let lap: SymTensorField = tau.map(ops::laplacian);
    let d_grad_tau = -2.0 * lap.inner(&d.tau());
    let grad_u = state.grad().l2_norm_sqr();
    let grad_tau = grad_tensor_sqr(tau);
    Ok(EnstrophyBalance {
        lhs: d_grad_u + d_grad_tau + 0.5 * lap_tensor_sqr(tau),
        majorant: grad_u * grad_tau,
    })
}

/// Relative `L²` mismatch between `dΓ/dt = μ dω − K R(dτ)` assembled from
/// [`rhs`] and the transport form of the `Γ` equation.
pub fn gamma_residual(state: &SimState, params: &ModelParams) -> Result<f64, ModelError> {
    let predicted = gamma_rhs_theoretical(state, params)?;
    let d = rhs(state, params);
    let assembled = d
        .omega()
        .scale(params.mu)
        .axpy(-params.coupling, &ops::riesz_r(&d.tau()));
    let scale = predicted.l2_norm().max(assembled.l2_norm());
    let err = (&assembled - &predicted).l2_norm();
    Ok(if scale == 0.0 { 0.0 } else { err / scale })
}

/// Grid quadratures of `∫ div τ · u` and `∫ Du : τ`. For divergence-free `u`
/// the two cancel.
pub fn cross_term_integrals(u: &VectorField, tau: &SymTensorField) -> (f64, f64) {
    let g = u.grid();
    let w = g.spacing().powi(2);
    let div = ops::div_tensor(tau);
    let du = ops::sym_grad(u);
    let (ux, uy) = (u.x.physical(), u.y.physical());
    let (fx, fy) = (div.x.physical(), div.y.physical());
    let (d11, d12, d22) = (du.xx.physical(), du.xy.physical(), du.yy.physical());
    let (t11, t12, t22) = (tau.xx.physical(), tau.xy.physical(), tau.yy.physical());
    let mut first = 0.0;
    let mut second = 0.0;
    for i in 0..g.len() {
        first += fx[i] * ux[i] + fy[i] * uy[i];
        second += d11[i] * t11[i] + 2.0 * d12[i] * t12[i] + d22[i] * t22[i];
    }
    (first * w, second * w)
}

/// `|∫ div τ · u + ∫ Du : τ|` relative to the size of the two terms.
pub fn cross_term_residual(u: &VectorField, tau: &SymTensorField) -> f64 {
    let (a, b) = cross_term_integrals(u, tau);
    let scale = a.abs() + b.abs();
    if scale == 0.0 {
        0.0
    } else {
        (a + b).abs() / scale
    }
}

const RATIO_FLOOR: f64 = 1e-14;

/// `‖[R, u·∇]τ‖_{B⁰∞,1} / ((‖ω‖_{L∞} + ‖ω‖_{L²})(‖τ‖_{B^ε∞,1} + ‖τ‖_{L²}))`.
/// `None` when the denominator is below `1e-14`.
pub fn commutator_ratio(
    dec: &DyadicDecomposition,
    u: &VectorField,
    tau: &SymTensorField,
    epsilon: f64,
) -> Result<Option<f64>, DiagnosticsError> {
    let num = dec.besov_norm(&commutator_r_advect(u, tau), 0.0, f64::INFINITY, 1.0)?;
    let omega = ops::curl(u);
    let den = (omega.max_abs() + omega.l2_norm())
        * (dec.tensor_besov_norm(tau, epsilon, f64::INFINITY, 1.0)? + tau.l2_norm());
    Ok((den >= RATIO_FLOOR).then(|| num / den))
}

/// Trapezoidal `∫ v dt` over `(t, v)` samples.
pub fn bkm_integral(series: &[(f64, f64)]) -> Result<f64, DiagnosticsError> {
    check_sorted(series)?;
    Ok(series
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum())
}

fn check_sorted(series: &[(f64, f64)]) -> Result<(), DiagnosticsError> {
    match series.windows(2).position(|w| w[1].0 <= w[0].0) {
        Some(i) => Err(DiagnosticsError::Unsorted { index: i + 1 }),
        None => Ok(()),
    }
}

/// `‖∇u‖_{L∞} / (‖ω‖_{L∞} log(e + ‖u‖_{Hˢ}))`; `None` for vanishing vorticity.
pub fn bkm_log_ratio(grad_u_linf: f64, omega_linf: f64, u_hs: f64) -> Option<f64> {
    let den = omega_linf * (std::f64::consts::E + u_hs).ln();
    (den > RATIO_FLOOR).then(|| grad_u_linf / den)
}

/// The logarithmic gradient bound evaluated on a record, using the `Hˢ` entry
/// of the largest recorded order.
pub fn bkm_log_check(record: &DiagnosticsRecord) -> Option<f64> {
    let hs = record
        .hs_norms
        .iter()
        .max_by(|a, b| a.s.total_cmp(&b.s))?;
    bkm_log_ratio(record.grad_u_linf, record.omega_linf, hs.u)
}

/// Exponential rate of a positive series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `log v` against `t`.
    pub rate: f64,
    /// Coefficient of determination of the linear fit.
    pub r_squared: f64,
    pub samples: usize,
}

pub const DECAY_FIT_MIN_SAMPLES: usize = 10;

/// Least-squares slope of `log v` against `t` over the trailing half of the
/// series.
pub fn decay_fit(series: &[(f64, f64)]) -> Result<DecayFit, DiagnosticsError> {
    if series.len() < DECAY_FIT_MIN_SAMPLES {
        return Err(DiagnosticsError::TooFewSamples {
            found: series.len(),
            needed: DECAY_FIT_MIN_SAMPLES,
        });
    }
    check_sorted(series)?;
    if let Some((index, &(_, value))) = series.iter().enumerate().find(|(_, p)| p.1 <= 0.0 || p.1.is_nan()) {
        return Err(DiagnosticsError::NonPositive { index, value });
    }
    let tail = &series[series.len() / 2..];
    let n = tail.len() as f64;
    let mt = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in tail {
        let (dt, dy) = (t - mt, v.ln() - my);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    let rate = sty / stt;
    // A flat series is fit perfectly by a zero slope.
    let r_squared = if syy <= 1e-30 * (1.0 + my * my) { 1.0 } else { rate * sty / syy };
    Ok(DecayFit {
        rate,
        r_squared,
        samples: tail.len(),
    })
}

/// Stateful observer that turns states into records, accumulating the time
/// integrals (`∫‖∇u‖_{L∞}` and the `Γ` majorant) by the trapezoidal rule over
/// observation times.
#[derive(Clone, Debug)]
pub struct Monitor {
    params: ModelParams,
    config: DiagnosticsConfig,
    dec: Option<DyadicDecomposition>,
    last: Option<(f64, f64, Option<f64>)>,
    bkm: f64,
    majorant: Option<f64>,
}

impl Monitor {
    pub fn new(params: ModelParams, config: DiagnosticsConfig) -> Self {
        Monitor {
            params,
            config,
            dec: None,
            last: None,
            bkm: 0.0,
            majorant: None,
        }
    }

    fn decomposition(&mut self, grid: &Grid) -> DyadicDecomposition {
        match &self.dec {
            Some(d) if d.grid() == grid => d.clone(),
            _ => {
                let d = DyadicDecomposition::new(grid);
                self.dec = Some(d.clone());
                d
            }
        }
    }

    pub fn observe(&mut self, state: &SimState) -> Result<DiagnosticsRecord, DiagnosticsError> {
        let p = self.params;
        let dec = self.decomposition(state.grid());
        let eps = self.config.epsilon;
        let u = state.velocity();
        let tau = state.tau();
        let omega = state.omega();
        let gamma = gamma_of(state, &p);

        let grad_u_linf = state.grad().max_abs();
        let omega_linf = omega.max_abs();
        let gamma_linf = gamma.max_abs();
        let gamma_ok = p.nu == 0.0 && p.variant != Variant::StokesToy;
        let gamma_source_linf = if gamma_ok {
            Some(gamma_source(state, &p)?.max_abs())
        } else {
            None
        };

        if let Some((t0, g0, s0)) = self.last {
            if state.t <= t0 {
                return Err(DiagnosticsError::Unsorted { index: 0 });
            }
            let dt = state.t - t0;
            self.bkm += 0.5 * dt * (g0 + grad_u_linf);
            if let (Some(m), Some(a), Some(b)) = (self.majorant.as_mut(), s0, gamma_source_linf) {
                *m += 0.5 * dt * (a + b);
            }
        } else if gamma_ok {
            self.majorant = Some(gamma_linf);
        }
        self.last = Some((state.t, grad_u_linf, gamma_source_linf));

        let energy_ok = p.variant != Variant::StokesToy && !p.q_active();
        let (energy_identity_residual, enstrophy) = if energy_ok {
            (Some(energy_identity_residual(state, &p)?), Some(enstrophy_balance(state, &p)?))
        } else {
            (None, None)
        };

        let hs_norms: Vec<HsNorm> = self
            .config
            .hs
            .iter()
            .map(|&s| HsNorm {
                s,
                u: vector_sobolev_norm(u, s),
                tau: tensor_sobolev_norm(tau, s),
            })
            .collect();
        let u_log = vector_sobolev_norm(u, self.config.log_sobolev_s);

        Ok(DiagnosticsRecord {
            t: state.t,
            u_l2: u.l2_norm(),
            tau_l2: tau.l2_norm(),
            grad_u_l2: state.grad().l2_norm_sqr().sqrt(),
            grad_tau_l2: grad_tensor_sqr(tau).sqrt(),
            lap_tau_l2: lap_tensor_sqr(tau).sqrt(),
            omega_linf,
            omega_l2: omega.l2_norm(),
            gamma_linf,
            gamma_b0_inf1: dec.besov_norm(&gamma, 0.0, f64::INFINITY, 1.0)?,
            tau_b_eps_inf1: dec.tensor_besov_norm(tau, eps, f64::INFINITY, 1.0)?,
            tau_h2: tensor_sobolev_norm(tau, 2.0),
            grad_u_linf,
            bkm_accum: self.bkm,
            energy_weighted: energy_weighted(state, &p),
            n_value: n_functional(state, &p, self.config.n_weight),
            energy_identity_residual,
            gamma_residual: if gamma_ok { Some(gamma_residual(state, &p)?) } else { None },
            commutator_norm: dec.besov_norm(&commutator_r_advect(u, tau), 0.0, f64::INFINITY, 1.0)?,
            commutator_ratio: commutator_ratio(&dec, u, tau, eps)?,
            gamma_source_linf,
            gamma_majorant: self.majorant,
            bkm_log_ratio: bkm_log_ratio(grad_u_linf, omega_linf, u_log),
            enstrophy_lhs: enstrophy.map(|e| e.lhs),
            enstrophy_majorant: enstrophy.map(|e| e.majorant),
            hs_norms,
        })
    }
}

/// End-of-run digest of a record series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub t_final: f64,
    pub records: usize,
    pub bkm_integral: f64,
    pub damping_rate: f64,
    pub decay_grad_u: Option<DecayFit>,
    pub decay_n: Option<DecayFit>,
    pub final_n: f64,
    pub max_gamma_b0_inf1: f64,
    /// `max_t ‖ω(t)‖_{L∞} / ‖ω₀‖_{L∞}`.
    pub omega_linf_growth: Option<f64>,
    /// `max_t ‖Γ(t)‖_{L∞} / majorant(t)`; at most one when the bound holds.
    pub gamma_majorant_ratio: Option<f64>,
    /// Largest relative increase of the weighted energy between observations.
    pub energy_max_increase: f64,
    pub commutator_constant: Option<f64>,
    pub bkm_log_constant: Option<f64>,
    pub enstrophy_constant: Option<f64>,
    pub max_energy_identity_residual: Option<f64>,
    pub max_gamma_residual: Option<f64>,
}

fn max_option(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.flatten().fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

impl RunSummary {
    pub fn from_records(records: &[DiagnosticsRecord], params: &ModelParams) -> Self {
        let series = |f: &dyn Fn(&DiagnosticsRecord) -> f64| -> Vec<(f64, f64)> {
            records.iter().map(|r| (r.t, f(r))).collect()
        };
        let first = records.first();
        let omega0 = first.map_or(0.0, |r| r.omega_linf);
        RunSummary {
            t_final: records.last().map_or(0.0, |r| r.t),
            records: records.len(),
            bkm_integral: records.last().map_or(0.0, |r| r.bkm_accum),
            damping_rate: params.damping_rate(),
            decay_grad_u: decay_fit(&series(&|r| r.grad_u_l2)).ok(),
            decay_n: decay_fit(&series(&|r| r.n_value)).ok(),
            final_n: records.last().map_or(0.0, |r| r.n_value),
            max_gamma_b0_inf1: records.iter().map(|r| r.gamma_b0_inf1).fold(0.0, f64::max),
            omega_linf_growth: (omega0 > 0.0)
                .then(|| records.iter().map(|r| r.omega_linf).fold(0.0, f64::max) / omega0),
            gamma_majorant_ratio: max_option(records.iter().map(|r| {
                r.gamma_majorant.map(|m| if m > 0.0 { r.gamma_linf / m } else { 0.0 })
            })),
            energy_max_increase: records
                .windows(2)
                .map(|w| (w[1].energy_weighted - w[0].energy_weighted) / w[0].energy_weighted.abs().max(1e-300))
                .fold(0.0, f64::max),
            commutator_constant: max_option(records.iter().map(|r| r.commutator_ratio)),
            bkm_log_constant: max_option(records.iter().map(|r| r.bkm_log_ratio)),
            enstrophy_constant: max_option(records.iter().map(|r| {
                match (r.enstrophy_lhs, r.enstrophy_majorant) {
                    (Some(l), Some(m)) => EnstrophyBalance { lhs: l, majorant: m }.constant(),
                    _ => None,
                }
            })),
            max_energy_identity_residual: max_option(records.iter().map(|r| r.energy_identity_residual)),
            max_gamma_residual: max_option(records.iter().map(|r| r.gamma_residual)),
        }
    }
}

/// True when `v` is nonincreasing from the first sample with `t ≥ t_from`,
/// allowing a relative slack `tol` per step.
pub fn nonincreasing_after(series: &[(f64, f64)], t_from: f64, tol: f64) -> bool {
    let tail: Vec<_> = series.iter().filter(|p| p.0 >= t_from).collect();
    tail.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + tol))
}
