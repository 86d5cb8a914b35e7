//! Integrating-factor Runge–Kutta time stepping.
//!
//! The stiff part `νΔω`, `μΔτ − βτ` is diagonal in Fourier space and is
//! integrated exactly through `E(h) = exp(L h)`; the remainder is explicit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{rhs, ModelError, ModelParams, SimState};
use crate::spectral::{Grid, ScalarField, SymTensorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ifrk2,
    Ifrk4,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Ifrk2 => 2,
            Scheme::Ifrk4 => 4,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ifrk2 => "ifrk2",
            Scheme::Ifrk4 => "ifrk4",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ifrk2" => Ok(Scheme::Ifrk2),
            "ifrk4" => Ok(Scheme::Ifrk4),
            other => Err(format!("unknown scheme '{other}' (expected ifrk2 or ifrk4)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub t_end: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            scheme: Scheme::Ifrk4,
            cfl: 0.5,
            dt_max: 1e-2,
            dt_min: 1e-8,
            t_end: 1.0,
        }
    }
}

impl StepConfig {
    /// A configuration that always takes steps of exactly `dt`.
    pub fn fixed(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        StepConfig {
            scheme,
            cfl: 1.0,
            dt_max: dt,
            dt_min: dt,
            t_end,
        }
    }

    pub fn validate(&self) -> Result<(), StepError> {
        let bad = |m: String| Err(StepError::InvalidConfig(m));
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.dt_min > 0.0 && self.dt_min.is_finite()) {
            return bad(format!("dt_min must be positive, got {}", self.dt_min));
        }
        if !(self.dt_max.is_finite() && self.dt_min <= self.dt_max) {
            return bad(format!("need dt_min <= dt_max, got {} > {}", self.dt_min, self.dt_max));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        Ok(())
    }
}

/// When the observer is called during [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cadence {
    /// Every `m` steps.
    Steps(usize),
    /// At `t₀ + jΔ`; steps are shortened to land on these times exactly.
    Interval(f64),
}

/// Additive source `(f_ω, f_τ)` on the right-hand side, used for
/// manufactured solutions.
pub trait Forcing: Sync {
    fn evaluate(&self, t: f64, grid: &Grid) -> (ScalarField, SymTensorField);
}

pub type ObserverError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("integration failed at t = {t}: non-finite values in the state")]
    NonFinite { t: f64 },
    #[error("invalid step configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("observer failed at t = {t}: {source}")]
    Observer { t: f64, source: ObserverError },
}

const VELOCITY_FLOOR: f64 = 1e-8;

/// `clamp(cfl·h / max(‖u‖_∞, 1e-8), dt_min, dt_max)` with `h = L/n`.
pub fn cfl_dt(state: &SimState, config: &StepConfig) -> f64 {
    let h = state.grid().spacing();
    let umax = state.velocity().max_abs().max(VELOCITY_FLOOR);
    (config.cfl * h / umax).clamp(config.dt_min, config.dt_max)
}

/// Advances `state` by one step of size `dt`.
pub fn step(
    state: &SimState,
    dt: f64,
    params: &ModelParams,
    config: &StepConfig,
) -> Result<SimState, StepError> {
    Integrator::new(*params, *config).step(state, dt)
}

/// Runs from `state0` to `config.t_end`, calling `observer` on the initial
/// state, at every cadence tick and on the final state.
pub fn integrate<F>(
    state0: SimState,
    params: &ModelParams,
    config: &StepConfig,
    cadence: Cadence,
    observer: F,
) -> Result<SimState, StepError>
where
    F: FnMut(&SimState) -> Result<(), ObserverError>,
{
    Integrator::new(*params, *config).integrate(state0, cadence, observer)
}

/// Stepper holding the model, the step configuration and an optional forcing.
#[derive(Clone, Copy)]
pub struct Integrator<'a> {
    params: ModelParams,
    config: StepConfig,
    forcing: Option<&'a dyn Forcing>,
}

#[derive(Clone)]
struct Modal {
    w: ScalarField,
    tau: SymTensorField,
}

impl Modal {
    fn axpy(&self, s: f64, other: &Modal) -> Modal {
        Modal {
            w: self.w.axpy(s, &other.w),
            tau: self.tau.axpy(s, &other.tau),
        }
    }

    fn propagate(&self, f: &Propagator) -> Modal {
        let ew = &f.omega;
        let et = &f.tau;
        Modal {
            w: self.w.map_modes(|i, v| v * ew[i]),
            tau: self.tau.map(|c| c.map_modes(|i, v| v * et[i])),
        }
    }
}

/// Per-mode factors `exp(L h)`.
struct Propagator {
    omega: Vec<f64>,
    tau: Vec<f64>,
}

impl Propagator {
    fn new(grid: &Grid, params: &ModelParams, h: f64) -> Self {
        let ksq: Vec<f64> = (0..grid.len()).map(|i| grid.k_squared(i)).collect();
        Propagator {
            omega: ksq.iter().map(|k| (-params.nu * k * h).exp()).collect(),
            tau: ksq.iter().map(|k| (-(params.beta + params.mu * k) * h).exp()).collect(),
        }
    }
}

impl<'a> Integrator<'a> {
    pub fn new(params: ModelParams, config: StepConfig) -> Self {
        Integrator {
            params,
            config,
            forcing: None,
        }
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &StepConfig {
        &self.config
    }

    fn explicit(&self, state: &SimState) -> Modal {
        let d = rhs(state, &self.params);
        let mut out = Modal {
            w: d.explicit_omega,
            tau: d.explicit_tau,
        };
        if let Some(f) = self.forcing {
            let (fw, ft) = f.evaluate(state.t, state.grid());
            out.w = (&out.w + &fw).without_mean();
            out.tau = out.tau.add(&ft);
        }
        out
    }

    fn assemble(&self, t: f64, m: Modal) -> Result<SimState, StepError> {
        if !(m.w.is_finite() && m.tau.is_finite()) {
            return Err(StepError::NonFinite { t });
        }
        Ok(SimState::for_variant(t, m.w, m.tau, self.params.variant)?)
    }

    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState, StepError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(StepError::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        let t = state.t;
        let u0 = Modal {
            w: state.omega().clone(),
            tau: state.tau().clone(),
        };
        let full = Propagator::new(state.grid(), &self.params, dt);
        let next = match self.config.scheme {
            Scheme::Ifrk2 => {
                let a = self.explicit(state);
                let s1 = self.assemble(t + dt, u0.axpy(dt, &a).propagate(&full))?;
                let b = self.explicit(&s1);
                u0.axpy(0.5 * dt, &a).propagate(&full).axpy(0.5 * dt, &b)
            }
            Scheme::Ifrk4 => {
                let half = Propagator::new(state.grid(), &self.params, 0.5 * dt);
                let a = self.explicit(state);
                let s2 = self.assemble(t + 0.5 * dt, u0.axpy(0.5 * dt, &a).propagate(&half))?;
                let b = self.explicit(&s2);
                let u0_half = u0.propagate(&half);
                let s3 = self.assemble(t + 0.5 * dt, u0_half.axpy(0.5 * dt, &b))?;
                let c = self.explicit(&s3);
                let s4 = self.assemble(t + dt, u0_half.axpy(dt, &c).propagate(&half))?;
                let d = self.explicit(&s4);
                let mid = b.axpy(1.0, &c).propagate(&half);
                let combo = a.propagate(&full).axpy(2.0, &mid).axpy(1.0, &d);
                u0.propagate(&full).axpy(dt / 6.0, &combo)
            }
        };
        self.assemble(t + dt, next)
    }

    pub fn integrate<F>(
        &self,
        state0: SimState,
        cadence: Cadence,
        mut observer: F,
    ) -> Result<SimState, StepError>
    where
        F: FnMut(&SimState) -> Result<(), ObserverError>,
    {
        self.config.validate()?;
        self.params.validate()?;
        match cadence {
            Cadence::Steps(0) => return Err(StepError::InvalidConfig("observation step count must be positive".into())),
            Cadence::Interval(d) if !(d > 0.0 && d.is_finite()) => {
                return Err(StepError::InvalidConfig(format!("observation interval must be positive, got {d}")))
            }
            _ => {}
        }
        let t0 = state0.t;
        let t_end = self.config.t_end;
        if t_end < t0 {
            return Err(StepError::InvalidConfig(format!("t_end = {t_end} precedes the initial time {t0}")));
        }
        let eps = 1e-12 * t_end.abs().max(1.0);
        let mut notify = |s: &SimState| observer(s).map_err(|source| StepError::Observer { t: s.t, source });

        let mut state = state0;
        notify(&state)?;
        let mut steps = 0usize;
        let mut next_tick = 1u64;
        let mut observed_last = true;
        while state.t < t_end - eps {
            let mut dt = cfl_dt(&state, &self.config);
            let mut target = t_end;
            if let Cadence::Interval(d) = cadence {
                target = target.min(t0 + next_tick as f64 * d);
            }
            let landing = state.t + dt >= target - eps;
            if landing {
                dt = target - state.t;
            }
            state = self.step(&state, dt)?;
            steps += 1;
            if landing {
                state.t = target;
            }
            observed_last = false;
            match cadence {
                Cadence::Steps(m) if steps.is_multiple_of(m) => {
                    notify(&state)?;
                    observed_last = true;
                }
                Cadence::Interval(d) if landing && (target - (t0 + next_tick as f64 * d)).abs() <= eps => {
                    next_tick += 1;
                    notify(&state)?;
                    observed_last = true;
                }
                _ => {}
            }
        }
        if !observed_last {
            notify(&state)?;
        }
        Ok(state)
    }
}
