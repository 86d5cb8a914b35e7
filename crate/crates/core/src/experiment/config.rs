//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! [grid]
//! n = 128
//! length = 2pi
//!
//! [model]
//! variant = q_zero
//! mu = 1.0
//! ```
//!
//! Every key belongs to a section. Values are numbers (`2pi`, `0.5pi` and
//! `pi` are accepted for lengths), booleans, bare words, or comma-separated
//! number lists. Errors carry the line they refer to; all errors of a file
//! are reported together.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsConfig;
use crate::model::{ModelParams, Variant};
use crate::timestep::{Scheme, StepConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    /// `ω = 2A cos κx cos κy`, `u = A(−cos κx sin κy, sin κx cos κy)`;
    /// `τ₁₁ = A_τ cos 2κx`, `τ₁₂ = A_τ sin κx sin κy`, `τ₂₂ = −A_τ cos 2κy`
    /// with `κ = 2π/L`.
    TaylorGreen,
    /// Seeded Gaussian coefficients on `k_lo ≤ |k| ≤ k_hi`; `A` and `A_τ` are
    /// the root-mean-square values of `ω` and of each stress component.
    RandomBandLimited,
    /// `ω = A cos(κ k·x)`, `τ₁₂ = A_τ cos(κ k·x)` for the configured `k`.
    SingleMode,
    /// State read from a snapshot file.
    FromSnapshot,
}

impl InitialKind {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "taylor_green" => Ok(InitialKind::TaylorGreen),
            "random_band_limited" => Ok(InitialKind::RandomBandLimited),
            "single_mode" => Ok(InitialKind::SingleMode),
            "from_snapshot" => Ok(InitialKind::FromSnapshot),
            other => Err(format!(
                "unknown initial kind '{other}' (expected taylor_green, random_band_limited, single_mode or from_snapshot)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialSpec {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub tau_amplitude: f64,
    /// When set, the state is rescaled so that
    /// `‖(u,τ)‖_{H¹} + ‖ω‖_{B⁰∞,1} + ‖τ‖_{B⁰∞,1} = δ`.
    pub delta: Option<f64>,
    pub k_lo: u32,
    pub k_hi: u32,
    pub seed: Option<u64>,
    pub mode: (i64, i64),
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub observe_every: f64,
    pub snapshot_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub model: ModelParams,
    pub time: StepConfig,
    pub initial: InitialSpec,
    pub output: OutputSpec,
    pub diagnostics: DiagnosticsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: GridSpec { n: 64, length: 2.0 * PI },
            model: ModelParams::default(),
            time: StepConfig::default(),
            initial: InitialSpec {
                kind: InitialKind::TaylorGreen,
                amplitude: 1.0,
                tau_amplitude: 1.0,
                delta: None,
                k_lo: 1,
                k_hi: 4,
                seed: None,
                mode: (1, 0),
                path: None,
            },
            output: OutputSpec {
                dir: PathBuf::from("output"),
                observe_every: 0.1,
                snapshot_times: Vec::new(),
            },
            diagnostics: DiagnosticsConfig::default(),
        }
    }
}

/// One problem in a configuration file; `line` is 1-based, 0 when the problem
/// is not tied to a line.
#[derive(Clone, Debug, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub errors: Vec<LineError>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if e.line > 0 {
                write!(f, "line {}: {}", e.line, e.message)?;
            } else {
                write!(f, "{}", e.message)?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["n", "length"]),
    ("model", &["variant", "nu", "mu", "K", "alpha", "beta", "b", "q_enabled"]),
    ("time", &["scheme", "cfl", "dt_max", "dt_min", "t_end"]),
    (
        "initial",
        &["kind", "amplitude", "tau_amplitude", "delta", "k_lo", "k_hi", "seed", "mode", "path"],
    ),
    ("output", &["dir", "observe_every", "snapshot_times"]),
    ("diagnostics", &["epsilon", "hs", "n_weight", "log_sobolev_s"]),
];

struct Entry {
    line: usize,
    value: String,
}

struct Parser {
    entries: BTreeMap<(String, String), Entry>,
    errors: Vec<LineError>,
}

fn parse_number(s: &str) -> Option<f64> {
    let t = s.trim();
    let v = if t == "pi" {
        PI
    } else if let Some(head) = t.strip_suffix("pi") {
        head.trim().parse::<f64>().ok()? * PI
    } else {
        t.parse::<f64>().ok()?
    };
    v.is_finite().then_some(v)
}

impl Parser {
    fn scan(text: &str) -> Self {
        let mut p = Parser {
            entries: BTreeMap::new(),
            errors: Vec::new(),
        };
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    p.error(line, format!("malformed section header '{content}'"));
                    continue;
                };
                let name = name.trim();
                if KEYS.iter().any(|(s, _)| *s == name) {
                    section = Some(name.to_string());
                } else {
                    p.error(line, format!("unknown section [{name}]"));
                    section = None;
                }
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                p.error(line, format!("expected 'key = value', found '{content}'"));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = section.clone() else {
                p.error(line, format!("key '{key}' outside of any known section"));
                continue;
            };
            let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                p.error(line, format!("unknown key '{key}' in [{sec}]"));
                continue;
            }
            if value.is_empty() {
                p.error(line, format!("missing value for '{key}'"));
                continue;
            }
            let slot = (sec.clone(), key.to_string());
            if let Some(prev) = p.entries.get(&slot) {
                let msg = format!("duplicate key '{key}' in [{sec}] (first set on line {})", prev.line);
                p.error(line, msg);
                continue;
            }
            p.entries.insert(
                slot,
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        p
    }

    fn error(&mut self, line: usize, message: String) {
        self.errors.push(LineError { line, message });
    }

    fn line_of(&self, sec: &str, key: &str) -> usize {
        self.entries
            .get(&(sec.to_string(), key.to_string()))
            .map_or(0, |e| e.line)
    }

    fn typed<T>(&mut self, sec: &str, key: &str, what: &str, conv: impl Fn(&str) -> Option<T>) -> Option<T> {
        let (line, value) = {
            let e = self.entries.get(&(sec.to_string(), key.to_string()))?;
            (e.line, e.value.clone())
        };
        match conv(&value) {
            Some(v) => Some(v),
            None => {
                self.error(line, format!("'{key}' expects {what}, found '{value}'"));
                None
            }
        }
    }

    fn number(&mut self, sec: &str, key: &str) -> Option<f64> {
        self.typed(sec, key, "a number", parse_number)
    }

    fn integer(&mut self, sec: &str, key: &str) -> Option<u64> {
        self.typed(sec, key, "a nonnegative integer", |s| s.parse::<u64>().ok())
    }

    fn boolean(&mut self, sec: &str, key: &str) -> Option<bool> {
        self.typed(sec, key, "true or false", |s| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    fn word(&mut self, sec: &str, key: &str) -> Option<String> {
        self.typed(sec, key, "a value", |s| Some(s.to_string()))
    }

    fn number_list(&mut self, sec: &str, key: &str) -> Option<Vec<f64>> {
        self.typed(sec, key, "a comma-separated list of numbers", |s| {
            s.split(',').map(parse_number).collect::<Option<Vec<_>>>()
        })
    }

    fn check(&mut self, ok: bool, sec: &str, key: &str, message: impl Into<String>) {
        if !ok {
            let line = self.line_of(sec, key);
            self.error(line, message.into());
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut p = Parser::scan(text);
    let mut c = ExperimentConfig::default();

    if let Some(n) = p.integer("grid", "n") {
        c.grid.n = n as usize;
    }
    if let Some(l) = p.number("grid", "length") {
        c.grid.length = l;
    }
    let n = c.grid.n;
    p.check(n >= 8 && n % 2 == 0, "grid", "n", format!("n must be even and at least 8, got {n}"));
    p.check(c.grid.length > 0.0, "grid", "length", "length must be positive");

    if let Some(v) = p.word("model", "variant") {
        match v.parse::<Variant>() {
            Ok(v) => c.model.variant = v,
            Err(e) => {
                let line = p.line_of("model", "variant");
                p.error(line, e);
            }
        }
    }
    for (key, slot) in [
        ("nu", &mut c.model.nu),
        ("mu", &mut c.model.mu),
        ("K", &mut c.model.coupling),
        ("alpha", &mut c.model.alpha),
        ("beta", &mut c.model.beta),
        ("b", &mut c.model.slip),
    ] {
        if let Some(v) = p.number("model", key) {
            *slot = v;
        }
    }
    if let Some(q) = p.boolean("model", "q_enabled") {
        c.model.q_enabled = q;
    } else if c.model.variant == Variant::Full && p.line_of("model", "q_enabled") == 0 {
        c.model.q_enabled = true;
    }
    let m = c.model;
    p.check(m.nu >= 0.0, "model", "nu", format!("constraint nu >= 0 violated (nu = {})", m.nu));
    if m.variant == Variant::StokesToy {
        p.check(m.mu >= 0.0, "model", "mu", format!("constraint mu >= 0 violated (mu = {})", m.mu));
    } else {
        p.check(
            m.mu > 0.0,
            "model",
            "mu",
            format!("constraint mu > 0 violated for the {} variant (mu = {})", m.variant, m.mu),
        );
    }
    p.check(m.coupling >= 0.0, "model", "K", format!("constraint K >= 0 violated (K = {})", m.coupling));
    p.check(m.beta >= 0.0, "model", "beta", format!("constraint beta >= 0 violated (beta = {})", m.beta));
    p.check(
        (-1.0..=1.0).contains(&m.slip),
        "model",
        "b",
        format!("constraint -1 <= b <= 1 violated (b = {})", m.slip),
    );
    p.check(
        !(m.variant == Variant::QZero && m.q_enabled),
        "model",
        "q_enabled",
        "the q_zero variant requires q_enabled = false",
    );

    if let Some(s) = p.word("time", "scheme") {
        match s.parse::<Scheme>() {
            Ok(s) => c.time.scheme = s,
            Err(e) => {
                let line = p.line_of("time", "scheme");
                p.error(line, e);
            }
        }
    }
    for (key, slot) in [
        ("cfl", &mut c.time.cfl),
        ("dt_max", &mut c.time.dt_max),
        ("dt_min", &mut c.time.dt_min),
        ("t_end", &mut c.time.t_end),
    ] {
        if let Some(v) = p.number("time", key) {
            *slot = v;
        }
    }
    let t = c.time;
    p.check(t.cfl > 0.0 && t.cfl <= 1.0, "time", "cfl", format!("constraint 0 < cfl <= 1 violated (cfl = {})", t.cfl));
    p.check(t.dt_min > 0.0, "time", "dt_min", "dt_min must be positive");
    p.check(
        t.dt_min <= t.dt_max,
        "time",
        "dt_max",
        format!("constraint dt_min <= dt_max violated ({} > {})", t.dt_min, t.dt_max),
    );
    p.check(t.t_end >= 0.0, "time", "t_end", "t_end must be nonnegative");

    if let Some(k) = p.word("initial", "kind") {
        match InitialKind::parse(&k) {
            Ok(k) => c.initial.kind = k,
            Err(e) => {
                let line = p.line_of("initial", "kind");
                p.error(line, e);
            }
        }
    }
    if let Some(a) = p.number("initial", "amplitude") {
        c.initial.amplitude = a;
        c.initial.tau_amplitude = a;
    }
    if let Some(a) = p.number("initial", "tau_amplitude") {
        c.initial.tau_amplitude = a;
    }
    c.initial.delta = p.number("initial", "delta");
    if let Some(d) = c.initial.delta {
        p.check(d >= 0.0, "initial", "delta", "delta must be nonnegative");
    }
    if let Some(k) = p.integer("initial", "k_lo") {
        c.initial.k_lo = k as u32;
    }
    if let Some(k) = p.integer("initial", "k_hi") {
        c.initial.k_hi = k as u32;
    }
    c.initial.seed = p.integer("initial", "seed");
    if let Some(mode) = p.typed("initial", "mode", "two integers 'k1, k2'", |s| {
        let parts: Vec<_> = s.split(',').map(|x| x.trim().parse::<i64>().ok()).collect();
        match parts.as_slice() {
            [Some(a), Some(b)] => Some((*a, *b)),
            _ => None,
        }
    }) {
        c.initial.mode = mode;
    }
    c.initial.path = p.word("initial", "path").map(PathBuf::from);
    let init = c.initial.clone();
    match init.kind {
        InitialKind::RandomBandLimited => {
            p.check(
                init.seed.is_some(),
                "initial",
                "kind",
                "random_band_limited initial data requires a seed",
            );
            p.check(
                init.k_lo <= init.k_hi,
                "initial",
                "k_hi",
                format!("constraint k_lo <= k_hi violated ({} > {})", init.k_lo, init.k_hi),
            );
            let cutoff = (n.saturating_sub(1) / 3) as u32;
            p.check(
                init.k_hi <= cutoff,
                "initial",
                "k_hi",
                format!("band limit k_hi = {} exceeds the dealias cutoff {cutoff} of n = {n}", init.k_hi),
            );
        }
        InitialKind::SingleMode => {
            let cutoff = (n.saturating_sub(1) / 3) as i64;
            p.check(
                init.mode != (0, 0),
                "initial",
                "mode",
                "single_mode needs a nonzero wavevector",
            );
            p.check(
                init.mode.0.abs() <= cutoff && init.mode.1.abs() <= cutoff,
                "initial",
                "mode",
                format!("mode {:?} exceeds the dealias cutoff {cutoff} of n = {n}", init.mode),
            );
        }
        InitialKind::FromSnapshot => {
            p.check(init.path.is_some(), "initial", "kind", "from_snapshot initial data requires a path");
        }
        InitialKind::TaylorGreen => {}
    }

    if let Some(d) = p.word("output", "dir") {
        c.output.dir = PathBuf::from(d);
    }
    if let Some(v) = p.number("output", "observe_every") {
        c.output.observe_every = v;
    }
    p.check(c.output.observe_every > 0.0, "output", "observe_every", "observe_every must be positive");
    if let Some(list) = p.number_list("output", "snapshot_times") {
        let every = c.output.observe_every;
        for &ts in &list {
            let ticks = ts / every;
            let on_tick = (ticks - ticks.round()).abs() < 1e-9 || (ts - c.time.t_end).abs() < 1e-12;
            p.check(
                ts >= 0.0 && ts <= c.time.t_end && on_tick,
                "output",
                "snapshot_times",
                format!("snapshot time {ts} must lie in [0, t_end] on a multiple of observe_every or at t_end"),
            );
        }
        c.output.snapshot_times = list;
    }

    if let Some(e) = p.number("diagnostics", "epsilon") {
        c.diagnostics.epsilon = e;
    }
    let eps = c.diagnostics.epsilon;
    p.check(
        eps > 0.0 && eps < 1.0,
        "diagnostics",
        "epsilon",
        format!("constraint 0 < epsilon < 1 violated (epsilon = {eps})"),
    );
    if let Some(hs) = p.number_list("diagnostics", "hs") {
        c.diagnostics.hs = hs;
    }
    if let Some(m) = p.number("diagnostics", "n_weight") {
        c.diagnostics.n_weight = m;
    }
    p.check(c.diagnostics.n_weight > 0.0, "diagnostics", "n_weight", "n_weight must be positive");
    if let Some(s) = p.number("diagnostics", "log_sobolev_s") {
        c.diagnostics.log_sobolev_s = s;
    }

    if p.errors.is_empty() {
        Ok(c)
    } else {
        p.errors.sort_by_key(|e| e.line);
        Err(ConfigError { errors: p.errors })
    }
}

/// Reads and parses a configuration file. A relative snapshot path is taken
/// relative to the file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        errors: vec![LineError {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        }],
    })?;
    let mut c = parse_config(&text)?;
    if let (Some(p), Some(base)) = (c.initial.path.as_ref(), path.parent()) {
        if p.is_relative() {
            c.initial.path = Some(base.join(p));
        }
    }
    Ok(c)
}

impl ExperimentConfig {
    /// Renders the configuration back into the text format.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let t = &self.time;
        let i = &self.initial;
        let o = &self.output;
        let d = &self.diagnostics;
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let kind = match i.kind {
            InitialKind::TaylorGreen => "taylor_green",
            InitialKind::RandomBandLimited => "random_band_limited",
            InitialKind::SingleMode => "single_mode",
            InitialKind::FromSnapshot => "from_snapshot",
        };
        let mut s = format!(
            "[grid]\nn = {}\nlength = {:?}\n\n[model]\nvariant = {}\nnu = {:?}\nmu = {:?}\nK = {:?}\nalpha = {:?}\nbeta = {:?}\nb = {:?}\nq_enabled = {}\n\n[time]\nscheme = {}\ncfl = {:?}\ndt_max = {:?}\ndt_min = {:?}\nt_end = {:?}\n\n[initial]\nkind = {kind}\namplitude = {:?}\ntau_amplitude = {:?}\nk_lo = {}\nk_hi = {}\nmode = {}, {}\n",
            self.grid.n,
            self.grid.length,
            m.variant,
            m.nu,
            m.mu,
            m.coupling,
            m.alpha,
            m.beta,
            m.slip,
            m.q_enabled,
            t.scheme,
            t.cfl,
            t.dt_max,
            t.dt_min,
            t.t_end,
            i.amplitude,
            i.tau_amplitude,
            i.k_lo,
            i.k_hi,
            i.mode.0,
            i.mode.1,
        );
        if let Some(dl) = i.delta {
            s += &format!("delta = {dl:?}\n");
        }
        if let Some(seed) = i.seed {
            s += &format!("seed = {seed}\n");
        }
        if let Some(p) = &i.path {
            s += &format!("path = {}\n", p.display());
        }
        s += &format!("\n[output]\ndir = {}\nobserve_every = {:?}\n", o.dir.display(), o.observe_every);
        if !o.snapshot_times.is_empty() {
            s += &format!("snapshot_times = {}\n", list(&o.snapshot_times));
        }
        s += &format!(
            "\n[diagnostics]\nepsilon = {:?}\nhs = {}\nn_weight = {:?}\nlog_sobolev_s = {:?}\n",
            d.epsilon,
            list(&d.hs),
            d.n_weight,
            d.log_sobolev_s
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
        let c = parse_config("# only a comment\n\n[grid]\nn = 32\n").unwrap();
        assert_eq!(c.grid.n, 32);
        assert_eq!(c.model, ModelParams::default());
    }

    #[test]
    fn full_config() {
        let text = "\
[grid]
n = 128
length = 2pi

[model]
variant = full
mu = 2.0    # diffusivity
K = 1
alpha = 1
beta = 0.1
b = -0.5

[time]
scheme = ifrk2
cfl = 0.4
t_end = 20

[initial]
kind = random_band_limited
delta = 0.05
k_lo = 1
k_hi = 6
seed = 42

[output]
dir = runs/b
observe_every = 0.5
snapshot_times = 0, 10, 20

[diagnostics]
epsilon = 0.25
hs = 1, 2.5
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.grid.length, 2.0 * PI);
        assert_eq!(c.model.variant, Variant::Full);
        assert!(c.model.q_enabled);
        assert_eq!(c.model.slip, -0.5);
        assert_eq!(c.time.scheme, Scheme::Ifrk2);
        assert_eq!(c.initial.seed, Some(42));
        assert_eq!(c.initial.delta, Some(0.05));
        assert_eq!(c.output.snapshot_times, vec![0.0, 10.0, 20.0]);
        assert_eq!(c.diagnostics.hs, vec![1.0, 2.5]);
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }

    fn first_error(text: &str) -> LineError {
        parse_config(text).unwrap_err().errors.remove(0)
    }

    #[test]
    fn constraint_errors_name_line_and_constraint() {
        let e = first_error("[model]\nvariant = q_zero\nmu = -1\n");
        assert_eq!(e.line, 3);
        assert!(e.message.contains("mu > 0"), "{}", e.message);
    }

    #[test]
    fn structural_errors() {
        let e = first_error("[grid]\nn = 32\nn = 64\n");
        assert_eq!(e.line, 3);
        assert!(e.message.contains("duplicate"));

        let e = first_error("[grid]\nwidth = 3\n");
        assert_eq!(e.line, 2);
        assert!(e.message.contains("unknown key"));

        let e = first_error("[grid]\nn = many\n");
        assert!(e.message.contains("expects"));

        let e = first_error("n = 32\n");
        assert!(e.message.contains("outside"));

        let e = first_error("[mesh]\n");
        assert!(e.message.contains("unknown section"));

        let e = first_error("[model]\nq_enabled = yes\n");
        assert!(e.message.contains("true or false"));
    }

    #[test]
    fn random_data_needs_seed_and_band() {
        let e = first_error("[initial]\nkind = random_band_limited\n");
        assert!(e.message.contains("seed"));
        let e = first_error("[grid]\nn = 16\n[initial]\nkind = random_band_limited\nseed = 1\nk_hi = 9\n");
        assert_eq!(e.line, 6);
        assert!(e.message.contains("dealias"));
    }

    #[test]
    fn all_errors_reported() {
        let err = parse_config("[model]\nmu = -1\nbeta = -2\n[time]\ncfl = 3\n").unwrap_err();
        let lines: Vec<_> = err.errors.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![2, 3, 5]);
        assert!(err.to_string().starts_with("line 2:"));
    }

    #[test]
    fn snapshot_times_must_hit_observations() {
        let e = first_error("[time]\nt_end = 1\n[output]\nobserve_every = 0.1\nsnapshot_times = 0.25\n");
        assert_eq!(e.line, 5);
    }
}
