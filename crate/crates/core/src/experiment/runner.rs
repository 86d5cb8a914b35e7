use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{DiagnosticsRecord, Monitor, RunSummary};
use crate::par;
use crate::spectral::Grid;
use crate::timestep::{Cadence, Integrator};

use super::config::ExperimentConfig;
use super::initial::make_initial_data;
use super::snapshot::save_snapshot;
use super::ExperimentError;

/// Environment variable that, when set, replaces the working directory as the
/// base of relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "OLDROYD_OUTPUT_ROOT";

pub const DIAGNOSTICS_FILE: &str = "diagnostics.ndjson";
pub const SUMMARY_FILE: &str = "summary.json";
pub const FAILURE_MARKER: &str = "FAILED";
pub const FINAL_SNAPSHOT: &str = "final.bin";

pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    let dir = &config.output.dir;
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
        _ => dir.clone(),
    }
}

pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_{t:.6}.bin")
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub records: Vec<DiagnosticsRecord>,
    pub summary: RunSummary,
}

#[derive(Serialize)]
struct Report<'a> {
    status: &'a str,
    failure: Option<&'a str>,
    #[serde(flatten)]
    summary: &'a RunSummary,
}

fn write_report(dir: &Path, summary: &RunSummary, failure: Option<&str>) -> Result<(), ExperimentError> {
    let report = Report {
        status: if failure.is_some() { "failed" } else { "ok" },
        failure,
        summary,
    };
    let text = serde_json::to_string_pretty(&report).expect("summary serializes");
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, text + "\n").map_err(|e| ExperimentError::io(format!("writing {}", path.display()), e))
}

/// Runs one experiment into [`output_dir`].
///
/// Writes `diagnostics.ndjson` (one record per observation), snapshots at the
/// configured times plus `final.bin`, and `summary.json`. When integration
/// fails the partial diagnostics are kept, a `FAILED` file records the
/// reason, and [`ExperimentError::RunFailed`] is returned.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    run_in(config, &output_dir(config))
}

pub fn run_in(config: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, ExperimentError> {
    config.model.validate()?;
    config
        .time
        .validate()
        .map_err(|e| ExperimentError::Setup(e.to_string()))?;
    fs::create_dir_all(dir)
        .map_err(|e| ExperimentError::Setup(format!("cannot create output directory {}: {e}", dir.display())))?;
    let marker = dir.join(FAILURE_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| ExperimentError::io("removing stale failure marker", e))?;
    }
    fs::write(dir.join("config.txt"), config.to_text())
        .map_err(|e| ExperimentError::Setup(format!("output directory {} is not writable: {e}", dir.display())))?;

    let grid = Grid::new(config.grid.n, config.grid.length)?;
    let state0 = make_initial_data(&config.initial, &grid, &config.model)?;

    let ndjson_path = dir.join(DIAGNOSTICS_FILE);
    let file = File::create(&ndjson_path)
        .map_err(|e| ExperimentError::io(format!("creating {}", ndjson_path.display()), e))?;
    let mut out = BufWriter::new(file);
    let mut monitor = Monitor::new(config.model, config.diagnostics.clone());
    let mut records = Vec::new();
    let params = config.model;
    let snapshot_times = &config.output.snapshot_times;

    let integrator = Integrator::new(config.model, config.time);
    let result = integrator.integrate(state0, Cadence::Interval(config.output.observe_every), |state| {
        let record = monitor.observe(state)?;
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
        out.flush()?;
        records.push(record);
        if snapshot_times.iter().any(|&ts| (ts - state.t).abs() < 1e-9) {
            save_snapshot(state, &params, &dir.join(snapshot_name(state.t)))?;
        }
        Ok(())
    });
    drop(out);

    let summary = RunSummary::from_records(&records, &config.model);
    match result {
        Ok(final_state) => {
            save_snapshot(&final_state, &params, &dir.join(FINAL_SNAPSHOT))?;
            write_report(dir, &summary, None)?;
            Ok(RunOutcome {
                dir: dir.to_path_buf(),
                records,
                summary,
            })
        }
        Err(e) => {
            let message = e.to_string();
            fs::write(&marker, format!("{message}\n"))
                .map_err(|e| ExperimentError::io("writing failure marker", e))?;
            write_report(dir, &summary, Some(&message))?;
            Err(ExperimentError::RunFailed {
                dir: dir.to_path_buf(),
                message,
            })
        }
    }
}

/// One line of a sweep table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub status: String,
    pub final_n: Option<f64>,
    pub decay_rate: Option<f64>,
    pub r_squared: Option<f64>,
    pub max_gamma_b0_inf1: Option<f64>,
    pub damping_rate: f64,
    pub t_final: Option<f64>,
}

/// Sets a swept quantity: any model parameter, or one of `delta`,
/// `amplitude`, `tau_amplitude`, `t_end`.
pub fn apply_parameter(config: &mut ExperimentConfig, name: &str, value: f64) -> bool {
    match name {
        "delta" => config.initial.delta = Some(value),
        "amplitude" => {
            config.initial.amplitude = value;
            config.initial.tau_amplitude = value;
        }
        "tau_amplitude" => config.initial.tau_amplitude = value,
        "t_end" => config.time.t_end = value,
        _ => return config.model.set(name, value),
    }
    true
}

/// Runs the experiment once per value, each in `<dir>/<param>_<index>`, and
/// writes `<dir>/sweep_<param>.csv`. Failing runs are recorded and do not stop
/// the sweep.
pub fn sweep(config: &ExperimentConfig, param: &str, values: &[f64]) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut probe = config.clone();
    if !apply_parameter(&mut probe, param, 0.0) {
        return Err(ExperimentError::Setup(format!(
            "unknown sweep parameter '{param}' (expected nu, mu, K, alpha, beta, b, delta, amplitude, tau_amplitude or t_end)"
        )));
    }
    if values.is_empty() {
        return Err(ExperimentError::Setup("sweep needs at least one value".into()));
    }
    let base = output_dir(config);
    fs::create_dir_all(&base)
        .map_err(|e| ExperimentError::Setup(format!("cannot create output directory {}: {e}", base.display())))?;
    let jobs: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
    let rows = par::map(&jobs, |&(i, value)| {
        let mut c = config.clone();
        apply_parameter(&mut c, param, value);
        let dir = base.join(format!("{param}_{i:03}"));
        let damping_rate = c.model.damping_rate();
        match run_in(&c, &dir) {
            Ok(outcome) => {
                let s = &outcome.summary;
                SweepRow {
                    value,
                    status: "ok".into(),
                    final_n: Some(s.final_n),
                    decay_rate: s.decay_grad_u.map(|f| f.rate),
                    r_squared: s.decay_grad_u.map(|f| f.r_squared),
                    max_gamma_b0_inf1: Some(s.max_gamma_b0_inf1),
                    damping_rate,
                    t_final: Some(s.t_final),
                }
            }
            Err(e) => SweepRow {
                value,
                status: format!("failed: {e}"),
                final_n: None,
                decay_rate: None,
                r_squared: None,
                max_gamma_b0_inf1: None,
                damping_rate,
                t_final: None,
            },
        }
    });
    let path = base.join(format!("sweep_{param}.csv"));
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| ExperimentError::Setup(format!("cannot write {}: {e}", path.display())))?;
    for row in &rows {
        w.serialize(row)
            .map_err(|e| ExperimentError::Setup(format!("cannot write {}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| ExperimentError::io(format!("writing {}", path.display()), e))?;
    Ok(rows)
}
