use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oldroyd_core::experiment::{
    check, load_config, load_snapshot, norms, output_dir, run, sweep, ExperimentError, EXIT_CONFIG_ERROR,
    EXIT_OK, EXIT_RUN_FAILURE,
};

#[derive(Parser)]
#[command(name = "oldroyd", version, about = "Pseudo-spectral experiments for a 2D Oldroyd-B type model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a configuration file.
    Run { config: PathBuf },
    /// Run the invariant battery and print a pass/fail table.
    Check {
        /// Smaller ensembles and grids.
        #[arg(long)]
        quick: bool,
    },
    /// Run an experiment once per value of a parameter.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated list, e.g. `0.1,0.2,0.4`.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
    },
    /// Print norms of the fields stored in a snapshot.
    Norms {
        snapshot: PathBuf,
        /// l1, l2, l4, linf, hs:<s> or besov:<s>,<p>,<r>; repeatable.
        #[arg(long = "norm", required = true)]
        norms: Vec<norms::NormSpec>,
    },
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"))
}

fn execute(cmd: Command) -> Result<i32, ExperimentError> {
    match cmd {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let outcome = run(&cfg)?;
            let s = &outcome.summary;
            println!("output      {}", outcome.dir.display());
            println!("records     {}", outcome.records.len());
            println!("t_final     {}", s.t_final);
            println!("final N     {:.6e}", s.final_n);
            println!("damping     {:.6e}", s.damping_rate);
            println!("max Gamma   {:.6e}", s.max_gamma_b0_inf1);
            if let Some(fit) = &s.decay_n {
                println!("N decay     rate {:.6e}, R^2 {:.4}", fit.rate, fit.r_squared);
            }
            println!("BKM         {:.6e}", s.bkm_integral);
            Ok(EXIT_OK)
        }
        Command::Check { quick } => {
            let results = check::run_checks(&check::CheckOptions {
                quick,
                ..Default::default()
            });
            print!("{}", check::format_table(&results));
            Ok(if results.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_RUN_FAILURE
            })
        }
        Command::Sweep { config, param, values } => {
            let cfg = load_config(&config)?;
            let rows = sweep(&cfg, &param, &values)?;
            println!("{:>14} {:>8} {:>14} {:>14} {:>10}", param, "status", "final N", "decay rate", "R^2");
            for r in &rows {
                println!(
                    "{:>14.6e} {:>8} {:>14} {:>14} {:>10}",
                    r.value,
                    r.status,
                    fmt_opt(r.final_n),
                    fmt_opt(r.decay_rate),
                    r.r_squared.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
                );
            }
            println!("table written to {}", output_dir(&cfg).join(format!("sweep_{param}.csv")).display());
            Ok(if rows.iter().all(|r| r.status == "ok") {
                EXIT_OK
            } else {
                EXIT_RUN_FAILURE
            })
        }
        Command::Norms { snapshot, norms: specs } => {
            let snap = load_snapshot(&snapshot)?;
            let rows = norms::snapshot_norms(&snap, &specs)?;
            println!("snapshot t = {} on a {}x{} grid", snap.t, snap.grid.n(), snap.grid.n());
            print!("{}", norms::format_table(&rows));
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
