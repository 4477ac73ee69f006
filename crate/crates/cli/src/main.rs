use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdyn::oracle::{self, DiagQuery, EllipseQuery};
use qdyn::{compare_runs, init_workers, run_scenario, CliError, RunConfig};
use qdyn_core::{Execution, GaussianPacket, Kinetic, PotentialKind};

#[derive(Parser)]
#[command(name = "qdyn", version, about = "1-D quantum wave-packet propagation benchmarks")]
struct Cli {
    /// Worker threads; overrides QDYN_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario; trailing `--key value` pairs override the config file.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `paper` or `desk`.
        #[arg(long)]
        preset: Option<String>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
        overrides: Vec<String>,
    },
    /// Compare two run directories and write compare.csv.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        /// Report path; defaults to <DIR_A>/compare.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Standalone oracles.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Initial Wigner weight outside the energy ellipse of the background trap.
    Ellipse {
        #[arg(long, default_value_t = 0.1)]
        omega0: f64,
        #[arg(long, default_value_t = 1.0)]
        v0: f64,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        q0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        p0: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
        sigma: f64,
    },
    /// Chebyshev truncation order for the argument a·dt/ħ.
    Bessel {
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 1e-16)]
        cutoff: f64,
        /// Also print every |J_k|.
        #[arg(long)]
        list: bool,
    },
    /// Exact propagation by dense diagonalization.
    Diag {
        #[arg(long, default_value = "barrier")]
        potential: PotentialKind,
        #[arg(long, default_value_t = 128)]
        grid_n: usize,
        #[arg(long, default_value_t = 0.32)]
        dq: f64,
        #[arg(long, default_value_t = 56.0)]
        t: f64,
        #[arg(long, default_value = "threepoint")]
        kinetic: Kinetic,
        /// Write the final density here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    init_workers(cli.threads)?;
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Run { config, preset, overrides } => {
            let cfg = RunConfig::load(config.as_deref(), preset.as_deref(), &overrides)?;
            let summary = run_scenario(&cfg, exec)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("{} rows, {} files in {} ({:.2} s)", summary.rows, summary.files.len(), summary.out_dir.display(), summary.wall_time);
        }
        Command::Compare { dir_a, dir_b, out } => {
            let out = out.unwrap_or_else(|| dir_a.join(qdyn::output::COMPARE));
            let report = compare_runs(&dir_a, &dir_b, &out)?;
            let worst = report.densities.iter().map(|d| d.linf).fold(0.0, f64::max);
            println!("{} snapshots, max density Linf {worst}; report in {}", report.densities.len(), out.display());
        }
        Command::Oracle(OracleCommand::Ellipse { omega0, v0, q0, p0, sigma }) => {
            let packet = GaussianPacket::new(q0, p0, sigma)?;
            println!("{}", oracle::ellipse(&EllipseQuery { omega0, v0, packet }));
        }
        Command::Oracle(OracleCommand::Bessel { x, cutoff, list }) => {
            let (order, coeffs) = oracle::bessel(x, cutoff)?;
            println!("{order}");
            if list {
                for (k, c) in coeffs.iter().enumerate() {
                    println!("{k} {c}");
                }
            }
        }
        Command::Oracle(OracleCommand::Diag { potential, grid_n, dq, t, kinetic, out }) => {
            let r = oracle::diag(&DiagQuery { potential, grid_n, dq, t, kinetic }, out.as_deref())?;
            println!("{}", qdyn::output::TIMESERIES_HEADER);
            println!("{}", qdyn::output::timeseries_row(&r));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
