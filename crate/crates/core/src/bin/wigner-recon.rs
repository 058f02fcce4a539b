use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use wigner_recon::fock::PhaseSpacePoint;
use wigner_recon::pipeline::{
    compare_with_oracle, diff_grids, oracle_grid, read_grid_csv, run_scan, write_grid_csv,
    write_outputs, PipelineError, QuasiProbGrid, ScanConfig,
};

const TOLERANCE_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(
    version,
    about = "Quasiprobability reconstruction of a damped cavity field"
)]
struct Cli {
    /// Worker threads, 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the displacement, decay, probe and reconstruction protocol over a grid.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; overrides `output` in the config. Without either,
        /// the CSV goes to stdout and no sidecar is written.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Label rows with -alpha.
        #[arg(long)]
        reflect_axes: bool,
        /// Compare with the direct evaluation and fail with exit code 3 when
        /// the deviation exceeds the tolerance.
        #[arg(long)]
        check_oracle: bool,
        /// Overrides `oracle_tolerance` from the config.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Direct quasiprobability of the configured state over the configured grid.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        reflect_axes: bool,
    },
    /// Compare the F columns of two grid files.
    Diff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Emit the probe-atom inversion signal W(tau) for one phase-space point.
    ProbeSim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true)]
        im: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn emit(grid: &QuasiProbGrid, reflect: bool, output: Option<PathBuf>) -> Result<(), PipelineError> {
    match output {
        Some(path) => {
            write_outputs(grid, reflect, &path)?;
            info!("wrote {} points to {}", grid.points.len(), path.display());
            Ok(())
        }
        None => write_grid_csv(grid, reflect, io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<u8, PipelineError> {
    match cli.command {
        Command::Scan {
            config,
            output,
            reflect_axes,
            check_oracle,
            tolerance,
        } => {
            let mut cfg = ScanConfig::from_path(&config)?;
            if let Some(tol) = tolerance {
                cfg.oracle_tolerance = tol;
            }
            cfg.reflect_axes |= reflect_axes;
            let grid = run_scan(&cfg)?;
            emit(
                &grid,
                cfg.reflect_axes,
                output.or_else(|| cfg.output.clone()),
            )?;
            if check_oracle {
                let report = compare_with_oracle(&grid, &cfg.initial_state()?)?;
                eprintln!(
                    "max deviation from direct evaluation: {:.3e} at point {} (tolerance {:.1e})",
                    report.max_deviation, report.worst_index, report.tolerance
                );
                if !report.passes() {
                    return Ok(TOLERANCE_FAILURE);
                }
            }
            Ok(0)
        }
        Command::Oracle {
            config,
            output,
            reflect_axes,
        } => {
            let cfg = ScanConfig::from_path(&config)?;
            let grid = oracle_grid(&cfg)?;
            emit(&grid, cfg.reflect_axes || reflect_axes, output)?;
            Ok(0)
        }
        Command::Diff { a, b, tolerance } => {
            let report = diff_grids(&read_grid_csv(&a)?, &read_grid_csv(&b)?)?;
            println!(
                "points: {}  max |dF|: {:.6e}  at row {}",
                report.points, report.max_deviation, report.worst_index
            );
            Ok(if report.max_deviation <= tolerance {
                0
            } else {
                TOLERANCE_FAILURE
            })
        }
        Command::ProbeSim {
            config,
            re,
            im,
            output,
        } => {
            let cfg = ScanConfig::from_path(&config)?;
            let protocol = cfg.protocol()?;
            let signal = protocol
                .probe_signal(PhaseSpacePoint::new(re, im), 0)
                .map_err(PipelineError::Model)?;
            let sink: Box<dyn Write> = match output {
                Some(path) => Box::new(BufWriter::new(std::fs::File::create(path)?)),
                None => Box::new(io::stdout().lock()),
            };
            let mut writer = csv::Writer::from_writer(sink);
            writer.write_record(["tau", "W"])?;
            for (t, w) in signal.tau().iter().zip(signal.values()) {
                writer.write_record([format!("{t:.16e}"), format!("{w:.16e}")])?;
            }
            writer.flush()?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
