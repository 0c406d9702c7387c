use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use elsim::verify::VerifyOptions;
use elsim::ModelParams;
use elsim_cli::commands::{
    cmd_dim_estimate, cmd_mms, cmd_phi_scan, cmd_run, cmd_verify, output_dir, CliError, ScanRequest,
};
use elsim_cli::config::{default_threshold, parse_discretization};

/// Ericksen–Leslie liquid crystal solver and diagnostics.
#[derive(Parser)]
#[command(name = "elsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML config.
    Run { config: PathBuf },
    /// Check the tensor, potential and mollifier identities.
    Verify {
        /// Fewer random samples.
        #[arg(long)]
        quick: bool,
        /// Evaluate the cancellation with the transport term negated.
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
    },
    /// Manufactured-solution convergence study.
    Mms {
        #[arg(long, value_delimiter = ',', default_values_t = vec![16usize, 32, 64])]
        resolutions: Vec<usize>,
        #[arg(long, default_value = "fd2")]
        discretization: String,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.04, 0.02, 0.01, 0.005])]
        dts: Vec<f64>,
    },
    /// Scan Φ over a contiguous window of snapshots.
    PhiScan {
        /// Glob pattern selecting snapshot files.
        snapshots: String,
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[arg(long, default_value_t = default_threshold())]
        threshold: f64,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value = "spectral")]
        discretization: String,
        #[arg(long, default_value_t = 2.0)]
        pressure_exponent: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parabolic box-counting dimension of a candidate set.
    DimEstimate {
        candidates: PathBuf,
        #[arg(long)]
        r_max: f64,
        #[arg(long)]
        r_min: f64,
        #[arg(long, default_value_t = 8)]
        scales: usize,
    },
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Run { config } => cmd_run(&config, out).map(drop),
        Command::Verify { quick, inject_sign_flip } => {
            let mut opts = VerifyOptions { flip_transport_sign: inject_sign_flip, ..VerifyOptions::default() };
            if quick {
                opts.triples = 10;
                opts.directors = 5;
            }
            cmd_verify(&opts, out).map(drop)
        }
        Command::Mms { resolutions, discretization, dts } => {
            cmd_mms(ModelParams::default(), &resolutions, &discretization, &dts, out).map(drop)
        }
        Command::PhiScan { snapshots, radii, threshold, stride, discretization, pressure_exponent, out: dir } => {
            let req = ScanRequest {
                radii,
                threshold,
                stride,
                discretization: parse_discretization(&discretization)?,
                pressure_exponent,
            };
            cmd_phi_scan(&snapshots, &req, &output_dir(dir), out).map(drop)
        }
        Command::DimEstimate { candidates, r_max, r_min, scales } => {
            cmd_dim_estimate(&candidates, r_max, r_min, scales, out).map(drop)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            if !usage {
                return ExitCode::SUCCESS;
            }
            eprintln!("ELSIM_ERROR code=1 kind=usage detail={}", e.kind());
            return ExitCode::from(1);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
