use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod error;
mod run;
mod verify;

use config::{parse_config, Overrides};
use error::CliError;
use run::Artifacts;

/// Sturm–Liouville spectra in impedance form via Neumann series of Bessel functions.
#[derive(Debug, Parser)]
#[command(name = "nsbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in profile: unit, example1 or triangular.
    #[arg(long, global = true)]
    profile: Option<String>,

    #[arg(long = "mesh-points", global = true)]
    mesh_points: Option<usize>,

    /// Number of NSBF coefficients.
    #[arg(long = "N", global = true)]
    order: Option<usize>,

    #[arg(long = "rho-max", global = true)]
    rho_max: Option<f64>,

    #[arg(long = "scan-points", global = true)]
    scan_points: Option<usize>,

    /// dirichlet, neumann, dirichlet-neumann or neumann-dirichlet.
    #[arg(long, global = true)]
    bc: Option<String>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of eigenfunctions to export.
    #[arg(long, global = true)]
    count: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the σ_m coefficient table.
    Coeffs,
    /// Write eigenvalues and norming constants.
    Eigs,
    /// Write eigenvalues and normalized eigenfunctions.
    Eigfun,
    /// Write the Weyl function on a complex grid and along the real axis.
    Weyl,
    /// Run the golden suite.
    Verify,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        profile: cli.profile,
        mesh_points: cli.mesh_points,
        order: cli.order,
        rho_max: cli.rho_max,
        scan_points: cli.scan_points,
        bc: cli.bc,
        out: cli.out.clone(),
        eigenfunction_count: cli.count,
    };
    let cfg = parse_config(cli.config.as_deref(), &overrides)?;
    let manifest = match cli.command {
        Command::Coeffs => run::run_coeffs(&cfg)?,
        Command::Eigs => run::run_eigs(&cfg, false)?,
        Command::Eigfun => run::run_eigs(&cfg, true)?,
        Command::Weyl => run::run_weyl(&cfg)?,
        Command::Verify => {
            let settings = verify::Settings {
                mesh_points: cfg.mesh_points,
                order: cfg.order,
                rho_max: cfg.rho_max,
                scan_points: cfg.scan_points,
            };
            let report = verify::run_suite(&settings)?;
            report.print(io::stdout()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })?;
            if cli.out.is_some() {
                let mut art = Artifacts::new(&cfg.output_dir, "verify");
                art.set("mesh_points_requested", serde_json::json!(cfg.mesh_points));
                art.set("N", serde_json::json!(cfg.order));
                art.set("rho_max", serde_json::json!(cfg.rho_max));
                art.set("scan_points", serde_json::json!(cfg.scan_points));
                art.set("failed", serde_json::json!(report.failed()));
                let mut buf = Vec::new();
                report.write_csv(&mut buf).expect("writing to memory cannot fail");
                art.add("verify_report.csv", buf);
                art.finish()?;
            }
            report.into_result()?;
            return Ok(());
        }
    };
    println!("wrote {}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nsbf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
