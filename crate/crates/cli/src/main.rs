//! `oscbath` — command-line front end for the system-bath laboratory.
//!
//! Every subcommand reads a sectioned key-value config, applies flag
//! overrides, and writes either a text report (`check`) or a CSV document
//! with a `#`-prefixed provenance header.
//!
//! Exit codes: 0 success; 1 usage or config error; 2 domain error
//! (unbounded system, no equilibrium state); 3 I/O error.

mod commands;
mod config;
mod csv_out;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CommandIo;
use config::RunConfig;
use oscbath::spectrum::CovarianceKind;

#[derive(Debug)]
pub enum CliError {
    Config(config::ConfigError),
    Usage(String),
    Model(oscbath::Error),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Model(e) => match e {
                oscbath::Error::InvalidParameter(_) | oscbath::Error::Usage(_) => 1,
                oscbath::Error::Structure(_)
                | oscbath::Error::NoEquilibrium(_)
                | oscbath::Error::UnsupportedConfiguration(_) => 2,
            },
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<oscbath::Error> for CliError {
    fn from(e: oscbath::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Path to the run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path (default: the config's output path, else standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured temperature.
    #[arg(long)]
    temperature: Option<f64>,
    /// Override the configured simulated time span.
    #[arg(long)]
    t_max: Option<f64>,
    /// Override the configured time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the configured trajectory count.
    #[arg(long)]
    n_traj: Option<usize>,
}

#[derive(Parser, Debug)]
#[command(name = "oscbath", version, about = "Two oscillators in a common heat bath", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structure report: boundedness, split identity, IO-form verdicts.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Memory kernel on the configured time grid.
    Kernel {
        #[command(flatten)]
        common: Common,
    },
    /// Normal-mode frequencies of the common-bath model.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Equilibrium position covariance.
    Covariance {
        #[command(flatten)]
        common: Common,
        /// Quantum (Wigner) covariance (default).
        #[arg(long, conflicts_with = "classical")]
        quantum: bool,
        /// Classical equipartition covariance.
        #[arg(long)]
        classical: bool,
        /// Tabulate the cross-correlation against a doubling mode count.
        #[arg(long)]
        converge: bool,
    },
    /// Deterministic impulse response from rest.
    Response {
        #[command(flatten)]
        common: Common,
        /// Kick pattern applied at t = 0.
        #[arg(long, default_value = "x1")]
        kick: String,
        /// Impulse magnitude.
        #[arg(long, default_value_t = 1.0)]
        impulse: f64,
    },
    /// Thermal-ensemble correlation functions.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Use the two-body white-noise Langevin model instead of an
        /// explicit bath.
        #[arg(long)]
        white_noise: bool,
        /// Static coupling for the white-noise model (default: the kernel
        /// total of the configured bath).
        #[arg(long, requires = "white_noise")]
        kappa: Option<f64>,
    },
    /// Cross-correlation over a linear parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary: gamma, cutoff or temperature.
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Check { common }
            | Command::Kernel { common }
            | Command::Spectrum { common }
            | Command::Covariance { common, .. }
            | Command::Response { common, .. }
            | Command::Simulate { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }
}

fn load_config(common: &Common) -> Result<(String, RunConfig), CliError> {
    let text = fs::read_to_string(&common.config).map_err(|e| {
        CliError::Usage(format!(
            "cannot read config {}: {e}",
            common.config.display()
        ))
    })?;
    let mut cfg = config::parse(&text)?;
    if let Some(s) = common.seed {
        cfg.sim.seed = s;
    }
    if let Some(t) = common.temperature {
        cfg.sim.temperature = t;
    }
    if let Some(t) = common.t_max {
        cfg.sim.t_max = t;
    }
    if let Some(dt) = common.dt {
        cfg.sim.dt = dt;
    }
    if let Some(n) = common.n_traj {
        cfg.sim.n_traj = n;
    }
    Ok((text, cfg))
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let common = cli.command.common();
    let (text, cfg) = load_config(common)?;

    // Render into memory first so a failed run never leaves a truncated file.
    let mut buffer: Vec<u8> = Vec::new();
    let code = {
        let mut io = CommandIo {
            config_text: &text,
            out: &mut buffer,
        };
        match &cli.command {
            Command::Check { .. } => commands::cmd_check(&cfg, &mut io)?,
            Command::Kernel { .. } => commands::cmd_kernel(&cfg, &mut io)?,
            Command::Spectrum { .. } => commands::cmd_spectrum(&cfg, &mut io)?,
            Command::Covariance {
                classical,
                converge,
                ..
            } => {
                let kind = if *classical {
                    CovarianceKind::Classical
                } else {
                    CovarianceKind::Quantum
                };
                commands::cmd_covariance(&cfg, kind, *converge, &mut io)?
            }
            Command::Response { kick, impulse, .. } => {
                commands::cmd_response(&cfg, kick, *impulse, &mut io)?
            }
            Command::Simulate {
                white_noise, kappa, ..
            } => commands::cmd_simulate(&cfg, *white_noise, *kappa, &mut io)?,
            Command::Sweep {
                param,
                from,
                to,
                steps,
                ..
            } => commands::cmd_sweep(&cfg, param, *from, *to, *steps, &mut io)?,
        }
    };

    let out_path = common
        .out
        .as_ref()
        .map(|p| p.as_os_str().to_owned())
        .or_else(|| cfg.output_path.as_ref().map(Into::into));
    match out_path {
        Some(path) => fs::write(path, &buffer)?,
        None => std::io::stdout().write_all(&buffer)?,
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Keep clap's rendering, but fold argument errors into the
            // usage exit code.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if is_help { 0 } else { 1 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("oscbath: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
