use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sme_cli::{
    cmd_compare_ols, cmd_estimate, cmd_kernel_info, cmd_mc_rootn, cmd_mc_supnorm, cmd_simulate,
    cmd_sweep, BandwidthChoice, CliError, Overrides, RunConfig, Settings,
};

/// Smooth-and-match parameter estimation for ODE systems.
#[derive(Parser)]
#[command(name = "sme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat JSON run configuration; flags given here take precedence.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Smoothing bandwidth, or `sweep` to select it by trajectory RSS.
    #[arg(long, value_name = "X")]
    bandwidth: Option<BandwidthChoice>,
    /// Builtin system name or path to a polynomial system JSON file.
    #[arg(long, value_name = "NAME")]
    system: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate noisy observations of a system.
    Simulate(Common),
    /// Estimate parameters from an observation CSV.
    Estimate {
        #[command(flatten)]
        common: Common,
        data: Option<PathBuf>,
    },
    /// Run the smooth-and-match estimator and trajectory least squares side by side.
    CompareOls {
        #[command(flatten)]
        common: Common,
        data: Option<PathBuf>,
        /// Iteration budget per Nelder-Mead run of the least-squares fit.
        #[arg(long, value_name = "N")]
        ols_max_iter: Option<usize>,
    },
    /// Select the bandwidth by trajectory residual sum of squares.
    Sweep {
        #[command(flatten)]
        common: Common,
        data: Option<PathBuf>,
    },
    /// Monte Carlo study of root-n consistency (exponential system by default).
    McRootn {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "N")]
        replications: Option<usize>,
    },
    /// Monte Carlo study of sup-norm errors of the kernel smoother.
    McSupnorm {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "N")]
        replications: Option<usize>,
    },
    /// Print kernel moments.
    KernelInfo(Common),
}

fn settings(common: Common, extra: Overrides, default_system: &str) -> Result<Settings, CliError> {
    let config = match &common.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    let flags = Overrides {
        system: common.system,
        seed: common.seed,
        out: common.out,
        bandwidth: common.bandwidth,
        ..extra
    };
    Settings::new(config, flags, default_system)
}

fn run(cli: Cli) -> Result<String, CliError> {
    const LV: &str = "lotka-volterra";
    match cli.command {
        Command::Simulate(c) => cmd_simulate(&settings(c, Overrides::default(), LV)?),
        Command::Estimate { common, data } => cmd_estimate(&settings(
            common,
            Overrides {
                data,
                ..Default::default()
            },
            LV,
        )?),
        Command::CompareOls {
            common,
            data,
            ols_max_iter,
        } => {
            let extra = Overrides {
                data,
                ols_max_iter,
                ..Default::default()
            };
            cmd_compare_ols(&settings(common, extra, LV)?)
        }
        Command::Sweep { common, data } => cmd_sweep(&settings(
            common,
            Overrides {
                data,
                ..Default::default()
            },
            LV,
        )?),
        Command::McRootn {
            common,
            replications,
        } => {
            let extra = Overrides {
                replications,
                ..Default::default()
            };
            cmd_mc_rootn(&settings(common, extra, "exponential")?)
        }
        Command::McSupnorm {
            common,
            replications,
        } => {
            let extra = Overrides {
                replications,
                ..Default::default()
            };
            cmd_mc_supnorm(&settings(common, extra, "exponential")?)
        }
        Command::KernelInfo(c) => {
            let write = c.out.is_some();
            cmd_kernel_info(&settings(c, Overrides::default(), LV)?, write)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
