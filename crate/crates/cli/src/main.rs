use clap::{Parser, Subcommand, ValueEnum};
use hierpop::spectrum::Target;
use hierpop_cli::{commands, load};
use std::path::PathBuf;
use std::process::ExitCode;

/// Steady states, linear stability, and transient dynamics of a
/// hierarchical size-structured population model with distributed delay.
#[derive(Parser)]
#[command(name = "hierpop", version, about)]
struct Cli {
    /// Path to a TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Use one of the shipped example configurations instead of a file.
    #[arg(long, global = true, value_name = "NAME")]
    seed_preset: Option<String>,

    /// Output directory, overriding the config's `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Which steady state the spectrum and classify commands analyse.
    #[arg(long, global = true, value_enum, default_value_t = TargetArg::Trivial)]
    target: TargetArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Trivial,
    Positive,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Trivial => Target::Trivial,
            TargetArg::Positive => Target::Positive,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the reproduction number of the trivial state and write r0.csv.
    R0,
    /// Locate the positive steady state and write equilibrium.csv.
    Equilibrium,
    /// Sample the characteristic determinant (kcurve.csv) and report the
    /// leading real root when the positivity condition allows it.
    Spectrum,
    /// Print the stability verdict for the selected steady state.
    Classify,
    /// Integrate the nonlinear model; writes timeseries.csv and snapshots.
    Simulate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let validated = match load(cli.config.as_deref(), cli.seed_preset.as_deref()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.kind.exit_code() as u8);
        }
    };
    let out = cli.out.as_deref();
    let result = match cli.command {
        Command::R0 => commands::cmd_r0(&validated, out).map(|_| ()),
        Command::Equilibrium => commands::cmd_equilibrium(&validated, out).map(|_| ()),
        Command::Spectrum => commands::cmd_spectrum(&validated, cli.target.into(), out),
        Command::Classify => commands::cmd_classify(&validated, cli.target.into()).map(|_| ()),
        Command::Simulate => commands::cmd_simulate(&validated, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
