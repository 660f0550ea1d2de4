use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use peflow::config::Mode;
use peflow::{cmd_converge, cmd_simulate, cmd_verify, parse_checks, CliError, ConvergeMode};
use peflow_core::diagnostics::CheckKind;

#[derive(Parser)]
#[command(name = "peflow", version, about = "Sticky-particle pressureless Euler and Euler-Poisson solver")]
struct Cli {
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "PEFLOW_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and export trajectory and events.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the exact Euler-Poisson dynamics for the configured data.
    Ep {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check the inequalities and identities on a trajectory.
    Verify {
        #[arg(short, long)]
        config: PathBuf,
        /// Comma-separated checks; defaults to all of them.
        #[arg(long)]
        checks: Option<String>,
        /// Directory with trajectory.csv and events.csv from `simulate`.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Convergence study in the atom count or the smoothing length.
    Converge {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Atom counts (`n`) or exponents k with ε = 2^-k (`eps`).
        #[arg(long)]
        schedule: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    N,
    Eps,
}

fn run(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Simulate { config, out } => {
            print!("{}", peflow::report::pretty(&cmd_simulate(&config, &out, Mode::Simulate)?));
            Ok(true)
        }
        Command::Ep { config, out } => {
            print!("{}", peflow::report::pretty(&cmd_simulate(&config, &out, Mode::Ep)?));
            Ok(true)
        }
        Command::Verify { config, checks, trajectory, out } => {
            let checks = match checks {
                Some(list) => parse_checks(&list)?,
                None => CheckKind::ALL.to_vec(),
            };
            let (report, pass) = cmd_verify(&config, &checks, trajectory.as_deref(), out.as_deref())?;
            print!("{}", peflow::report::pretty(&report));
            Ok(pass)
        }
        Command::Converge { config, mode, schedule, out } => {
            let mode = match mode {
                ModeArg::N => ConvergeMode::N,
                ModeArg::Eps => ConvergeMode::Eps,
            };
            let (report, pass) = cmd_converge(&config, mode, schedule.as_deref(), out.as_deref())?;
            print!("{}", peflow::report::pretty(&report));
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
