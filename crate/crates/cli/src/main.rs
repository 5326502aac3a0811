//! `qwhile`: run quantum while programs under the unitary or linear
//! semantics, approximate fixpoints, trace iterations and run the dense
//! oracle checks.
//!
//! Exit codes: 0 ok, 1 syntax error, 2 invalid program, 3 unbounded loop in
//! unitary mode without `--n`, 4 fixpoint not converged, 5 oracle check
//! failed, 6 runtime or I/O error.

mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwhile::semantics::{Mode, DEFAULT_EPS, DEFAULT_MAX_ITER, DEFAULT_PRUNE_EPS, DEFAULT_WINDOW};

#[derive(Parser, Debug)]
#[command(name = "qwhile", version, about = "Unitary and linear semantics for quantum while programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a program from its declared initial state.
    Run(RunArgs),
    /// Iterate the linear semantics of the trailing loop until it stalls.
    Fixpoint(FixpointArgs),
    /// Run the dense-oracle property suite.
    Check(CheckArgs),
    /// Print the state after every iteration of each top-level loop.
    Trace(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Unitary,
    Linear,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Unitary => Mode::Unitary,
            ModeArg::Linear => Mode::Linear,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct OutputArgs {
    /// Machine-readable JSON (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Human-readable text. Lossy; not meant to be parsed.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "unitary")]
    mode: ModeArg,
    /// Iterations for every unbounded loop. Without it, linear mode
    /// iterates to convergence and unitary mode refuses unbounded loops.
    #[arg(long)]
    n: Option<usize>,
    /// Drop amplitudes with modulus at or below this.
    #[arg(long, default_value_t = DEFAULT_PRUNE_EPS)]
    prune: f64,
    #[command(flatten)]
    stall: StallArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone, Copy)]
struct StallArgs {
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Consecutive sub-eps increments required to stop.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Args, Debug)]
struct FixpointArgs {
    file: PathBuf,
    #[command(flatten)]
    stall: StallArgs,
    #[arg(long, default_value_t = DEFAULT_PRUNE_EPS)]
    prune: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Largest iteration count checked (spaces stay at dimension <= 64).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(0..=5))]
    nmax: u8,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check a deliberately corrupted closed form instead of the real one.
    #[arg(long, hide = true)]
    mutate: bool,
    #[command(flatten)]
    out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => commands::run(&a.file, a.mode.into(), a.n, a.prune, a.stall.into(), a.out.pretty, false),
        Command::Trace(a) => commands::run(&a.file, a.mode.into(), a.n, a.prune, a.stall.into(), a.out.pretty, true),
        Command::Fixpoint(a) => commands::fixpoint(&a.file, a.stall.into(), a.prune, a.out.pretty),
        Command::Check(a) => commands::check(a.nmax as usize, a.trials, a.seed, a.mutate, a.out.pretty),
    };
    match result {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error worth a panic.
            let _ = std::io::stdout().lock().write_all(out.stdout.as_bytes());
            if let Some(msg) = out.warning {
                eprintln!("{msg}");
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

impl From<StallArgs> for commands::Stall {
    fn from(s: StallArgs) -> Self {
        commands::Stall { eps: s.eps, window: s.window, max_iter: s.max_iter }
    }
}
