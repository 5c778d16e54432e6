use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use frachamil::fracops::Side;
use frachamil::io::{cmd_derivative, cmd_nehari, cmd_solve, cmd_verify, DerivativeArgs};
use frachamil::verify::Level;

/// Spectral mountain-pass solver for fractional Hamiltonian systems.
#[derive(Parser)]
#[command(name = "frachamil", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write solution.json, profile.csv and a manifest.
    Solve {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the invariant battery and print a pass/fail table.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        /// Replace the derivative symbol by a wrong branch; the seminorm row must fail.
        #[arg(long, hide = true)]
        inject: bool,
    },
    /// Fractional derivative of a `t,u` CSV column.
    Derivative {
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, value_enum)]
        side: SideArg,
        /// Add a Marchaud quadrature column and report the largest difference.
        #[arg(long)]
        check: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground-state level from the Nehari minimization alone.
    Nehari { config: PathBuf },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match cli.command {
        Command::Solve { config, out } => cmd_solve(&config, &out),
        Command::Verify { level, inject } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            cmd_verify(level, inject)
        }
        Command::Derivative {
            input,
            alpha,
            side,
            check,
            out,
        } => cmd_derivative(&DerivativeArgs {
            input,
            alpha,
            side: match side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            },
            check,
            out,
        }),
        Command::Nehari { config } => cmd_nehari(&config),
    };
    std::process::exit(code.code());
}
