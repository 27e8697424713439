use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fowler_core::nonlocal::DiscretizationKind;
use fowler_lab::commands::{self, Failure, Report};
use fowler_lab::config::parse_kind;
use fowler_lab::{init_threads, THREADS_VAR};

#[derive(Debug, Parser)]
#[command(
    name = "fowler-lab",
    version,
    about = "Explicit schemes for the Fowler equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// March a bump forward in time and write trajectory.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides scheme.kind (I1, I2 or I3).
        #[arg(long, value_parser = parse_kind)]
        kind: Option<DiscretizationKind>,
    },
    /// Stability verdict and amplification sweep, written to sweep.csv.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<DiscretizationKind>,
        /// Start of the high-frequency band, in (0, pi).
        #[arg(long)]
        theta0: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Recompute the three amplification tables as table{1,2,3}.csv.
    Tables {
        /// Table ids; all three when omitted.
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        ids: Vec<u8>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid refinement study, written to convergence.csv.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<DiscretizationKind>,
    },
    /// Local error and memory study, written to truncation.csv and memory.csv.
    Truncation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<DiscretizationKind>,
    },
}

fn print(report: &Report) {
    for l in &report.stdout {
        println!("{l}");
    }
    for l in &report.stderr {
        eprintln!("{l}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = init_threads(std::env::var(THREADS_VAR).ok().as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    let outcome = match cli.command {
        Command::Simulate { config, out, kind } => {
            commands::simulate(&config, out.as_deref(), kind)
        }
        Command::Analyze {
            config,
            out,
            kind,
            theta0,
            samples,
        } => commands::analyze(&config, out.as_deref(), kind, theta0, samples),
        Command::Tables { ids, out } => commands::tables(&ids, out.as_deref()),
        Command::Converge { config, out, kind } => {
            commands::converge(&config, out.as_deref(), kind)
        }
        Command::Truncation { config, out, kind } => {
            commands::truncation(&config, out.as_deref(), kind)
        }
    };
    match outcome {
        Ok(report) => {
            print(&report);
            ExitCode::SUCCESS
        }
        Err(f) => {
            let Failure { error, report } = *f;
            print(&report);
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
