//! tforge: enumerate conjectural bases of multiple t-values, evaluate them
//! to controlled precision, re-run the published weight-5 derivation, and
//! scan weights for integer relations.

mod commands;
mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use report::Format;
use tforge_core::eval::Backend;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    /// Alternating-sum expansion with series acceleration.
    Fast,
    /// Direct nested summation with an explicit tail bound.
    Oracle,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Fast => Backend::Fast,
            BackendArg::Oracle => Backend::Oracle,
        }
    }
}

#[derive(Parser)]
#[command(name = "tforge", version, about = "multiple t-value toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Print evaluator work counters to stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// List the conjectural basis C_k (or the {2,3}-compositions with --mzv).
    Basis {
        /// Weight k >= 2.
        #[arg(long)]
        weight: u32,
        /// List the weight-k MZV basis compositions instead.
        #[arg(long)]
        mzv: bool,
    },
    /// Evaluate one t-value to a requested number of digits.
    Eval {
        /// Index as "2,1,2" or "t(2,1,2)"; the leading part must be >= 2.
        index: String,
        /// Correct decimal digits requested.
        #[arg(long, default_value_t = 50)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = BackendArg::Fast)]
        backend: BackendArg,
        /// Outer summation terms for the oracle backend.
        #[arg(long, default_value_t = 100_000)]
        cutoff: u64,
        /// Abort with a precision failure after this many seconds.
        #[arg(long)]
        time_budget: Option<u64>,
        /// Disk cache directory (TFORGE_CACHE overrides).
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Re-run the published checks: listings, counts, polar table, residuals,
    /// and the weight-5 derivation.
    VerifyPaper {
        #[arg(long, default_value_t = 50)]
        digits: u32,
        /// Relations file overriding the embedded one.
        #[arg(long)]
        relations: Option<PathBuf>,
        /// Worker threads for independent evaluations.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        time_budget: Option<u64>,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Independence scan of C_k, then express every admissible weight-k index
    /// over it.
    Scan {
        /// Weight k in 2..=10.
        #[arg(long)]
        weight: u32,
        #[arg(long, default_value_t = 60)]
        digits: u32,
        /// Largest relation coefficient searched for.
        #[arg(long, default_value_t = 1_000_000)]
        coeff_bound: u64,
        /// Worker threads for independent evaluations.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        time_budget: Option<u64>,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Basis { weight, mzv } => commands::basis(weight, mzv),
        Command::Eval {
            ref index,
            digits,
            backend,
            cutoff,
            ref time_budget,
            ref cache,
        } => commands::eval(
            index,
            digits,
            backend.into(),
            cutoff,
            cache.clone(),
            *time_budget,
            cli.verbose,
        ),
        Command::VerifyPaper {
            digits,
            ref relations,
            jobs,
            ref time_budget,
            ref cache,
        } => commands::verify_paper(
            digits,
            relations.clone(),
            jobs,
            cache.clone(),
            *time_budget,
            cli.verbose,
        ),
        Command::Scan {
            weight,
            digits,
            coeff_bound,
            jobs,
            ref time_budget,
            ref cache,
        } => commands::scan(
            weight,
            digits,
            coeff_bound,
            jobs,
            cache.clone(),
            *time_budget,
            cli.verbose,
        ),
    };
    match outcome {
        Ok(report) => {
            report.print(cli.format);
            std::process::exit(report.status.exit_code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
