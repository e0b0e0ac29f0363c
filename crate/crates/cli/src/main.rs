mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Verification suites and data emitters for covariant measurement trade-offs.
#[derive(Debug, Parser)]
#[command(name = "qtrade", version)]
pub struct Cli {
    /// JSON run configuration (seed, samples, d, tolerances, out_dir).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub jobs: Option<u64>,
    /// Write the report or table here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// RNG seed; falls back to the config file, then QTRADE_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one module's verification suite.
    #[command(subcommand)]
    Verify(VerifyCmd),
    #[command(subcommand)]
    Tradeoff(TradeoffCmd),
    #[command(subcommand)]
    Channel(ChannelCmd),
    #[command(subcommand)]
    Povm(PovmCmd),
    #[command(subcommand)]
    Apps(AppsCmd),
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Dim {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=8))]
    pub d: u64,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Haar trace-integral identities by Monte Carlo.
    Haar {
        #[command(flatten)]
        dim: Dim,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Fidelity properties over randomized trials.
    Fidelity {
        #[command(flatten)]
        dim: Dim,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Dilation, Kraus form, complete positivity and worst-case fidelity.
    Channels {
        #[command(flatten)]
        dim: Dim,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Seed-to-POVM pipeline and instrument consistency.
    Povm {
        #[command(flatten)]
        dim: Dim,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Closed-form extremes against the optimizer, region geometry.
    Tradeoff {
        #[command(flatten)]
        dim: Dim,
    },
}

#[derive(Debug, Subcommand)]
pub enum TradeoffCmd {
    /// CSV of (alpha, F_T, F_E max, F_E min, on_boundary).
    Curve {
        #[command(flatten)]
        dim: Dim,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Last strength on the grid; defaults to the end of the F_T ≥ 1/d quadrant.
        #[arg(long)]
        alpha_end: Option<f64>,
    },
    /// Classify a point of the (F_T, F_E) plane.
    Classify {
        #[command(flatten)]
        dim: Dim,
        #[arg(long, allow_negative_numbers = true)]
        ft: f64,
        #[arg(long, allow_negative_numbers = true)]
        fe: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

#[derive(Debug, Subcommand)]
pub enum ChannelCmd {
    /// Superoperator, Choi data, dilation and Kraus list of T_alpha.
    Dump {
        #[command(flatten)]
        dim: Dim,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
        branch: BranchArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum PovmCmd {
    /// Admissibility, Q0 and instrument consistency for one seed.
    Check {
        #[command(flatten)]
        dim: Dim,
        #[arg(long)]
        alpha: f64,
        /// Solved from the normalization when omitted.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        c_im: f64,
        #[arg(long)]
        e: f64,
        #[arg(long)]
        f: f64,
        #[arg(long, default_value_t = 0.0)]
        g: f64,
        #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
        branch: BranchArg,
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AppsCmd {
    /// CSV of clone fidelities on both branches.
    Cloner {
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// CSV of transmission strategies over the line quality p.
    Transmit {
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// Every suite for every configured dimension.
    All {
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(2..=8))]
        d: Option<Vec<u64>>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
