//! `rvb`: batch front end for coverings, GGM searches, sweeps, scaling fits
//! and certification runs.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rvb_core::dmrm::{DEFAULT_ROW_WIDTH_CAP, DEFAULT_TWO_COLUMN_CAP};
use rvb_core::ggm::{CERTIFY_TOL, DEFAULT_EXHAUSTIVE_CAP};
use rvb_core::{Boundary, Error};

pub const EXIT_BAD_INPUT: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_OVER_CAP: u8 = 4;
pub const EXIT_DEGENERATE: u8 = 5;
pub const EXIT_INTERNAL: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "rvb", version, about = "Exact numerics for RVB states on square lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every dimer covering of an m x mp lattice.
    Coverings,
    /// Generalized geometric measure of one lattice.
    Ggm,
    /// GGM over perfect (m, m) and imperfect (m, m±1) lattices.
    Sweep(SweepArgs),
    /// Fit g = g_c ± k·n^(−x) to a sweep CSV.
    Fit(FitArgs),
    /// Exhaustive genuine-entanglement check plus random SSA trials.
    Certify(CertifyArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct GlobalArgs {
    /// Number of columns.
    #[arg(long, global = true, default_value_t = 2)]
    m: usize,
    /// Number of rows.
    #[arg(long, global = true, default_value_t = 2)]
    mp: usize,
    /// Boundary: open in both directions, or periodic horizontally.
    #[arg(long, global = true, value_enum, default_value_t = Bc::Open)]
    bc: Bc,
    /// Search only the structured families (sites, pairs, columns, row and column blocks).
    #[arg(long, global = true)]
    restricted: bool,
    /// Largest lattice searched over every bipartition.
    #[arg(long, global = true, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap_exhaustive: usize,
    /// Tallest column for two-column reduced states.
    #[arg(long, global = true, default_value_t = DEFAULT_TWO_COLUMN_CAP)]
    cap_mp: usize,
    /// Widest row for pair correlations.
    #[arg(long, global = true, default_value_t = DEFAULT_ROW_WIDTH_CAP)]
    cap_row: usize,
    /// Seed for randomized trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Certification threshold on 1 − Tr ρ².
    #[arg(long, global = true, default_value_t = CERTIFY_TOL)]
    tol_certify: f64,
    /// Most negative SSA slack accepted.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_ssa: f64,
    /// Largest exact/restricted GGM difference reported as agreement.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_agree: f64,
    /// Record wall-clock times; outputs are then no longer reproducible.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SweepArgs {
    /// Smallest even m.
    #[arg(long, default_value_t = 4)]
    m_min: usize,
    /// Largest even m.
    #[arg(long, default_value_t = 8)]
    m_max: usize,
    #[arg(long, value_enum, default_value_t = Families::Both)]
    families: Families,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    jobs: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FitArgs {
    /// Sweep CSV with at least the columns n_total,g,family,search.
    #[arg(long)]
    #[serde(skip)]
    input: PathBuf,
    /// Fitted curve on a log grid; written next to the report when absent.
    #[arg(long)]
    #[serde(skip)]
    curve: Option<PathBuf>,
    /// Also fit each family on its own.
    #[arg(long)]
    per_family: bool,
    /// Points on the curve grid.
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CertifyArgs {
    /// Random SSA trials.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Largest |X′∪c| and |Y′∪c| in a trial.
    #[arg(long, default_value_t = 6)]
    max_union: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Bc {
    Open,
    Ph,
}

impl From<Bc> for Boundary {
    fn from(bc: Bc) -> Self {
        match bc {
            Bc::Open => Boundary::OpenBoth,
            Bc::Ph => Boundary::PeriodicHorizontal,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Families {
    Both,
    Perfect,
    Imperfect,
}

/// A failed command with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Failure::new(EXIT_IO, format!("{}: {err}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InvalidLattice(_)
            | Error::NoCoverings
            | Error::InvalidCovering(_)
            | Error::InvalidSites(_)
            | Error::OverlappingSets => EXIT_BAD_INPUT,
            Error::SubsystemTooLarge { .. }
            | Error::TooLargeForExhaustive { .. }
            | Error::HeightTooLarge { .. }
            | Error::BasisBlowup { .. }
            | Error::UnsupportedFamily(_) => EXIT_OVER_CAP,
            Error::InsufficientSamples { .. } | Error::DegenerateFit { .. } => EXIT_DEGENERATE,
            Error::NumericOverflow(_) | Error::NotPhysical(_) => EXIT_INTERNAL,
        };
        Failure::new(code, err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Coverings => commands::coverings(&cli.global),
        Command::Ggm => commands::ggm(&cli.global),
        Command::Sweep(a) => commands::sweep(&cli.global, a),
        Command::Fit(a) => commands::fit(&cli.global, a),
        Command::Certify(a) => commands::certify(&cli.global, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rvb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
