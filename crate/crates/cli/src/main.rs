//! `pnlab`: command-line access to the library. Each subcommand reads a JSON
//! document (file or stdin) and writes a JSON report.

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "pnlab", version, about = "Numerics on the cone of positive-definite matrices")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Seed for every stochastic computation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides PNLAB_THREADS and the config file.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON run configuration (seed, threads, tolerances, truncation).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Also write the command's data series as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DomainArg {
    Minkowski,
    Grenier,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LaplacianArg {
    /// The partial-Iwasawa operator with the corrected first-order term.
    Paper,
    /// Laplace-Beltrami operator of the trace metric.
    Oracle,
    /// The partial-Iwasawa operator with its first-order term as printed.
    Verbatim,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VolumeMode {
    Formula,
    Mc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TailArg {
    None,
    Heuristic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FieldKind {
    /// Selberg power function `p_s`.
    Power,
    /// Truncated Eisenstein series `E_n(s, ·)`.
    Eisenstein,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConventionArg {
    Decaying,
    Verbatim,
}

/// Input document; omitted or `-` reads stdin.
#[derive(Args, Clone)]
pub struct Input {
    pub input: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct Truncation {
    /// Coset height bound.
    #[arg(long = "H")]
    pub h: Option<i64>,
    #[arg(long)]
    pub tail: Option<TailArg>,
}

#[derive(Args, Clone)]
pub struct FieldArgs {
    #[arg(long, value_enum, default_value_t = FieldKind::Power)]
    pub field: FieldKind,
    /// Spectral parameter as a JSON list, e.g. "[2.5]".
    #[arg(long)]
    pub s: String,
    #[command(flatten)]
    pub trunc: Truncation,
    /// Relative finite-difference step.
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    /// Richardson levels (0 or 1).
    #[arg(long, default_value_t = 1)]
    pub richardson: u8,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Partial and full Iwasawa coordinates of a determinant-one matrix.
    Iwasawa(Input),
    /// Point on the geodesic from I to Y, and the distance d(I, Y).
    Geodesic {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Reduce Y into a fundamental domain.
    Reduce {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        domain: DomainArg,
    },
    /// Selberg power function p_s(Y).
    Power {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        s: String,
    },
    /// Monte Carlo spherical function h_s(Y).
    Spherical {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        s: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Invariant operator D_k applied to a field at Y.
    Dk {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Invariant Laplacian of a field at a determinant-one Y.
    Laplacian {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        mode: LaplacianArg,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Laplacian eigenvalue and the xi_j of a spectral parameter.
    Lambda {
        #[arg(long)]
        s: String,
        /// Dimension; defaults to len(s) + 1.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Truncated Eisenstein series E_n(s, Y).
    Eisenstein {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        s: String,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// Fourier coefficient a_N(v, W) of the truncated Eisenstein series.
    Fourier {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        s: String,
        #[command(flatten)]
        trunc: Truncation,
        /// Frequency vector N as a JSON list.
        #[arg(long = "N")]
        big_n: String,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 16)]
        m: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Rank-one K-Bessel function K(s | a, b).
    Kbessel {
        /// Real number or {"re": .., "im": ..}.
        #[arg(long)]
        s: String,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, value_enum, default_value_t = ConventionArg::Decaying)]
        convention: ConventionArg,
    },
    /// Scaled samples of the Eisenstein series along v -> infinity at W.
    GrenierLimit {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        s: String,
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "[10, 100, 1000]")]
        schedule: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Checks the Eisenstein tower E_n -> E_{n-1} -> ... -> 1.
    StableChain {
        /// Probe document {"probes": [[{"W": .., "x": [..]}, ..], ..]};
        /// random probes are drawn from the seed when omitted.
        input: Option<PathBuf>,
        #[arg(long)]
        s: String,
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long, default_value = "[10, 100, 1000]")]
        schedule: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Random probes per level.
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// Block integral of the Eisenstein series over (R/Z)^{j x (n-j)}.
    CuspDefect {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        s: String,
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Volume of the fundamental domain.
    Volume {
        #[arg(long, value_enum)]
        mode: VolumeMode,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Principally polarized real tori.
    #[command(subcommand)]
    Tori(ToriCommand),
    /// Normal forms Omega = X + iY with 2X integral.
    #[command(subcommand)]
    Hg(HgCommand),
    /// Empirical check of the Siegel-set sandwich around the Grenier domain.
    Sandwich {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
pub enum ToriCommand {
    /// Whether a symmetric matrix defines a polarization.
    Polarize(Input),
    /// Isomorphism test for {"Y1": .., "Y2": ..}.
    Isom {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 100)]
        bound: i64,
    },
}

#[derive(Subcommand)]
pub enum HgCommand {
    /// Apply {"gamma": {"A", "B"}, "omega": {"g", "two_re", "im"}}.
    Act(Input),
    /// Equivalence test for {"omega1": .., "omega2": ..}.
    Equiv {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 100)]
        bound: i64,
    },
}

pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub csv: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let threads = config::thread_count(cli.global.threads, &config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Input("thread count must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let seed = cli.global.seed.or(config.seed).unwrap_or(config::DEFAULT_SEED);
    let ctx = Context { config, seed, csv: cli.global.csv.clone() };
    let report = pool.install(|| commands::dispatch(&cli.command, &ctx))?;
    io::write_report(&report, cli.global.output.as_ref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
