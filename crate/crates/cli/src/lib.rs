//! `g2flat` command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a check fails, 2 usage or input error,
//! 3 numerical failure.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use g2flat::report::ResidualReport;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] g2flat::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use g2flat::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(
                E::InvalidSurface(_) | E::Classification(_) | E::NotNull(_) | E::NotCoassociative(_) | E::NoNormalFrame(_),
            ) => 1,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "g2flat", version, about = "Semi-flat G2, Monge-Ampère, Toda and quadric-surface numerics")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "G2FLAT_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Standard G2 forms and lattice actions.
    #[command(subcommand)]
    G2(G2Cmd),
    /// Semi-flat G2 structures from Λ²-valued immersions.
    #[command(subcommand)]
    Semiflat(SemiflatCmd),
    /// Real Monge-Ampère potentials.
    #[command(subcommand)]
    Ma(MaCmd),
    /// Minimal surfaces in quadrics.
    #[command(subcommand)]
    Quadric(QuadricCmd),
    /// Toda and Tzitzéica boundary-value problems.
    #[command(subcommand)]
    Toda(TodaCmd),
    /// Metric cones over surfaces.
    #[command(subcommand)]
    Cone(ConeCmd),
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Also write the report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Tolerance is `tol_scale · h²` with `h` the largest grid spacing
    /// (default 10, or 20 for `toda solve`).
    #[arg(long)]
    pub tol_scale: Option<f64>,
    /// Absolute tolerance overriding `--tol-scale`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Nodes closer than this to the boundary are ignored.
    #[arg(long, default_value_t = 2)]
    pub margin: usize,
}

#[derive(Debug, Subcommand)]
pub enum G2Cmd {
    /// φ₀, ψ₀, the recovered metric and volume, and the Λ²R⁴ pairing.
    Tables,
    /// Action of an SL(4,Z) matrix on Λ²Z⁴.
    Monodromy {
        /// Rows separated by `;`, entries by `,`.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum SemiflatCmd {
    /// Write h, φ, ψ and θ for an immersion.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Closure and harmonicity residuals; repeat --input (coarse to fine) for orders.
    Verify {
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum MaCmd {
    /// Monge-Ampère residuals and harmonicity of the cylindrical embedding.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Write the cylindrical immersion `u` of a potential.
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum QuadricCmd {
    /// Harmonic sequence, classification and its structure relations.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// `p,q`.
        #[arg(long, default_value = "3,3")]
        signature: String,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        h0: f64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Integrate a null holomorphic curve into a minimal surface.
    Weierstrass {
        #[arg(long)]
        curve: PathBuf,
        /// `x0,x1,y0,y1`.
        #[arg(long, allow_hyphen_values = true)]
        domain: String,
        #[arg(long, default_value_t = 129)]
        n: usize,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum TodaCmd {
    /// Newton solve of a problem file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// CSV of the residual per Newton step.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Lift a Tzitzéica solution to the two-field system and check curvature signs.
    Lift {
        #[arg(long)]
        w1: PathBuf,
        #[arg(long, default_value = "z")]
        q: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 50.0)]
        tol_scale: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConeCmd {
    /// Write the cone immersion `r·φ` on `[r0, r1]`.
    Extend {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 2.0)]
        r1: f64,
        #[arg(long, default_value_t = 33)]
        nr: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Link minimality, cone metric and semi-flat residuals of the cone.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 2.0)]
        r1: f64,
        /// Radial nodes (default: first axis of the input).
        #[arg(long)]
        nr: Option<usize>,
        #[command(flatten)]
        report: ReportArgs,
    },
}

/// What a command produced: a report (when it has checks) and whether it passed.
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    pub fn report(r: &ResidualReport) -> Self {
        Self { text: r.to_text(), passed: r.passed() }
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| commands::dispatch(&cli.command)) {
        Ok(out) => {
            print!("{}", out.text);
            if out.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            println!("# g2flat-report v{} {}", g2flat::report::SCHEMA_VERSION, commands::title(&cli.command));
            println!("# error: {e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
