//! `skillspace` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a computation fails on valid input,
//! 2 for input and validation errors (including bad flags).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use skillspace::corpus::InputFormat;
use skillspace::engine::Engine;
use skillspace::skillset::Norm;

pub const THREADS_ENV: &str = "SKILLSPACE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "skillspace", version, about = "Skill-space similarity analytics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GlobalOpts {
    /// Computation engine.
    #[arg(long, global = true, default_value = "vectorised", value_parser = parse_engine)]
    pub engine: Engine,

    /// Skill-set similarity normalisation.
    #[arg(long, global = true, default_value = "weighted", value_parser = parse_norm)]
    pub norm: Norm,

    /// Share of the degree's weight range given to certification skills.
    #[arg(long, global = true, default_value_t = skillspace::augment::DEFAULT_ALPHA)]
    pub alpha: f64,

    /// Seed for synthetic workloads.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Markdown)]
    pub format: OutputFormat,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    s.parse()
}

fn parse_input_format(s: &str) -> Result<InputFormat, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThetaMode {
    /// Θ from the corpus (cached on disk).
    Corpus,
    /// Identity Θ; every skill is similar only to itself.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ladder {
    /// The six published (occupations, skills) rungs.
    #[value(name = "paper", alias = "published")]
    Published,
    /// One 2×2 rung, overhead dominated.
    Tiny,
}

#[derive(Debug, Args)]
pub struct ThetaOpts {
    /// Build Θ from every document instead of market documents only.
    #[arg(long)]
    pub pool_theta: bool,

    /// RCA threshold for effective use.
    #[arg(long, default_value_t = skillspace::simmatrix::DEFAULT_THRESHOLD)]
    pub threshold: f64,

    /// Θ cache base path; a stale cache at an explicit path is an error.
    #[arg(long)]
    pub theta_cache: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = ThetaMode::Corpus)]
    pub theta: ThetaMode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read JSONL/CSV documents and write a corpus directory.
    Ingest {
        /// Market-side input files (job advertisements).
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        /// Education-side input files (degrees, certifications).
        #[arg(long = "edu")]
        education: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Input format; inferred from the extension when omitted.
        #[arg(long, value_parser = parse_input_format)]
        input_format: Option<InputFormat>,
    },
    /// Build (or load) Θ and optionally export it.
    Theta {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        theta: ThetaOpts,
        /// Write Θ as labelled CSV.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Skill-set similarity for every (A, B) group pair.
    Sss {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long = "a", required = true)]
        a: Vec<String>,
        #[arg(long = "b", required = true)]
        b: Vec<String>,
        #[command(flatten)]
        theta: ThetaOpts,
    },
    /// Skills of B ranked by how much of A aligns with them.
    Align {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long = "a")]
        a: String,
        #[arg(long = "b")]
        b: String,
        #[arg(long, default_value_t = skillspace::impact::DEFAULT_TOP_K)]
        top_k: usize,
        #[command(flatten)]
        theta: ThetaOpts,
    },
    /// Merge a degree and a certification into one weighted skill set.
    Combine {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        degree: String,
        #[arg(long)]
        cert: String,
        /// Write the combined set as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certification impact on alignment with roles.
    Impact {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, required = true)]
        degree: Vec<String>,
        #[arg(long)]
        cert: String,
        #[arg(long, required = true)]
        role: Vec<String>,
        /// Render role × degree tables.
        #[arg(long)]
        matrix: bool,
        #[arg(long, default_value_t = skillspace::impact::DEFAULT_TOP_K)]
        top_k: usize,
        #[command(flatten)]
        theta: ThetaOpts,
    },
    /// Naive versus vectorised timing on synthetic workloads.
    Bench {
        #[arg(long, value_enum, default_value_t = Ladder::Published)]
        ladder: Ladder,
        #[arg(long, default_value_t = skillspace::bench::MIN_REPETITIONS)]
        reps: usize,
        #[arg(long, default_value_t = skillspace::bench::DEFAULT_DOCS_PER_GROUP)]
        docs_per_group: usize,
    },
    /// Check the vectorised engine against the oracle on a corpus.
    Verify {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        theta: ThetaOpts,
    },
}

/// Maps a failure to its exit code.
fn exit_code(error: &anyhow::Error) -> u8 {
    match error.downcast_ref::<skillspace::Error>() {
        Some(e) if !e.is_input_error() => 1,
        _ => 2,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
