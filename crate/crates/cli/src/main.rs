mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dslab::algebra::DEFAULT_MONOMIAL_BUDGET;
use dslab::dims::DEFAULT_SUBSET_BUDGET;
use dslab::oig::DEFAULT_SUBSET_CAP;

/// Audits and experiments on finite multiclass hypothesis classes.
#[derive(Debug, Parser, Serialize)]
#[command(name = "dslab", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "DSLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Coordinate subsets the dimension searches may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_SUBSET_BUDGET)]
    pub budget_subsets: u128,
    /// Largest monomial set a spanning check may build.
    #[arg(long, global = true, default_value_t = DEFAULT_MONOMIAL_BUDGET)]
    pub budget_matrix: u128,
    /// Largest subfamily searched exhaustively for maximum density.
    #[arg(long, global = true, default_value_t = DEFAULT_SUBSET_CAP)]
    pub max_family: usize,
    /// Fall back to greedy peeling instead of refusing oversized density searches.
    #[arg(long, global = true)]
    pub heuristic: bool,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (default: stdout).
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassArgs {
    /// Class file (JSON).
    #[arg(long)]
    pub class: PathBuf,
    /// List size.
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Write a generated class.
    Gen {
        /// Product class, e.g. k=3,ell=1,s=1,m=2.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        cube: Option<String>,
        /// Random class, e.g. k=3,n=4,size=10 (uses --seed).
        #[arg(long)]
        random: Option<String>,
    },
    /// DS and Natarajan dimensions with witnesses.
    Dims {
        #[command(flatten)]
        class: ClassArgs,
        /// Also write the DS witness to this file.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Density of the class and its densest subfamily.
    Density {
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Maximum density over restrictions to sample sequences.
    Mu {
        #[command(flatten)]
        class: ClassArgs,
        /// Sequence length.
        #[arg(long)]
        n: usize,
        /// Weight each edge with at least two vertices by its size instead.
        #[arg(long)]
        prime: bool,
    },
    /// Min-max list orientation of the one-inclusion graph.
    Orient {
        #[command(flatten)]
        class: ClassArgs,
        /// Orient the graph of the density-maximizing sequence of this length instead.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Monomial spanning check.
    Span {
        #[command(flatten)]
        class: ClassArgs,
        /// Number of high coordinates allowed (default: the DS dimension).
        #[arg(long)]
        s: Option<usize>,
        /// Also run the per-direction basis counting.
        #[arg(long)]
        basis: bool,
    },
    /// Full theorem audit of one class, or a CSV batch over a directory.
    Audit {
        #[arg(long, required_unless_present = "dir", conflicts_with = "dir")]
        class: Option<PathBuf>,
        /// Directory of class files; streams one CSV row per (class, ell).
        #[arg(long)]
        dir: Option<PathBuf>,
        /// List sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        ell: Vec<usize>,
        /// Sequence length for mu (default: the class dimension).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Leave-one-out mistakes of the one-inclusion predictor on sampled data.
    Loo {
        #[command(flatten)]
        class: ClassArgs,
        /// Sample size.
        #[arg(long)]
        m: usize,
        /// 1-based row of the target hypothesis.
        #[arg(long, default_value_t = 1)]
        target: usize,
        /// Number of independent samples.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// PAC experiment of the prefix-vote learner; several sizes give a CSV curve.
    Pac {
        #[command(flatten)]
        class: ClassArgs,
        /// Sample sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// 1-based row of the target hypothesis.
        #[arg(long, default_value_t = 1)]
        target: usize,
    },
    /// Three-stage agnostic learner on a noisy uniform distribution.
    Agnostic {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long, default_value_t = 200)]
        n1: usize,
        /// Menu rounds.
        #[arg(long, default_value_t = 200)]
        t: usize,
        #[arg(long, default_value_t = 800)]
        n3: usize,
        /// Probability of replacing the target label with a uniform other label.
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        /// 1-based row of the target hypothesis.
        #[arg(long, default_value_t = 1)]
        target: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Re-check a shattering witness file against a class.
    ValidateWitness {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        witness: PathBuf,
    },
}

/// Process exit status of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Fail,
}

fn main() -> ExitCode {
    // clap's own usage status is 2, which is reserved for FAIL verdicts
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(jobs) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::dispatch(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if let Some(hint) = commands::hint(&e) {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(1)
        }
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in err.chain() {
        let part = cause.to_string();
        if !text.contains(&part) {
            if !text.is_empty() {
                text.push_str(": ");
            }
            text.push_str(&part);
        }
    }
    text
}
