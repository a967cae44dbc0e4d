//! `rulekit`: check rulebooks, score and rank trajectories, run verification
//! campaigns, and refine rulebooks.
//!
//! Exit status: 0 on success or pass, 1 when a scored trajectory or a
//! verification campaign fails its acceptability check, 2 on any input or
//! usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rulekit::ranking::{ComparatorKind, DEFAULT_EPSILON};

#[derive(Parser, Debug)]
#[command(name = "rulekit", version, about = "Rulebook specification and verification tool")]
struct Cli {
    /// Report unknown document fields as warnings instead of errors
    #[arg(long, global = true)]
    lenient: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a rulebook and print its priority levels
    Check {
        #[arg(long)]
        rulebook: PathBuf,
    },
    /// Score one trajectory and check acceptability
    Score {
        #[arg(long)]
        rulebook: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[command(flatten)]
        tolerance: Tolerance,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Rank every trajectory document in a directory
    Rank {
        #[arg(long)]
        rulebook: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long, value_enum, default_value_t = Comparator::Lex)]
        comparator: Comparator,
        #[command(flatten)]
        tolerance: Tolerance,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Verify a campaign manifest and write a report
    Verify {
        #[arg(long)]
        rulebook: PathBuf,
        /// Manifest listing scenario/trajectory file pairs
        #[arg(long)]
        cases: PathBuf,
        /// Where to write the report document
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tolerance: Tolerance,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Apply a refinement and write the new rulebook
    Refine {
        #[arg(long)]
        rulebook: PathBuf,
        #[arg(long, value_enum)]
        op: RefineOp,
        /// refine: ABOVE BELOW; aggregate: NEW_ID MEMBER...; augment: ID METRIC
        #[arg(long, num_args = 1.., required = true)]
        args: Vec<String>,
        /// Combiner for aggregate: sum, max or weighted_sum
        #[arg(long, default_value = "sum")]
        combiner: String,
        /// Weights for a weighted_sum combiner, one per member
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        /// Metric parameters for augment, as a JSON object
        #[arg(long)]
        params: Option<String>,
        /// Acceptable violation of the augmented rule
        #[arg(long)]
        threshold: Option<f64>,
        /// Description of the augmented rule
        #[arg(long, default_value = "")]
        description: String,
        /// Leave the augmented rule out of criticality counts
        #[arg(long)]
        no_criticality: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args, Debug, Clone, Copy)]
struct Tolerance {
    /// Absolute score tolerance
    #[arg(long, env = "RULEKIT_EPSILON", default_value_t = DEFAULT_EPSILON, value_parser = parse_epsilon)]
    epsilon: f64,
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a finite non-negative number")),
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Table,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Comparator {
    Lex,
    Dominance,
}

impl From<Comparator> for ComparatorKind {
    fn from(c: Comparator) -> Self {
        match c {
            Comparator::Lex => ComparatorKind::Lex,
            Comparator::Dominance => ComparatorKind::Dominance,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum RefineOp {
    Refine,
    Aggregate,
    Augment,
}

/// Whether the command's acceptability check held.
enum Verdict {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
