use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "krc", version, about = "Exact Kantorovich-Rubinstein transport on finite spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// JSON problem file.
    pub file: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Replace an untight cost by its shortest-path closure.
    #[arg(long)]
    pub closure: bool,
}

#[derive(Debug, Subcommand, Clone)]
pub enum Command {
    /// Check cost tightness and every named object.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Optimal transport between two named measures, or two named families.
    Ot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
        /// Include the dual potential in the report.
        #[arg(long)]
        dual: bool,
    },
    /// The tau_c dependence coefficient of a joint law.
    Tau {
        #[command(flatten)]
        common: Common,
        /// Joint name; may be omitted when the file has exactly one.
        #[arg(long)]
        joint: Option<String>,
        /// Also report the beta-mixing coefficient.
        #[arg(long)]
        beta: bool,
        /// Check the tail-quantile bound at this base point label, or at the
        /// best one with `min`.
        #[arg(long, value_name = "LABEL|min")]
        bound: Option<String>,
    },
    /// The reconstruction coupling of a joint law, optionally sampled.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        joint: Option<String>,
        /// Number of draws.
        #[arg(long, value_name = "N")]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the draws here as CSV.
        #[arg(long, value_name = "PATH", requires = "sample")]
        csv: Option<PathBuf>,
    },
    /// Decay of tau_c along a Markov chain.
    Chain {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        chain: Option<String>,
        #[arg(long, value_name = "K")]
        steps: usize,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Self::Validate { common }
            | Self::Ot { common, .. }
            | Self::Tau { common, .. }
            | Self::Reconstruct { common, .. }
            | Self::Chain { common, .. } => common,
        }
    }
}
