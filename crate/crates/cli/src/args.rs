use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kappa-ceiling",
    version,
    about = "QWK ceilings from two-rater reliability, model evaluation against them, and seeded simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate reliability and QWK ceilings from a two-rater file.
    Analyze {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Score a prediction column against the target and the ceilings.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        /// Column holding model predictions (may be real-valued).
        #[arg(long)]
        prediction: Option<String>,
        /// Compute QWK on predictions as given instead of rounding and clipping them.
        #[arg(long)]
        no_round: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the Monte Carlo experiments.
    Simulate {
        #[command(subcommand)]
        experiment: Experiment,
    },
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Noise sweep: ideal-model QWK against the three ceiling values.
    Table1 {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Accuracy of the concordance approximation to QWK under random noise.
    CccCheck {
        #[command(flatten)]
        sim: SimArgs,
        /// Write `kappa_ccc,kappa_true` points to this CSV file.
        #[arg(long)]
        points_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// `key = value` dataset spec file; explicit flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Delimited input file with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Column with the first rater's scores.
    #[arg(long)]
    pub r1: Option<String>,
    /// Column with the second rater's scores.
    #[arg(long)]
    pub r2: Option<String>,
    /// Optional precomputed target column, checked against the target rule.
    #[arg(long)]
    pub target_column: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub scale_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub scale_max: Option<i64>,
    /// rounded_mean, mean or sum.
    #[arg(long)]
    pub target_rule: Option<String>,
    /// reject or drop_row.
    #[arg(long)]
    pub missing: Option<String>,
    /// comma, tab, or a single character.
    #[arg(long)]
    pub delimiter: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, env = "KAPPA_CEILING_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Responses per trial.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated rater noise standard deviations.
    #[arg(long, value_delimiter = ',')]
    pub noise_levels: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub scale_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub scale_max: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub true_mean: Option<f64>,
    #[arg(long)]
    pub true_sd: Option<f64>,
    /// Lower bound of the uniform noise distribution (ccc-check).
    #[arg(long)]
    pub noise_lower: Option<f64>,
    /// Upper bound of the uniform noise distribution (ccc-check).
    #[arg(long)]
    pub noise_upper: Option<f64>,
    /// Also simulate a human-like rater and report its empirical QWK.
    #[arg(long)]
    pub human_like: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
