use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ergodic-align", version, about = "Delay/rate analysis of ergodic interference alignment over GF(q)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Master seed for every random stream.
    #[arg(long, global = true, env = "ERGODIC_ALIGN_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Fail instead of emitting anything if the work takes longer than this.
    #[arg(long, global = true)]
    pub budget_seconds: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeName {
    Ngjv,
    Tdma,
    Jap,
    Japb,
    Child,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo delay of one scheme at one or more field sizes.
    Simulate(SimulateArgs),
    /// Exact oracles by enumeration.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Best JAP-B exponent for given n and number of rounds.
    Optimize(OptimizeArgs),
    /// Best JAP-B schemes for 3 <= n <= 8.
    Table(TableArgs),
    /// (DOF, exponent) points for every scheme family.
    Figure(FigureArgs),
    /// Exact optimum against the many-user asymptotics.
    Regimes(RegimesArgs),
    /// Log-log fit of mean delay against field size.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeName,

    /// Number of users.
    #[arg(long)]
    pub n: usize,

    /// Composition, e.g. `1,3` (JAP, JAP-B and their children).
    #[arg(long)]
    pub a: Option<String>,

    /// Parent of a child scheme.
    #[arg(long, value_enum)]
    pub parent: Option<SchemeName>,

    /// Sub-network size of a child scheme.
    #[arg(long)]
    pub parent_m: Option<usize>,

    /// Field sizes (repeatable).
    #[arg(long, required = true)]
    pub q: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,

    #[arg(long, default_value_t = 1000)]
    pub trials: u64,

    /// Abort a run whose single round scans more than this many slots.
    #[arg(long)]
    pub max_wait: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum ExactCommand {
    /// Probability that L IID nonzero values sum to zero.
    Lemma3 {
        #[arg(long, required = true)]
        q: Vec<u64>,
        #[arg(long = "L", visible_alias = "l", required = true)]
        l: Vec<usize>,
    },
    /// Probability that the next slot completes round k.
    Round {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: String,
        /// 1-based round.
        #[arg(long)]
        k: usize,
        #[arg(long, required = true)]
        q: Vec<u64>,
        /// `jap` or `japb`.
        #[arg(long, value_enum, default_value_t = SchemeName::Jap)]
        scheme: SchemeName,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Proportion of span vectors with no zero entry, for a random basis.
    Span {
        /// Span dimension.
        #[arg(long)]
        k: usize,
        /// Vector length.
        #[arg(long)]
        len: usize,
        #[arg(long, required = true)]
        q: Vec<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Full enumeration when it fits under the limit, per-row otherwise.
    Auto,
    Full,
    Rows,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, required = true)]
    pub n: Vec<usize>,
    /// Number of rounds (default: every K from 1 to n-1).
    #[arg(long = "K", visible_alias = "rounds")]
    pub k: Vec<usize>,
    /// Maximum number of argmins listed per row.
    #[arg(long, default_value_t = 64)]
    pub argmin_limit: usize,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 3)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Network sizes (default 3..=7).
    #[arg(long)]
    pub n: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct RegimesArgs {
    /// Regime I DOF, e.g. `1/3`.
    #[arg(long, conflicts_with = "beta", required_unless_present = "beta")]
    pub alpha: Option<String>,
    /// Regime II DOF multiplier, e.g. `3` or `1.5`.
    #[arg(long)]
    pub beta: Option<String>,
    /// Network sizes (default 12, 24, .., 60).
    #[arg(long)]
    pub n: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,

    #[arg(long, default_value_t = 1000)]
    pub trials: u64,

    /// Known mean delays, one per `--q`; skips simulation.
    #[arg(long)]
    pub delay: Vec<f64>,

    #[arg(long)]
    pub max_wait: Option<u64>,
}
