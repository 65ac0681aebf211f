//! Command-line surface: build posets, compute incidence-algebra tables,
//! construct and verify constant-rate distributions, run the feasibility
//! search, and simulate ladder point processes.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 input error. Errors
//! are emitted as JSON on stderr.

mod dist_io;
mod run;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "crdist", version, about = "constant-rate distributions on discrete posets")]
pub struct Cli {
    /// Output directory for JSON/CSV artifacts (default: $CRDIST_OUT or cwd)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Cap on parallel worker threads (0 = library default)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Float-track tolerance for identity checks
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, clap::Args)]
pub struct TrackArgs {
    /// Exact rational track (default)
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// f64 track
    #[arg(long)]
    pub float: bool,
}

impl TrackArgs {
    pub fn is_float(&self) -> bool {
        self.float
    }
}

#[derive(Subcommand)]
pub enum Command {
    /// Möbius function table of a poset
    Mobius {
        /// Poset file or builtin spec (chain:N, antichain:N, kary:K:D,
        /// boolean:M, subsets:M:CAP, parallel:D, nonunique:D)
        #[arg(long)]
        poset: String,
    },
    /// Cumulative functions λ_0..λ_n and, on trees, the closed-form
    /// generating function
    Cumulative {
        #[arg(long)]
        poset: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[command(flatten)]
        track: TrackArgs,
    },
    /// Upper probability function of a distribution
    Upf {
        /// Distribution JSON file
        #[arg(long)]
        dist: PathBuf,
        #[command(flatten)]
        track: TrackArgs,
    },
    /// Rate function and constant-rate check of a distribution
    Rate {
        #[arg(long)]
        dist: PathBuf,
        #[command(flatten)]
        track: TrackArgs,
    },
    /// Construct a constant-rate UPF/PDF on a k-ary tree truncation
    ConstructTree {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long)]
        alpha: String,
        /// uniform | weighted:7/10,3/10 | alternating:7/10,3/10 | seeded:42
        #[arg(long, default_value = "uniform")]
        splitter: String,
        #[command(flatten)]
        track: TrackArgs,
    },
    /// Percolation F_p(x) = p^d(x) F(x) of a constant-rate tree UPF
    Percolate {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        p: String,
        #[arg(long, default_value = "uniform")]
        splitter: String,
        #[command(flatten)]
        track: TrackArgs,
    },
    /// Exact ladder marginals, kernel diagnostics, and an optional
    /// Monte Carlo check of the ladder chain
    Ladder {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "uniform")]
        splitter: String,
        /// Number of ladder steps
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        replicates: usize,
        #[arg(long, default_value_t = 7_770_001)]
        seed: u64,
    },
    /// Thin the ladder point process of a constant-rate tree law
    Thin {
        /// Tree spec kary:K
        #[arg(long, default_value = "kary:2")]
        tree: String,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        p: String,
        #[arg(long, default_value = "uniform")]
        splitter: String,
        #[command(flatten)]
        track: TrackArgs,
    },
    /// Partial-product chain vs ladder chain: exact kernel comparison and
    /// optional Monte Carlo
    Products {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "uniform")]
        splitter: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        replicates: usize,
        #[arg(long, default_value_t = 7_770_002)]
        seed: u64,
    },
    /// Constant-rate feasibility over an alpha grid
    Find {
        #[arg(long)]
        poset: String,
        /// Grid spec a:b:step, e.g. 0.1:0.9:0.05
        #[arg(long, default_value = "0.05:0.95:0.05")]
        alpha_grid: String,
        #[arg(long, default_value_t = 1e-9)]
        epsilon: f64,
        #[command(flatten)]
        track: TrackArgs,
    },
    /// Necessary conditions for a constant-rate law on the subsets poset
    PoissonCheck {
        #[arg(long)]
        alpha: f64,
        /// Marginal of #(X): poisson | geometric:BETA | path to JSON array
        #[arg(long, default_value = "poisson")]
        marginal: String,
        #[arg(long, default_value_t = 40)]
        k_max: usize,
    },
    /// Run a named verification suite; exit 0 iff every check passes
    Verify {
        #[arg(long)]
        suite: String,
    },
    /// List or build catalog posets
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
pub enum CatalogAction {
    List,
    Build {
        name: String,
        /// Comma-separated key=value params, e.g. k=2,depth=5
        #[arg(long, default_value = "")]
        params: String,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run::run(cli));
}
