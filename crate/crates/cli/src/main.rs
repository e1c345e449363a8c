mod commands;
mod data;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use data::Usage;

/// Construct, analyze and learn sparsely activated ReLU networks on the hypercube.
#[derive(Parser, Debug)]
#[command(name = "sparsenet", version)]
struct Cli {
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (defaults to standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a network JSON for one of the explicit constructions.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// Fourier spectrum of a network as CSV (bitmask, coefficient).
    Transform {
        #[arg(long)]
        net: PathBuf,
    },
    /// Exact average sensitivity and exact or sampled noise sensitivity.
    Sensitivity {
        #[arg(long)]
        net: PathBuf,
        /// Noise correlations, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        rho: Vec<f64>,
        /// Monte-Carlo trials per correlation; requires --seed.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate every bound formula over a JSON parameter grid, as CSV.
    BoundsTable {
        #[arg(long)]
        grid: PathBuf,
        /// Value for every hidden constant.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Least-squares regression on monomials of degree at most d.
    LearnLowDegree {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = sparsenet_core::learners::DEFAULT_RIDGE)]
        ridge: f64,
    },
    /// Greedy generalized decision-list learner over an integer gate grid.
    LearnDlist {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 1)]
        grid_m: u64,
        #[arg(long, default_value_t = sparsenet_core::learners::DEFAULT_TOL)]
        tol: f64,
    },
    /// Empirical Rademacher complexity of a random sparse pool against the bound.
    Rademacher {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long = "W", default_value_t = 1.0)]
        w: f64,
        #[arg(long = "B", default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 32)]
        pool_size: usize,
        /// Include the negation of every member.
        #[arg(long)]
        symmetrize: bool,
        #[arg(long, value_delimiter = ',', required = true)]
        m_grid: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Exhaustive construction and identity checks, one PASS/FAIL line each.
    Verify {
        /// Run every check.
        #[arg(long, required_unless_present = "check")]
        all: bool,
        /// Run only the named checks.
        #[arg(long, value_delimiter = ',')]
        check: Vec<String>,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ConstructKind {
    /// A junta on the listed coordinates.
    Junta {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        relevant: Vec<usize>,
        /// Truth table; drawn uniformly from [-1, 1] with --seed when absent.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        table: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// The Indexing function on b address bits.
    Index {
        #[arg(long)]
        b: usize,
    },
    /// The quadratic lift of the parity comb.
    Parity {
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',')]
        set: Vec<usize>,
    },
    /// The Γ-gated weight-dense network with random unit payloads.
    Gamma {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        seed: u64,
    },
}

/// Training (and optional test) data, from a CSV file or labeled by a network.
#[derive(Args, Debug)]
struct DataArgs {
    /// Dataset CSV with columns x1..xn, y.
    #[arg(long, conflicts_with = "net", required_unless_present = "net")]
    data: Option<PathBuf>,
    /// Network JSON used to label generated points.
    #[arg(long)]
    net: Option<PathBuf>,
    /// Label every point of the cube.
    #[arg(long, requires = "net", conflicts_with = "samples")]
    full_cube: bool,
    /// Number of uniform training points; requires --seed.
    #[arg(long, requires = "net")]
    samples: Option<u64>,
    /// Held-out dataset CSV.
    #[arg(long, conflicts_with = "test_samples")]
    test_data: Option<PathBuf>,
    /// Number of uniform held-out points; requires --net and --seed.
    #[arg(long, requires = "net")]
    test_samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<sparsenet_core::Error>() {
            return if e.is_argument_error() { 2 } else { 1 };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Usage("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    commands::dispatch(cli.command, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
