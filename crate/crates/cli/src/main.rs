//! `ultrahaar`: wavelet sparsification of tree covariance matrices and
//! tree-aware beta diversity, as file-to-file pipelines.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid input, 3 numerical
//! non-convergence. Failures also print one JSON line on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod run;

#[derive(Parser, Debug)]
#[command(name = "ultrahaar", version, about = "Haar-like wavelets on phylogenetic trees")]
struct Cli {
    /// Directory receiving every output file and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Resolve multifurcations with zero-length edges instead of rejecting them.
    #[arg(long, global = true)]
    binarize: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Path-length statistics and the sparsity lower bound of a tree.
    Stats {
        tree: PathBuf,
    },
    /// Write the wavelet-conjugated covariance (matrix.mtx) and its diagonal (lambda.tsv).
    Sparsify {
        tree: PathBuf,
        /// Off-diagonal entries with magnitude at most this are not stored.
        #[arg(long, default_value_t = 0.0)]
        drop_tol: f64,
        /// Use the literal per-leaf evaluation instead of the closed form.
        #[arg(long)]
        slow_reference: bool,
        /// Write both triangles instead of the symmetric lower triangle.
        #[arg(long)]
        general: bool,
    },
    /// Validate a covariance matrix (labeled TSV or Matrix Market) and recover its tree.
    Check {
        matrix: PathBuf,
        /// Relative tolerance for the ultrametric inequalities.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Relative tolerance for splitting the matrix into blocks.
        #[arg(long, default_value_t = ultrahaar::ultrametric::DEFAULT_SPLIT_TOL)]
        split_tol: f64,
    },
    /// Leading eigenvalues, from a tree or from a sparsified matrix.
    Spectrum(SpectrumArgs),
    /// Pairwise beta-diversity distances between samples.
    Dist {
        tree: PathBuf,
        abundance: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Classical multidimensional scaling of a distance matrix.
    Embed {
        distances: PathBuf,
        #[arg(long, default_value_t = 2)]
        dims: usize,
    },
    /// Rank the splits of the tree by their contribution to the Haar-like distance.
    Splits {
        tree: PathBuf,
        abundance: PathBuf,
        #[arg(long)]
        sample_a: String,
        #[arg(long)]
        sample_b: String,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Generate a uniformly random ORB-tree.
    Gen {
        /// Number of internal nodes, equal to the number of leaves.
        #[arg(long)]
        internal: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Branch-length law: uniform, uniform:LOW:HIGH, exp:RATE or const:VALUE.
        #[arg(long, default_value = "uniform")]
        lengths: String,
        /// Output file name inside the output directory.
        #[arg(long, default_value = "tree.nwk")]
        output: String,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SpectrumSource {
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Matrix Market file written by `sparsify`.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SpectrumSource,
    /// Number of leading eigenvalues.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_matvecs: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Rows are OTUs and columns are samples.
    #[arg(long)]
    otus_as_rows: bool,
    /// Fail on OTU labels absent from the tree instead of dropping them.
    #[arg(long)]
    strict_labels: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MetricArg {
    Dpcoa,
    Wu,
    Uu,
    Haar,
}

impl From<MetricArg> for ultrahaar::diversity::Metric {
    fn from(m: MetricArg) -> Self {
        use ultrahaar::diversity::Metric;
        match m {
            MetricArg::Dpcoa => Metric::Dpcoa,
            MetricArg::Wu => Metric::WeightedUnifrac,
            MetricArg::Uu => Metric::UnweightedUnifrac,
            MetricArg::Haar => Metric::Haar,
        }
    }
}

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn error_line(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            error_line("usage", e.kind().as_str().unwrap_or("invalid arguments"));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = commands::configure_threads(cli.threads) {
        error_line("usage", &format!("{e:#}"));
        return ExitCode::from(EXIT_USAGE);
    }
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (kind, code) = match failure.kind {
                commands::FailureKind::Numerical => ("numerical", EXIT_NUMERICAL),
                commands::FailureKind::Input => ("input", EXIT_INPUT),
            };
            error_line(kind, &failure.message);
            ExitCode::from(code)
        }
    }
}
