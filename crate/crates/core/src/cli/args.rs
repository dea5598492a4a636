use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use etrep::shape_space::Method;
use etrep::stats::{DEFAULT_ALPHA, DEFAULT_PERMUTATIONS};

#[derive(Debug, Parser)]
#[command(
    name = "etrep",
    version,
    about = "Elliptical tube representations: validity, means, morphs, simulation and tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an ETRep and print its validity report.
    Validate { input: PathBuf },
    /// Intrinsic or non-intrinsic mean of a population.
    Mean(MeanArgs),
    /// Sample the path between two ETReps as OBJ meshes.
    Morph(MorphArgs),
    /// Simulate a population around a reference ETRep.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Two-group permutation test.
    Test(TestArgs),
    /// Write the boundary mesh of an ETRep.
    ExportObj {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Samples per cross-section ring.
        #[arg(short = 'M', default_value_t = 32)]
        ring_samples: usize,
        /// Close both ends with triangle fans.
        #[arg(long)]
        caps: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Intrinsic,
    Nonintrinsic,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Intrinsic => Method::Intrinsic,
            MethodArg::Nonintrinsic => Method::Nonintrinsic,
        }
    }
}

#[derive(Debug, Args)]
pub struct MeanArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Normalize members to unit size first (shape rather than size-and-shape).
    #[arg(long)]
    pub scaled: bool,
    /// A directory of ETRep JSON files, or a list of files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MorphArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub steps: usize,
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
    pub groups: Vec<PathBuf>,
    #[arg(long)]
    pub scaled: bool,
    /// Number of permutations.
    #[arg(short = 'N', default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Significance level for the report's significance mask.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}
