use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

/// Structure expressions, their evaluator, and TPR/HRR embeddings.
#[derive(Debug, Parser)]
#[command(name = "srep", version)]
pub struct Cli {
    /// Seed for every random choice (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file overriding built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the syntax tree of an expression as JSON.
    Parse { expr: String },
    /// Evaluate an expression and print its value.
    Eval { expr: String },
    /// Generate an expression/value dataset as JSON Lines.
    Gen(GenArgs),
    /// Re-evaluate every pair of a dataset and report mismatches.
    Check { dataset: PathBuf },
    /// Embed expressions and write vectors as JSON Lines.
    Encode(EncodeArgs),
    /// Encode the subject of a query, unbind along its chain, decode, and
    /// compare with the evaluator.
    Query(QueryArgs),
    /// Difference-vector norm report for shared and disjoint quadruples.
    Superpose(SuperposeArgs),
    /// HRR clean-up accuracy across dimensions, as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub num_pairs: Option<usize>,
    /// Deepest nesting of a structure in further roles.
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_bindings: Option<usize>,
    #[arg(long)]
    pub max_path_len: Option<usize>,
    /// Fraction of query pairs whose answer is `$`.
    #[arg(long)]
    pub miss_frac: Option<f64>,
    /// Output file, or directory when `--split` is given. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write train/dev/test files into the `--out` directory.
    #[arg(long, requires = "out")]
    pub split: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Tpr,
    Hrr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Plain,
    Permuted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnbindArg {
    Correlation,
    #[value(name = "self")]
    SelfInverse,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    #[arg(long, value_enum, default_value = "tpr")]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub sym_dim: Option<usize>,
    #[arg(long)]
    pub role_dim: Option<usize>,
    #[arg(long)]
    pub hrr_dim: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Write the codebook used as JSON.
    #[arg(long, value_name = "PATH")]
    pub codebook: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Expressions to embed; read one per line from `--input` otherwise.
    pub exprs: Vec<String>,
    #[arg(long, conflicts_with = "exprs")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    pub expr: String,
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[arg(long, value_enum)]
    pub unbind: Option<UnbindArg>,
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Tpr,
    Hrr,
    File,
}

#[derive(Debug, Args)]
pub struct SuperposeArgs {
    #[arg(long, value_enum, default_value = "tpr")]
    pub source: SourceArg,
    /// Vectors JSON Lines, for `--source file`.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Quadruples of each kind.
    #[arg(long)]
    pub quadruples: Option<usize>,
    #[arg(long)]
    pub sym_dim: Option<usize>,
    #[arg(long)]
    pub role_dim: Option<usize>,
    #[arg(long)]
    pub hrr_dim: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Report directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write every expression the battery needs, one per line.
    #[arg(long, value_name = "PATH")]
    pub exprs_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Run a single unbinding mode instead of both.
    #[arg(long, value_enum)]
    pub unbind: Option<UnbindArg>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
}

/// Domain failures exit with 1, I/O failures with 2.
#[derive(Debug)]
pub enum Failure {
    Domain(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Domain(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<srep::Error> for Failure {
    fn from(e: srep::Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

macro_rules! via_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                srep::Error::from(e).into()
            }
        }
    )*};
}

via_error!(
    std::io::Error,
    serde_json::Error,
    srep::error::SyntaxError,
    srep::error::EvalError,
    srep::error::GenError,
    srep::error::TprError,
    srep::error::HrrError,
    srep::error::SuperpositionError
);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
