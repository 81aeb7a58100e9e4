mod cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Compositional path problems and open resource nets.
#[derive(Parser, Debug)]
#[command(name = "compath", version, about)]
pub struct Cli {
    /// Seed for generated instances.
    #[arg(long, global = true, env = "OPENPATH_SEED", default_value_t = compath::gen::DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write the result file here and print a table to stdout instead.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Fw,
    Series,
    Square,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Auto,
    Glued,
    Compositional,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Close a matrix, or solve an expression plan to its boundary behavior.
    Solve {
        file: PathBuf,
        /// Treat FILE as an expression plan.
        #[arg(long)]
        expr: bool,
        #[arg(long, value_enum, default_value_t = Algo::Fw)]
        algo: Algo,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        /// Iteration cap for the series and squaring routes.
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        /// Also compute the power series and require agreement.
        #[arg(long)]
        check_oracle: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Glue two open matrices along their shared boundary.
    Compose {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Place two open matrices side by side.
    Tensor {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Solve an open matrix and restrict to its boundary.
    Blackbox {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Fw)]
        algo: Algo,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Report whether an open matrix, graph or net is functional.
    CheckFunctional { file: PathBuf },
    /// Compare both sides of the binomial expansion for powers 0..=N.
    BinomialCheck {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_power: usize,
    },
    /// Path enumeration on graphs.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Token game and reachability on nets.
    #[command(subcommand)]
    Net(NetCommand),
    /// Write a matrix or graph file as DOT.
    ExportDot {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Write random instances.
    Gen {
        #[arg(value_enum)]
        what: GenKind,
        /// Instance tag for matrices.
        #[arg(long, default_value = "tropical")]
        quantale: String,
        /// Maximum carrier size for single matrices.
        #[arg(long, default_value_t = 6)]
        size: usize,
        /// Drop the functionality constraint for pairs.
        #[arg(long)]
        arbitrary: bool,
        /// Directory for `left.json` and `right.json`; single matrices go to stdout.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Matrix,
    Pair,
    GraphPair,
    NetPair,
}

#[derive(Subcommand, Debug)]
pub enum GraphCommand {
    /// All paths of length at most K between all vertices.
    Paths {
        file: PathBuf,
        #[arg(short = 'k', long)]
        bound: usize,
        /// Only paths of exactly this length.
        #[arg(long)]
        length: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Boundary paths of length at most K, optionally of a composite.
    Blackbox {
        file: PathBuf,
        /// Compose with this open graph first.
        #[arg(long)]
        then: Option<PathBuf>,
        #[arg(short = 'k', long)]
        bound: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Glue two open graphs.
    Compose {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Read a DOT digraph into the graph format.
    ImportDot {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum NetCommand {
    /// Fire one transition.
    Fire {
        file: PathBuf,
        /// Marking as `{"p": 2}` or `2*p + q`.
        #[arg(long)]
        marking: String,
        #[arg(long)]
        transition: String,
        /// Only the least-context firing (bounded nets).
        #[arg(long)]
        minimal: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Markings reachable within a number of firings.
    Reach {
        file: PathBuf,
        #[arg(long)]
        marking: String,
        #[arg(long)]
        depth: usize,
        /// Prune natural and integer markings with larger coefficients.
        #[arg(long)]
        cap: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
    /// Glue two open nets.
    Compose {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Reachability relation between boundary markings.
    Blackbox {
        file: PathBuf,
        /// Largest input coefficient.
        #[arg(long, default_value_t = 2)]
        cap: i64,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Reinterpret a net over another coefficient domain.
    Translate {
        file: PathBuf,
        /// natural, integer or bounded:K
        #[arg(long)]
        to: String,
        #[command(flatten)]
        output: Output,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OPENPATH_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cmd::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
