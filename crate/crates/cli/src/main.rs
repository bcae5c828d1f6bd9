//! `vendi` — diversity scores for embedding sets from the command line.
//!
//! Subcommands: `score` (score an embedding file), `oracle` (exact score of
//! a distribution document), `bound` (concentration-bound calculator),
//! `converge` / `diversity` (sweep harnesses), `synth` (synthetic mixture
//! generator).
//!
//! Exit codes: 0 success, 2 invalid usage, 3 computation failure. Results
//! go to the output target only; diagnostics to stderr.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vendi::bounds::{theoretical_bound, BoundQuery, BoundStatement};
use vendi::harness::{convergence_sweep, diversity_sweep, synth_mixture, DiversityConfig, SweepConfig};
use vendi::io::{
    read_distribution, read_embeddings, write_diversity_table_to_path, write_distribution,
    write_scores, write_table_to_path, EmbeddingFormat, ScoreFormat,
};
use vendi::lowrank::{fkea_truncated_vendi, nystrom_truncated_vendi, DEFAULT_RCOND};
use vendi::oracle::population_vendi;
use vendi::scores::{rke_score, truncated_vendi_score, vendi_score};
use vendi::KernelSpec;

#[derive(Parser)]
#[command(
    name = "vendi",
    about = "Reference-free diversity scores (Vendi, RKE, truncated Vendi) for embedding sets",
    version
)]
struct Cli {
    /// Worker threads for linear algebra and sweeps
    /// [default: $VENDI_THREADS or available parallelism]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score an embedding file
    Score(ScoreArgs),
    /// Exact population score of a distribution document
    Oracle(OracleArgs),
    /// Evaluate a concentration bound
    Bound(BoundArgs),
    /// Run a convergence sweep from a config document
    Converge(SweepArgs),
    /// Run a diversity sweep from a config document
    Diversity(SweepArgs),
    /// Generate a synthetic mixture distribution document
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum KernelArg {
    Cosine,
    Gaussian,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Exact,
    Truncated,
    Nystrom,
    Fkea,
    Rke,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Vemb,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OutFormatArg {
    #[value(name = "json-lines")]
    JsonLines,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum StatementArg {
    Thm1,
    Cor1,
    Cor2a,
    Cor2b,
    Thm2,
    Thm3a,
    Thm3b,
}

impl StatementArg {
    fn to_statement(self) -> BoundStatement {
        match self {
            StatementArg::Thm1 => BoundStatement::Thm1,
            StatementArg::Cor1 => BoundStatement::Cor1Rke,
            StatementArg::Cor2a => BoundStatement::Cor2aAlpha1,
            StatementArg::Cor2b => BoundStatement::Cor2b,
            StatementArg::Thm2 => BoundStatement::Thm2,
            StatementArg::Thm3a => BoundStatement::Thm3aFkea,
            StatementArg::Thm3b => BoundStatement::Thm3bNystrom,
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    /// Embedding file to score
    #[arg(long)]
    input: String,
    /// Input layout
    #[arg(long, value_enum)]
    format: FormatArg,
    /// Similarity function
    #[arg(long, value_enum)]
    kernel: KernelArg,
    /// Gaussian bandwidth (required with --kernel gaussian)
    #[arg(long)]
    sigma: Option<f64>,
    /// Entropy order [default: 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Scoring method [default: exact]
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    /// Truncation / budget parameter (required for truncated, nystrom, fkea)
    #[arg(long)]
    t: Option<usize>,
    /// Seed for randomized estimators [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Relative pseudo-inverse cutoff for nystrom [default: 1e-10]
    #[arg(long)]
    rcond: Option<f64>,
    /// Output path; "-" or "stdout" writes to standard output [default: stdout]
    #[arg(long)]
    out: Option<String>,
    /// Output record layout [default: json-lines]
    #[arg(long, value_enum, default_value_t = OutFormatArg::JsonLines)]
    out_format: OutFormatArg,
}

#[derive(Args)]
struct OracleArgs {
    /// Distribution document (JSON: support, probs, label)
    #[arg(long)]
    dist: String,
    /// Similarity function
    #[arg(long, value_enum)]
    kernel: KernelArg,
    /// Gaussian bandwidth (required with --kernel gaussian)
    #[arg(long)]
    sigma: Option<f64>,
    /// Entropy order [default: 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Optional truncation
    #[arg(long)]
    t: Option<usize>,
    /// Output path; "-" or "stdout" writes to standard output [default: stdout]
    #[arg(long)]
    out: Option<String>,
    /// Output record layout [default: json-lines]
    #[arg(long, value_enum, default_value_t = OutFormatArg::JsonLines)]
    out_format: OutFormatArg,
}

#[derive(Args)]
struct BoundArgs {
    /// Which statement to evaluate
    #[arg(long, value_enum)]
    statement: StatementArg,
    /// Sample size
    #[arg(long)]
    n: usize,
    /// Failure probability, in (0, 1)
    #[arg(long)]
    delta: f64,
    /// Entropy order (statement-specific default where one exists)
    #[arg(long)]
    alpha: Option<f64>,
    /// Feature dimension (cor2a, cor2b)
    #[arg(long = "d")]
    d: Option<usize>,
    /// Truncation parameter (thm2, thm3a, thm3b)
    #[arg(long)]
    t: Option<usize>,
    /// Eigenvalue level for thm3b
    #[arg(long)]
    tau: Option<f64>,
    /// Eigenvalue index for thm3b
    #[arg(long = "r")]
    r: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration document (JSON)
    #[arg(long)]
    config: String,
    /// Output CSV path
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of modes
    #[arg(long = "k")]
    k: usize,
    /// Embedding dimension
    #[arg(long = "d")]
    d: usize,
    /// Radius of the sphere the mode centers sit on
    #[arg(long)]
    spread: f64,
    /// Standard deviation of each mode's atom cloud
    #[arg(long)]
    within_std: f64,
    /// Seed
    #[arg(long)]
    seed: u64,
    /// Output distribution document path
    #[arg(long)]
    out: String,
}

enum Failure {
    /// Bad flags or inputs that fail validation before any computation.
    Usage(String),
    /// Computation or I/O failed.
    Compute(String),
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure::Usage(e.to_string())
    }

    fn compute(e: impl std::fmt::Display) -> Self {
        Failure::Compute(e.to_string())
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("VENDI_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
    .max(1)
}

fn kernel_from_flags(kernel: KernelArg, sigma: Option<f64>) -> Result<KernelSpec, Failure> {
    match kernel {
        KernelArg::Cosine => {
            if sigma.is_some() {
                eprintln!("note: --sigma is ignored with --kernel cosine");
            }
            Ok(KernelSpec::Cosine)
        }
        KernelArg::Gaussian => {
            let sigma = sigma
                .ok_or_else(|| Failure::Usage("--kernel gaussian requires --sigma".into()))?;
            KernelSpec::gaussian(sigma).map_err(Failure::usage)
        }
    }
}

/// Open the output target: stdout for None, "-", or "stdout".
fn open_out(out: &Option<String>) -> Result<Box<dyn Write>, Failure> {
    match out.as_deref() {
        None | Some("-") | Some("stdout") => Ok(Box::new(std::io::stdout().lock())),
        Some(path) => {
            let file = std::fs::File::create(path).map_err(Failure::compute)?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
    }
}

fn score_format(arg: OutFormatArg) -> ScoreFormat {
    match arg {
        OutFormatArg::JsonLines => ScoreFormat::JsonLines,
        OutFormatArg::Csv => ScoreFormat::Csv,
    }
}

fn run_score(args: ScoreArgs) -> Result<(), Failure> {
    let kernel = kernel_from_flags(args.kernel, args.sigma)?;
    let alpha = args.alpha.unwrap_or(1.0);
    if !(alpha > 0.0) {
        return Err(Failure::Usage(format!(
            "--alpha must be positive, got {alpha}"
        )));
    }
    let needs_t = matches!(
        args.method,
        MethodArg::Truncated | MethodArg::Nystrom | MethodArg::Fkea
    );
    if needs_t && args.t.is_none() {
        return Err(Failure::Usage(
            "--t is required for --method truncated, nystrom, and fkea".into(),
        ));
    }
    if args.method == MethodArg::Rke {
        if let Some(a) = args.alpha {
            if (a - 2.0).abs() > 1e-12 {
                eprintln!("warning: --method rke is fixed at order 2; ignoring --alpha {a}");
            }
        }
    }

    let format = match args.format {
        FormatArg::Vemb => EmbeddingFormat::Vemb,
        FormatArg::Csv => EmbeddingFormat::Csv,
    };
    let embeddings = read_embeddings(&args.input, format).map_err(Failure::compute)?;

    let seed = args.seed.unwrap_or(0);
    let rcond = args.rcond.unwrap_or(DEFAULT_RCOND);
    let report = match args.method {
        MethodArg::Exact => vendi_score(&embeddings, &kernel, alpha),
        MethodArg::Rke => rke_score(&embeddings, &kernel),
        MethodArg::Truncated => {
            truncated_vendi_score(&embeddings, &kernel, alpha, args.t.expect("checked"))
        }
        MethodArg::Nystrom => nystrom_truncated_vendi(
            &embeddings,
            &kernel,
            alpha,
            args.t.expect("checked"),
            seed,
            rcond,
        ),
        MethodArg::Fkea => fkea_truncated_vendi(
            &embeddings,
            &kernel,
            alpha,
            args.t.expect("checked"),
            seed,
        ),
    }
    .map_err(Failure::compute)?;

    let mut out = open_out(&args.out)?;
    write_scores(&[report], &mut out, score_format(args.out_format)).map_err(Failure::compute)?;
    out.flush().map_err(Failure::compute)?;
    Ok(())
}

fn run_oracle(args: OracleArgs) -> Result<(), Failure> {
    let kernel = kernel_from_flags(args.kernel, args.sigma)?;
    let alpha = args.alpha.unwrap_or(1.0);
    if !(alpha > 0.0) {
        return Err(Failure::Usage(format!(
            "--alpha must be positive, got {alpha}"
        )));
    }
    let dist = read_distribution(&args.dist).map_err(Failure::compute)?;
    let report = population_vendi(&dist, &kernel, alpha, args.t).map_err(Failure::compute)?;
    let mut out = open_out(&args.out)?;
    write_scores(&[report], &mut out, score_format(args.out_format)).map_err(Failure::compute)?;
    out.flush().map_err(Failure::compute)?;
    Ok(())
}

fn run_bound(args: BoundArgs) -> Result<(), Failure> {
    let statement = args.statement.to_statement();
    let alpha = match (args.alpha, args.statement) {
        (Some(a), _) => a,
        (None, StatementArg::Thm1) => 1.0, // unused by the formula
        (None, StatementArg::Cor1) => 2.0,
        (None, StatementArg::Cor2a) => 1.0,
        (None, _) => {
            return Err(Failure::Usage(format!(
                "--alpha is required for --statement {}",
                statement
            )))
        }
    };
    let mut query = BoundQuery::new(statement, args.n, args.delta, alpha);
    if let Some(d) = args.d {
        query = query.with_d(d);
    }
    if let Some(t) = args.t {
        query = query.with_t(t);
    }
    if let (Some(tau), Some(r)) = (args.tau, args.r) {
        query = query.with_tau_r(tau, r);
    } else if args.tau.is_some() != args.r.is_some() {
        return Err(Failure::Usage(
            "--tau and --r must be given together".into(),
        ));
    }
    // bound evaluation is pure input validation plus arithmetic
    let value = theoretical_bound(&query).map_err(Failure::usage)?;
    if statement.is_asymptotic() {
        eprintln!(
            "note: the {statement} bound is asymptotic; printed with its unspecified \
             universal constant set to 1"
        );
    }
    println!("{value:.5}");
    Ok(())
}

fn run_converge(args: SweepArgs) -> Result<(), Failure> {
    let cfg = SweepConfig::from_path(&args.config).map_err(Failure::usage)?;
    let rows = convergence_sweep(&cfg).map_err(Failure::compute)?;
    write_table_to_path(&rows, &args.out).map_err(Failure::compute)?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out);
    Ok(())
}

fn run_diversity(args: SweepArgs) -> Result<(), Failure> {
    let cfg = DiversityConfig::from_path(&args.config).map_err(Failure::usage)?;
    let rows = diversity_sweep(&cfg).map_err(Failure::compute)?;
    write_diversity_table_to_path(&rows, &args.out).map_err(Failure::compute)?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out);
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), Failure> {
    let dist = synth_mixture(args.k, args.d, args.spread, args.within_std, args.seed)
        .map_err(Failure::usage)?;
    write_distribution(&dist, &args.out).map_err(Failure::compute)?;
    eprintln!(
        "wrote {}-mode mixture ({} atoms) to {}",
        args.k,
        dist.len(),
        args.out
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = resolve_threads(cli.threads);
    vendi::set_num_threads(threads);
    // a failed build means the global pool already exists (fine in tests)
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    let result = match cli.command {
        Command::Score(args) => run_score(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Bound(args) => run_bound(args),
        Command::Converge(args) => run_converge(args),
        Command::Diversity(args) => run_diversity(args),
        Command::Synth(args) => run_synth(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
