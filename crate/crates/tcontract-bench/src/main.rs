use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tcontract_bench::generate::{random_contraction, BenchShape};
use tcontract_bench::runner::{run_bench, Algo, BenchItem, BenchOptions};
use tcontract_bench::spec::parse_spec;
use tcontract_bench::{parse_config_overrides, parse_lengths};

/// Tensor contraction benchmark harness.
///
/// Measures the native block-scatter contraction path against the
/// transpose-based reference, the naive loops, and plain matrix
/// multiplication, and emits CSV.
#[derive(Parser)]
#[command(name = "tcbench", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Benchmark a single contraction given by an index string.
    Run(RunArgs),
    /// Benchmark randomly generated contractions over a size sweep.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Comma-separated algorithms: bsmtc,ttdt,naive,gemm
    #[arg(long, default_value = "bsmtc")]
    algo: String,
    /// Thread count passed to the library
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Timed repetitions per measurement (minimum is reported)
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Cross-check results against the naive oracle (small sizes only)
    #[arg(long)]
    check: bool,
    /// CSV output path (default: stdout)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Blocking-parameter overrides file (key=value lines)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Index string, e.g. abc-adec-ebd (groups in C-A-B order)
    #[arg(long)]
    spec: String,
    /// Per-label lengths, e.g. a=48,b=24,c=32,d=40,e=16
    #[arg(long)]
    lengths: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// m = n = k = size
    Square,
    /// m = n fixed (--mn), k = size
    Rankk,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Smallest size in the sweep
    #[arg(long)]
    min: usize,
    /// Largest size in the sweep
    #[arg(long)]
    max: usize,
    /// Number of sizes between min and max
    #[arg(long, default_value_t = 10)]
    points: usize,
    /// Generator seed; a fixed seed reproduces the same contractions
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed m = n extent for rank-k sweeps
    #[arg(long, default_value_t = 1024)]
    mn: usize,
    #[command(flatten)]
    common: CommonArgs,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn parse_common(common: &CommonArgs) -> Result<BenchOptions, String> {
    let mut algos = Vec::new();
    for part in common.algo.split(',') {
        if part.trim().is_empty() {
            continue;
        }
        algos.push(part.parse::<Algo>()?);
    }
    if algos.is_empty() {
        return Err("no algorithms selected".to_string());
    }
    if common.threads == 0 {
        return Err("--threads must be at least 1".to_string());
    }
    if common.repeats == 0 {
        return Err("--repeats must be at least 1".to_string());
    }
    let cfg = match &common.config {
        None => tcontract::GemmConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config_overrides(&text)?
        }
    };
    Ok(BenchOptions {
        algos,
        threads: common.threads,
        repeats: common.repeats,
        check: common.check,
        cfg,
        data_seed: 0x7C0,
    })
}

/// `points` sizes evenly spaced over [min, max], deduplicated after rounding.
fn sweep_sizes(min: usize, max: usize, points: usize) -> Vec<usize> {
    let points = points.max(1);
    let mut sizes = Vec::with_capacity(points);
    for i in 0..points {
        let t = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
        let s = (min as f64 + t * (max as f64 - min as f64)).round() as usize;
        if sizes.last() != Some(&s) {
            sizes.push(s);
        }
    }
    sizes
}

fn emit(items: &[BenchItem], opts: &BenchOptions, csv: Option<&PathBuf>) -> ExitCode {
    let result = match csv {
        Some(path) => {
            let mut file = match fs::File::create(path) {
                Ok(f) => f,
                Err(e) => return usage_error(&format!("{}: {e}", path.display())),
            };
            run_bench(items, opts, &mut file)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let r = run_bench(items, opts, &mut lock);
            let _ = lock.flush();
            r
        }
    };
    match result {
        Ok(summary) => {
            for e in &summary.row_errors {
                eprintln!("error: {e}");
            }
            if summary.check_failures > 0 {
                eprintln!("error: {} check failure(s)", summary.check_failures);
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let opts = match parse_common(&args.common) {
        Ok(o) => o,
        Err(e) => return usage_error(&e),
    };
    let spec = match parse_spec(&args.spec) {
        Ok(s) => s,
        Err(e) => return usage_error(&format!("--spec '{}': {e}", args.spec)),
    };
    let lengths = match parse_lengths(&args.lengths) {
        Ok(l) => l,
        Err(e) => return usage_error(&format!("--lengths: {e}")),
    };
    for label in spec.labels() {
        if !lengths.contains_key(&label) {
            return usage_error(&format!("--lengths is missing label '{label}'"));
        }
    }
    let items = vec![BenchItem { spec, lengths, shape: BenchShape::Explicit }];
    emit(&items, &opts, args.common.csv.as_ref())
}

fn cmd_sweep(args: SweepArgs) -> ExitCode {
    let opts = match parse_common(&args.common) {
        Ok(o) => o,
        Err(e) => return usage_error(&e),
    };
    if args.min == 0 || args.max < args.min {
        return usage_error("sweep needs 1 <= min <= max");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut items = Vec::new();
    for size in sweep_sizes(args.min, args.max, args.points) {
        let (m, n, k, shape) = match args.mode {
            Mode::Square => (size, size, size, BenchShape::Square),
            Mode::Rankk => (args.mn, args.mn, size, BenchShape::RankK { m: args.mn, n: args.mn }),
        };
        // three random contractions of similar shape per size
        for _ in 0..3 {
            let (spec, lengths) = random_contraction(m, n, k, &mut rng);
            items.push(BenchItem { spec, lengths, shape });
        }
    }
    emit(&items, &opts, args.common.csv.as_ref())
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Sweep(args) => cmd_sweep(args),
    }
}
