use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netbatch_core::batchfile::{parse_batches, write_batches};
use netbatch_core::export::{
    select_training_nets, training_conflict_graph, write_training_records, DEFAULT_MIN_BATCH_SIZE,
};
use netbatch_core::netlist::default_span;
use netbatch_core::occupancy::DEFAULT_DENSE_THRESHOLD;
use netbatch_core::reallocator::DEFAULT_MAX_BATCH_SIZE;
use netbatch_core::{
    compare_strategies, run_pipeline, validate_result, Error, GeneratorModel, GridDims, Netlist,
    PipelineConfig, SynthConfig,
};

/// Layer-aware net batching for parallel global routing.
#[derive(Parser)]
#[command(name = "netbatch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic netlist.
    Gen(GenArgs),
    /// Batch a netlist and write the batch file and stats.
    Batch(BatchArgs),
    /// Check a batch file against a netlist.
    Validate(ValidateArgs),
    /// Compare first-fit under each overlap strategy with the pipeline.
    Compare(CompareArgs),
    /// Write training records and the conflict edge list.
    ExportTraining(ExportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Grid width, height and layer count.
    #[arg(long, num_args = 3, value_names = ["W", "H", "L"], value_parser = clap::value_parser!(u32).range(1..), required = true)]
    grid: Vec<u32>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    nets: u64,
    /// Minimum and maximum pins per net.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [2, 8])]
    pins: Vec<usize>,
    /// Side of the window each net's pins are drawn from [default: max(min(W,H)/16, 4)].
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    span: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EngineArgs {
    /// Generator model file; a seeded spatial hash is used when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Initial batch count (ignored with --model, which fixes its own).
    #[arg(short = 'B', long = "batches", default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    n_batches: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_BATCH_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_batch_size: u64,
    /// Dense/sparse switch point in cells summed over parallel maps.
    #[arg(long, default_value_t = DEFAULT_DENSE_THRESHOLD, value_parser = clap::value_parser!(u64).range(1..))]
    threshold: u64,
    /// Worker threads [default: available cores].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BatchArgs {
    /// Netlist file.
    #[arg(short, long)]
    input: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Batch file path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Stats as `key = value` lines; stderr when omitted.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Stats as JSON.
    #[arg(long)]
    stats_json: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    batches: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Print the table as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    batches: PathBuf,
    /// Keep only batches with more than this many nets.
    #[arg(long, default_value_t = DEFAULT_MIN_BATCH_SIZE)]
    min_size: usize,
    /// Net record output.
    #[arg(short, long)]
    output: PathBuf,
    /// Conflict edge list output.
    #[arg(long)]
    edges: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Data(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }

    fn core(path: Option<&Path>, e: Error) -> Self {
        let prefix = path
            .map(|p| format!("{}: ", p.display()))
            .unwrap_or_default();
        match e {
            Error::Io(e) => Failure::Io(format!("{prefix}{e}")),
            Error::Config(_) => Failure::Usage(format!("{prefix}{e}")),
            other => Failure::Data(format!("{prefix}{other}")),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::io(path, e))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(path, e))
}

/// Runs `f` against the file at `path`, or stdout when `path` is `None`.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Failure::io(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e))
        }
    }
}

fn read_netlist(path: &Path) -> CliResult<Netlist> {
    Netlist::parse(open(path)?).map_err(|e| Failure::core(Some(path), e))
}

fn read_batches(path: &Path) -> CliResult<Vec<Vec<u32>>> {
    parse_batches(open(path)?).map_err(|e| Failure::core(Some(path), e))
}

fn config(engine: &EngineArgs) -> CliResult<PipelineConfig> {
    let model = match &engine.model {
        Some(path) => {
            Some(GeneratorModel::load(open(path)?).map_err(|e| Failure::core(Some(path), e))?)
        }
        None => None,
    };
    let usize_of = |v: u64, name: &str| {
        usize::try_from(v).map_err(|_| Failure::Usage(format!("--{name} {v} is too large")))
    };
    Ok(PipelineConfig {
        model,
        n_batches: usize_of(engine.n_batches, "batches")?,
        max_batch_size: usize_of(engine.max_batch_size, "max-batch-size")?,
        threshold: engine.threshold,
        workers: engine
            .workers
            .map(|w| usize_of(w, "workers"))
            .transpose()?
            .unwrap_or(0),
        seed: engine.seed,
        chunk_size: None,
    })
}

fn gen(args: GenArgs) -> CliResult {
    let grid = GridDims::new(args.grid[0], args.grid[1], args.grid[2])
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (lo, hi) = (args.pins[0], args.pins[1]);
    if lo == 0 || lo > hi {
        return Err(Failure::Usage(format!(
            "--pins {lo} {hi}: need 1 ≤ MIN ≤ MAX"
        )));
    }
    let nets = usize::try_from(args.nets).map_err(|_| Failure::Usage("--nets too large".into()))?;
    let synth = SynthConfig::new(grid, nets, lo..=hi, args.seed)
        .with_span(args.span.unwrap_or_else(|| default_span(&grid)));
    let netlist = synth
        .generate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    with_output(args.output.as_deref(), |w| netlist.write(w))
}

fn batch(args: BatchArgs) -> CliResult {
    let config = config(&args.engine)?;
    let netlist = read_netlist(&args.input)?;
    let (result, stats) = run_pipeline(&netlist, &config).map_err(|e| Failure::core(None, e))?;
    let report = validate_result(&result.batches, &netlist);
    if !report.is_valid() {
        return Err(Failure::Data(format!(
            "internal validation failed:\n{report}"
        )));
    }
    with_output(args.output.as_deref(), |w| {
        write_batches(w, &result.batches)
    })?;
    let text = stats.to_kv_text();
    match &args.stats {
        Some(p) => with_output(Some(p), |w| w.write_all(text.as_bytes()))?,
        None => eprint!("{text}"),
    }
    if let Some(p) = &args.stats_json {
        with_output(Some(p), |w| writeln!(w, "{}", stats.to_json()))?;
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> CliResult {
    let netlist = read_netlist(&args.input)?;
    let batches = read_batches(&args.batches)?;
    let report = validate_result(&batches, &netlist);
    if report.is_valid() {
        println!("valid: {} nets in {} batches", netlist.len(), batches.len());
        Ok(())
    } else {
        Err(Failure::Data(format!(
            "invalid batches\n{}",
            report.to_string().trim_end()
        )))
    }
}

fn compare(args: CompareArgs) -> CliResult {
    let config = config(&args.engine)?;
    let netlist = read_netlist(&args.input)?;
    let table = compare_strategies(&netlist, &config).map_err(|e| Failure::core(None, e))?;
    if args.json {
        println!("{}", table.to_json());
    } else {
        print!("{table}");
    }
    Ok(())
}

fn export_training(args: ExportArgs) -> CliResult {
    let netlist = read_netlist(&args.input)?;
    let batches = read_batches(&args.batches)?;
    let report = validate_result(&batches, &netlist);
    if !report.unknown.is_empty() || !report.duplicated.is_empty() {
        return Err(Failure::Data(format!(
            "{}: {}",
            args.batches.display(),
            report.to_string().trim_end()
        )));
    }
    let selected = select_training_nets(&batches, args.min_size);
    with_output(Some(&args.output), |w| {
        write_training_records(w, &netlist, &selected)
    })?;
    let graph = training_conflict_graph(&netlist, &selected);
    with_output(Some(&args.edges), |w| graph.write_edge_list(w))?;
    eprintln!(
        "exported {} nets, {} conflict edges",
        selected.len(),
        graph.edge_count()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Batch(a) => batch(a),
        Command::Validate(a) => validate(a),
        Command::Compare(a) => compare(a),
        Command::ExportTraining(a) => export_training(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Usage(m) | Failure::Data(m) | Failure::Io(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
