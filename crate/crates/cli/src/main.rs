use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use evosort::bench::{
    emit_report, format_table, run_pipeline_with, Dataset, ElementWidth, ParamsMode, PipelineConfig,
    DEFAULT_MEMORY_CAP_BYTES,
};
use evosort::model::symbolic_params;
use evosort::tuner::{run_ga_tuning_with, write_trace_csv, GaConfig};
use evosort::workers::available_workers;
use evosort::{adaptive_partition_sort, GeneBounds, SortBuffer, TuningParams, WorkerPool};

#[derive(Parser)]
#[command(name = "evosort", version, about = "GA-tuned hybrid parallel sorting benchmark")]
struct Cli {
    /// Worker threads for the sort kernels [default: hardware parallelism]
    #[arg(long, global = true, env = "EVOSORT_WORKERS")]
    workers: Option<NonZeroUsize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the GA tuner and write params.json and trace.csv
    Tune(TuneArgs),
    /// Print the symbolic-model params for a size as JSON
    Params {
        #[arg(long)]
        size: u64,
    },
    /// Sort a raw little-endian integer file into a new file
    Sort(SortArgs),
    /// Full pipeline: tune or model params, sort, validate, time baselines, report
    Bench(BenchArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ga,
    Symbolic,
    Manual,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Width {
    #[value(name = "32")]
    W32,
    #[value(name = "64")]
    W64,
}

impl From<Width> for ElementWidth {
    fn from(w: Width) -> Self {
        match w {
            Width::W32 => ElementWidth::W32,
            Width::W64 => ElementWidth::W64,
        }
    }
}

#[derive(Args)]
struct GaArgs {
    #[arg(long, default_value_t = 30)]
    population: usize,
    #[arg(long, default_value_t = 10)]
    generations: usize,
    /// Tune on this fraction of the size instead of the full array
    #[arg(long, default_value_t = 1.0)]
    sample_fraction: f64,
}

impl GaArgs {
    fn config(&self, seed: u64, width: ElementWidth, repeats: usize) -> GaConfig {
        GaConfig {
            population_size: self.population,
            generations: self.generations,
            sample_fraction: self.sample_fraction,
            evaluation_repeats: repeats,
            rng_seed: seed,
            element_width: width,
            ..GaConfig::default()
        }
    }
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "64")]
    element_width: Width,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value = "evosort-out")]
    out: PathBuf,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Args)]
struct SortArgs {
    input: PathBuf,
    /// Output file [default: <input>.sorted]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "64")]
    element_width: Width,
    /// Params JSON (object or 5-element list); symbolic model otherwise
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Sizes to benchmark (repeat the flag or separate with commas)
    #[arg(long, required = true, value_delimiter = ',')]
    size: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "symbolic")]
    mode: Mode,
    /// Params JSON for --mode manual
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "evosort-out")]
    out: PathBuf,
    /// Also write per-generation GA traces
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, value_enum, default_value = "64")]
    element_width: Width,
    /// Refuse datasets larger than this many bytes
    #[arg(long, default_value_t = DEFAULT_MEMORY_CAP_BYTES)]
    memory_cap: u64,
    #[command(flatten)]
    ga: GaArgs,
}

fn read_params(path: &Path) -> Result<TuningParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    TuningParams::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let workers = cli.workers.unwrap_or_else(available_workers);
    let pool = WorkerPool::new(workers).context("building worker pool")?;

    match cli.command {
        Command::Params { size } => {
            let params = symbolic_params(size)?;
            println!("{}", params.to_json());
        }
        Command::Tune(args) => tune(args, &pool)?,
        Command::Sort(args) => sort_file(args, &pool)?,
        Command::Bench(args) => bench(args, &pool)?,
    }
    Ok(())
}

fn tune(args: TuneArgs, pool: &WorkerPool) -> Result<()> {
    let config = args.ga.config(args.seed, args.element_width.into(), args.repeats);
    let outcome = run_ga_tuning_with(args.size, &GeneBounds::default(), &config, pool, |s, _| {
        eprintln!(
            "gen {:>3}  best {:.4}s  avg {:.4}s  worst {:.4}s  {}",
            s.generation, s.best_time, s.average_time, s.worst_time, s.best_genes
        );
    })?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let params_path = args.out.join("params.json");
    fs::write(&params_path, outcome.best.to_json() + "\n").with_context(|| format!("writing {}", params_path.display()))?;
    write_trace_csv(&args.out.join("trace.csv"), &outcome.trace)?;
    println!("{}", outcome.best.to_json());
    Ok(())
}

fn sort_file(args: SortArgs, pool: &WorkerPool) -> Result<()> {
    let width: ElementWidth = args.element_width.into();
    let bytes = fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let data = Dataset::from_le_bytes(&bytes, width)?;
    let params = match &args.params {
        Some(path) => read_params(path)?.validate(&GeneBounds::default())?,
        None => symbolic_params(data.len().max(1) as u64)?,
    };
    let (sorted, decision) = match data {
        Dataset::I32(v) => {
            let mut buf = SortBuffer::new(v);
            let d = adaptive_partition_sort(&mut buf, &params, pool);
            (Dataset::I32(buf.into_vec()), d)
        }
        Dataset::I64(v) => {
            let mut buf = SortBuffer::new(v);
            let d = adaptive_partition_sort(&mut buf, &params, pool);
            (Dataset::I64(buf.into_vec()), d)
        }
    };
    let out = args.out.unwrap_or_else(|| {
        let mut name = args.input.clone().into_os_string();
        name.push(".sorted");
        PathBuf::from(name)
    });
    fs::write(&out, sorted.to_le_bytes()).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("sorted {} elements via {} with {} -> {}", sorted.len(), decision.path, params, out.display());
    Ok(())
}

fn bench(args: BenchArgs, pool: &WorkerPool) -> Result<()> {
    let width: ElementWidth = args.element_width.into();
    let mode = match args.mode {
        Mode::Symbolic => ParamsMode::Symbolic,
        Mode::Ga => ParamsMode::Ga(args.ga.config(args.seed, width, args.repeats)),
        Mode::Manual => match &args.params {
            Some(path) => ParamsMode::Manual(read_params(path)?),
            None => bail!("--mode manual requires --params <file>"),
        },
    };
    let config = PipelineConfig {
        seed: args.seed,
        element_width: width,
        repeats: args.repeats,
        memory_cap_bytes: args.memory_cap,
        ..PipelineConfig::new(mode)
    };
    let report = run_pipeline_with(&args.size, &config, pool, |n, s| {
        eprintln!(
            "n={n} gen {:>3}  best {:.4}s  avg {:.4}s  worst {:.4}s  {}",
            s.generation, s.best_time, s.average_time, s.worst_time, s.best_genes
        );
    })?;
    let files = emit_report(&report, &args.out, args.trace)?;
    print!("{}", format_table(&report.results));
    eprintln!("wrote {} and {}", files.json.display(), files.csv.display());
    for t in &files.traces {
        eprintln!("wrote {}", t.display());
    }
    Ok(())
}
