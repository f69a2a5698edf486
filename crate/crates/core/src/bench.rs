//! Benchmark pipeline: seeded data generation, parameter selection (GA,
//! symbolic or manual), validated sorting, baseline timing and reports.

use std::collections::BTreeMap;
use std::fmt::{self, Debug, Write as _};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispatch::{adaptive_partition_sort, SortPath};
use crate::model::{ModelError, SymbolicParamSet};
use crate::params::{GeneBounds, ParamsError, TuningParams};
use crate::sorters::{SortBuffer, SortElement};
use crate::tuner::{first_mismatch, run_ga_tuning_with, write_trace_csv, GaConfig, GenerationStats, TuneError};
use crate::workers::WorkerPool;

pub const DEFAULT_LOW: i64 = -1_000_000_000;
pub const DEFAULT_HIGH: i64 = 1_000_000_000;
pub const DEFAULT_MEMORY_CAP_BYTES: u64 = 8 << 30;

pub const BASELINE_UNSTABLE: &str = "baseline_unstable";
pub const BASELINE_STABLE: &str = "baseline_stable";

/// Floor applied to every recorded time so speedups stay finite.
pub const MIN_TIME_S: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("refusing to allocate {requested} bytes of element data (cap {cap} bytes)")]
    MemoryCap { requested: u64, cap: u64 },
    #[error("no sizes given")]
    NoSizes,
    #[error("validation failed for n = {n}: first divergence at index {index}, expected {expected}, got {actual}")]
    ValidationMismatch {
        n: usize,
        index: usize,
        expected: String,
        actual: String,
    },
    #[error("result for n = {0} is not validated; refusing to report it")]
    Unvalidated(usize),
    #[error(transparent)]
    Tune(#[from] Box<TuneError>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl From<TuneError> for BenchError {
    fn from(e: TuneError) -> Self {
        BenchError::Tune(Box::new(e))
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ElementWidth {
    W32,
    W64,
}

impl ElementWidth {
    pub fn bits(self) -> u8 {
        match self {
            ElementWidth::W32 => 32,
            ElementWidth::W64 => 64,
        }
    }

    pub fn bytes(self) -> usize {
        self.bits() as usize / 8
    }
}

impl TryFrom<u8> for ElementWidth {
    type Error = String;

    fn try_from(bits: u8) -> Result<Self, Self::Error> {
        match bits {
            32 => Ok(ElementWidth::W32),
            64 => Ok(ElementWidth::W64),
            other => Err(format!("element width must be 32 or 64, got {other}")),
        }
    }
}

impl From<ElementWidth> for u8 {
    fn from(w: ElementWidth) -> u8 {
        w.bits()
    }
}

impl fmt::Display for ElementWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

/// `n` i.i.d. integers uniform on `[low, high]`, from a seeded xoshiro256++ stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub n: usize,
    pub element_width: ElementWidth,
    pub low: i64,
    pub high: i64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn uniform(n: usize, element_width: ElementWidth, seed: u64) -> Self {
        DatasetSpec { n, element_width, low: DEFAULT_LOW, high: DEFAULT_HIGH, seed }
    }

    pub fn check(&self) -> Result<(), BenchError> {
        if self.low >= self.high {
            return Err(BenchError::InvalidSpec(format!("low {} must be < high {}", self.low, self.high)));
        }
        if self.element_width == ElementWidth::W32
            && (self.low < i32::MIN as i64 || self.high > i32::MAX as i64)
        {
            return Err(BenchError::InvalidSpec("range exceeds 32-bit elements".into()));
        }
        Ok(())
    }

    pub fn bytes(&self) -> u64 {
        self.n as u64 * self.element_width.bytes() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dataset {
    I32(Vec<i32>),
    I64(Vec<i64>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::I32(v) => v.len(),
            Dataset::I64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> ElementWidth {
        match self {
            Dataset::I32(_) => ElementWidth::W32,
            Dataset::I64(_) => ElementWidth::W64,
        }
    }

    /// Raw little-endian two's-complement bytes, no header.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        match self {
            Dataset::I32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Dataset::I64(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    pub fn from_le_bytes(bytes: &[u8], width: ElementWidth) -> Result<Self, BenchError> {
        if !bytes.len().is_multiple_of(width.bytes()) {
            return Err(BenchError::InvalidSpec(format!(
                "{} bytes is not a whole number of {}-bit elements",
                bytes.len(),
                width.bits()
            )));
        }
        Ok(match width {
            ElementWidth::W32 => Dataset::I32(
                bytes.chunks_exact(4).map(|c| i32::from_le_bytes(c.try_into().unwrap())).collect(),
            ),
            ElementWidth::W64 => Dataset::I64(
                bytes.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect(),
            ),
        })
    }
}

pub fn generate_dataset(spec: &DatasetSpec) -> Result<Dataset, BenchError> {
    generate_dataset_capped(spec, DEFAULT_MEMORY_CAP_BYTES)
}

/// Both widths draw the same `i64` sequence; 32-bit data narrows each draw.
pub fn generate_dataset_capped(spec: &DatasetSpec, cap_bytes: u64) -> Result<Dataset, BenchError> {
    spec.check()?;
    if spec.bytes() > cap_bytes {
        return Err(BenchError::MemoryCap { requested: spec.bytes(), cap: cap_bytes });
    }
    let rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
    let draws = Uniform::new_inclusive(spec.low, spec.high).sample_iter(rng).take(spec.n);
    Ok(match spec.element_width {
        ElementWidth::W32 => Dataset::I32(draws.map(|x| x as i32).collect()),
        ElementWidth::W64 => Dataset::I64(draws.collect()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamsSource {
    Ga,
    Symbolic,
    Manual,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamsMode {
    Ga(GaConfig),
    Symbolic,
    Manual(TuningParams),
}

impl ParamsMode {
    pub fn source(&self) -> ParamsSource {
        match self {
            ParamsMode::Ga(_) => ParamsSource::Ga,
            ParamsMode::Symbolic => ParamsSource::Symbolic,
            ParamsMode::Manual(_) => ParamsSource::Manual,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mode: ParamsMode,
    pub seed: u64,
    pub element_width: ElementWidth,
    /// Timed runs per measurement; the minimum is reported.
    pub repeats: usize,
    pub bounds: GeneBounds,
    pub memory_cap_bytes: u64,
}

impl PipelineConfig {
    pub fn new(mode: ParamsMode) -> Self {
        PipelineConfig {
            mode,
            seed: 42,
            element_width: ElementWidth::W64,
            repeats: 1,
            bounds: GeneBounds::default(),
            memory_cap_bytes: DEFAULT_MEMORY_CAP_BYTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub spec: DatasetSpec,
    pub params: TuningParams,
    pub params_source: ParamsSource,
    pub path: SortPath,
    pub evosort_time_s: f64,
    pub baseline_times_s: BTreeMap<String, f64>,
    /// `baseline / evosort` per baseline; 1.0 for empty inputs.
    pub speedup: BTreeMap<String, f64>,
    pub validated: bool,
}

/// GA trace for one benchmarked size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeTrace {
    pub n: usize,
    pub trace: Vec<GenerationStats>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineReport {
    pub results: Vec<BenchResult>,
    pub traces: Vec<SizeTrace>,
}

/// Runs the full pipeline for every size, aborting on the first validation failure.
pub fn run_pipeline(sizes: &[usize], config: &PipelineConfig, pool: &WorkerPool) -> Result<PipelineReport, BenchError> {
    run_pipeline_with(sizes, config, pool, |_, _| {})
}

/// As [`run_pipeline`], forwarding GA progress as `(n, stats)`.
pub fn run_pipeline_with(
    sizes: &[usize],
    config: &PipelineConfig,
    pool: &WorkerPool,
    mut on_generation: impl FnMut(usize, &GenerationStats),
) -> Result<PipelineReport, BenchError> {
    if sizes.is_empty() {
        return Err(BenchError::NoSizes);
    }
    config.bounds.check()?;
    let mut report = PipelineReport::default();
    for &n in sizes {
        let spec = DatasetSpec::uniform(n, config.element_width, config.seed);
        // refuse before tuning spends time on a size that cannot be held
        if spec.bytes() > config.memory_cap_bytes {
            return Err(BenchError::MemoryCap { requested: spec.bytes(), cap: config.memory_cap_bytes });
        }
        let params = match &config.mode {
            ParamsMode::Manual(p) => p.validate(&config.bounds)?,
            ParamsMode::Symbolic => SymbolicParamSet::default().params_for(n.max(1) as u64, &config.bounds)?,
            ParamsMode::Ga(ga) => {
                let ga = GaConfig {
                    rng_seed: config.seed.wrapping_add(1),
                    element_width: config.element_width,
                    ..ga.clone()
                };
                let outcome = run_ga_tuning_with(n, &config.bounds, &ga, pool, |s, _| on_generation(n, s))?;
                report.traces.push(SizeTrace { n, trace: outcome.trace });
                outcome.best
            }
        };
        let data = generate_dataset_capped(&spec, config.memory_cap_bytes)?;
        let timings = match data {
            Dataset::I32(v) => measure(v, &params, pool, config.repeats)?,
            Dataset::I64(v) => measure(v, &params, pool, config.repeats)?,
        };
        report.results.push(timings.into_result(spec, params, config.mode.source()));
    }
    Ok(report)
}

struct Timings {
    path: SortPath,
    evosort: f64,
    baselines: BTreeMap<String, f64>,
}

impl Timings {
    fn into_result(self, spec: DatasetSpec, params: TuningParams, params_source: ParamsSource) -> BenchResult {
        let speedup = self
            .baselines
            .iter()
            .map(|(name, &t)| (name.clone(), if spec.n == 0 { 1.0 } else { t / self.evosort }))
            .collect();
        BenchResult {
            spec,
            params,
            params_source,
            path: self.path,
            evosort_time_s: self.evosort,
            baseline_times_s: self.baselines,
            speedup,
            validated: true,
        }
    }
}

fn time_min(repeats: usize, mut run: impl FnMut() -> f64) -> f64 {
    (0..repeats.max(1)).map(|_| run()).fold(f64::INFINITY, f64::min).max(MIN_TIME_S)
}

fn measure<T: SortElement + Debug>(
    data: Vec<T>,
    params: &TuningParams,
    pool: &WorkerPool,
    repeats: usize,
) -> Result<Timings, BenchError> {
    let mut reference = data.clone();
    reference.sort();

    let mut path = SortPath::HostStandardSort;
    let mut mismatch = None;
    let evosort = time_min(repeats, || {
        let mut buf = SortBuffer::new(data.clone());
        let start = Instant::now();
        path = adaptive_partition_sort(&mut buf, params, pool).path;
        let elapsed = start.elapsed().as_secs_f64();
        if mismatch.is_none() {
            mismatch = first_mismatch(buf.as_slice(), &reference)
                .map(|i| (i, format!("{:?}", reference.get(i)), format!("{:?}", buf.as_slice().get(i))));
        }
        elapsed
    });
    if let Some((index, expected, actual)) = mismatch {
        return Err(BenchError::ValidationMismatch { n: data.len(), index, expected, actual });
    }

    let unstable = time_min(repeats, || {
        let mut copy = data.clone();
        let start = Instant::now();
        copy.sort_unstable();
        start.elapsed().as_secs_f64()
    });
    let stable = time_min(repeats, || {
        let mut copy = data.clone();
        let start = Instant::now();
        copy.sort();
        start.elapsed().as_secs_f64()
    });
    let baselines = BTreeMap::from([(BASELINE_UNSTABLE.to_string(), unstable), (BASELINE_STABLE.to_string(), stable)]);
    Ok(Timings { path, evosort, baselines })
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub traces: Vec<PathBuf>,
}

pub const RESULTS_CSV_HEADER: [&str; 12] = [
    "n",
    "element_width",
    "seed",
    "params_source",
    "params",
    "path",
    "evosort_s",
    "baseline_unstable_s",
    "baseline_stable_s",
    "speedup_unstable",
    "speedup_stable",
    "validated",
];

/// Writes `results.json`, `results.csv` and, when `include_traces` is set,
/// one `trace_<n>.csv` per GA-tuned size into `out_dir`.
pub fn emit_report(report: &PipelineReport, out_dir: &Path, include_traces: bool) -> Result<ReportFiles, BenchError> {
    if let Some(r) = report.results.iter().find(|r| !r.validated) {
        return Err(BenchError::Unvalidated(r.spec.n));
    }
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;

    let json = out_dir.join("results.json");
    let text = serde_json::to_string_pretty(&report.results).expect("results serialize");
    fs::write(&json, text + "\n").map_err(io_error(&json))?;

    let csv_path = out_dir.join("results.csv");
    write_results_csv(&csv_path, &report.results).map_err(io_error(&csv_path))?;

    let mut traces = Vec::new();
    if include_traces {
        for t in &report.traces {
            let path = out_dir.join(format!("trace_{}.csv", t.n));
            write_trace_csv(&path, &t.trace)?;
            traces.push(path);
        }
    }
    Ok(ReportFiles { json, csv: csv_path, traces })
}

fn write_results_csv(path: &Path, results: &[BenchResult]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULTS_CSV_HEADER)?;
    let get = |m: &BTreeMap<String, f64>, k: &str| m.get(k).map(|v| v.to_string()).unwrap_or_default();
    for r in results {
        w.write_record([
            r.spec.n.to_string(),
            r.spec.element_width.to_string(),
            r.spec.seed.to_string(),
            serde_json::to_value(r.params_source).unwrap().as_str().unwrap().to_string(),
            r.params.to_string(),
            r.path.to_string(),
            r.evosort_time_s.to_string(),
            get(&r.baseline_times_s, BASELINE_UNSTABLE),
            get(&r.baseline_times_s, BASELINE_STABLE),
            get(&r.speedup, BASELINE_UNSTABLE),
            get(&r.speedup, BASELINE_STABLE),
            r.validated.to_string(),
        ])?;
    }
    w.flush()
}

/// Human-readable timing table: size, EvoSort seconds, then seconds and
/// speedup for each baseline.
pub fn format_table(results: &[BenchResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8} | {:>11} | {:>15} {:>8} | {:>15} {:>8}",
        "n", "EvoSort (s)", "unstable (s)", "Speedup", "stable (s)", "Speedup"
    );
    let _ = writeln!(out, "{}", "-".repeat(80));
    for r in results {
        let cell = |k: &str| {
            (
                r.baseline_times_s.get(k).copied().unwrap_or(f64::NAN),
                r.speedup.get(k).copied().unwrap_or(f64::NAN),
            )
        };
        let (tu, su) = cell(BASELINE_UNSTABLE);
        let (ts, ss) = cell(BASELINE_STABLE);
        let _ = writeln!(
            out,
            "{:>8} | {:>11.4} | {:>15.4} {:>7.1}x | {:>15.4} {:>7.1}x",
            human_size(r.spec.n),
            r.evosort_time_s,
            tu,
            su,
            ts,
            ss
        );
    }
    out
}

/// `100000000` -> `100M`; sizes that are not round stay numeric.
pub fn human_size(n: usize) -> String {
    for (unit, suffix) in [(1_000_000_000, "B"), (1_000_000, "M"), (1_000, "K")] {
        if n >= unit && n.is_multiple_of(unit) {
            return format!("{}{}", n / unit, suffix);
        }
    }
    n.to_string()
}
