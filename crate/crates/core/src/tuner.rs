//! Genetic-algorithm tuner: evolves [`TuningParams`] by timing
//! [`adaptive_partition_sort`] on a seeded sample.

use std::fmt::Debug;
use std::io;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{generate_dataset, BenchError, Dataset, DatasetSpec, ElementWidth};
use crate::dispatch::adaptive_partition_sort;
use crate::params::{GeneBounds, ParamsError, TuningParams};
use crate::sorters::{SortBuffer, SortElement};
use crate::workers::WorkerPool;

/// Fitness floor, so an empty sample still yields a positive, orderable time.
pub const MIN_FITNESS_S: f64 = 1e-9;

/// Stream separation between the sample generator and the GA operators.
const GA_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

pub const TRACE_HEADER: [&str; 5] = ["generation", "best_time_s", "worst_time_s", "avg_time_s", "best_genes"];

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("invalid GA config: {0}")]
    Config(String),
    #[error(transparent)]
    Bounds(#[from] ParamsError),
    #[error("sort with genes {genes} diverged from the reference at index {index}: expected {expected}, got {actual}")]
    Correctness {
        genes: TuningParams,
        index: usize,
        expected: String,
        actual: String,
    },
    #[error(transparent)]
    Data(#[from] BenchError),
    #[error("failed to write trace {path}: {source}")]
    Io { path: String, source: io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: TuningParams,
    /// Wall-clock seconds; `None` until evaluated.
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(genes: TuningParams) -> Self {
        Individual { genes, fitness: None }
    }

    fn fitness_or_inf(&self) -> f64 {
        self.fitness.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub recombination_probability: f64,
    pub mutation_probability: f64,
    pub elite_count: usize,
    pub tournament_size: usize,
    /// Timed runs per evaluation; the minimum is kept.
    pub evaluation_repeats: usize,
    pub rng_seed: u64,
    /// Fraction of `n` actually sampled; `1.0` tunes on the full size.
    pub sample_fraction: f64,
    pub element_width: ElementWidth,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 30,
            generations: 10,
            recombination_probability: 0.7,
            mutation_probability: 0.3,
            elite_count: 1,
            tournament_size: 2,
            evaluation_repeats: 1,
            rng_seed: 42,
            sample_fraction: 1.0,
            element_width: ElementWidth::W64,
        }
    }
}

impl GaConfig {
    pub fn check(&self) -> Result<(), TuneError> {
        let fail = |msg: &str| Err(TuneError::Config(msg.to_string()));
        if self.population_size < 2 {
            return fail("population_size must be >= 2");
        }
        if self.elite_count >= self.population_size {
            return fail("elite_count must be < population_size");
        }
        if self.tournament_size < 1 {
            return fail("tournament_size must be >= 1");
        }
        if self.evaluation_repeats < 1 {
            return fail("evaluation_repeats must be >= 1");
        }
        for (name, p) in [
            ("recombination_probability", self.recombination_probability),
            ("mutation_probability", self.mutation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(TuneError::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return fail("sample_fraction must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn sample_len(&self, n: usize) -> usize {
        (n as f64 * self.sample_fraction).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_time: f64,
    pub worst_time: f64,
    pub average_time: f64,
    pub best_genes: TuningParams,
}

impl GenerationStats {
    /// Summarizes an evaluated population. Panics if it is empty or unevaluated.
    pub fn of(generation: usize, population: &[Individual]) -> Self {
        let times: Vec<f64> = population
            .iter()
            .map(|i| i.fitness.expect("population must be evaluated"))
            .collect();
        let best = best_index(population).expect("empty population");
        GenerationStats {
            generation,
            best_time: times[best],
            worst_time: times.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            average_time: times.iter().sum::<f64>() / times.len() as f64,
            best_genes: population[best].genes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningOutcome {
    pub best: TuningParams,
    pub best_time: f64,
    pub trace: Vec<GenerationStats>,
}

/// Seeded generator for the GA operators.
pub fn ga_rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed ^ GA_STREAM)
}

fn random_genes<R: Rng>(bounds: &GeneBounds, rng: &mut R) -> TuningParams {
    TuningParams {
        insertion_threshold: rng.gen_range(bounds.insertion_threshold.as_range()),
        parallel_merge_threshold: rng.gen_range(bounds.parallel_merge_threshold.as_range()),
        algorithm: *bounds.algorithms.choose(rng).expect("non-empty code set"),
        fallback_threshold: rng.gen_range(bounds.fallback_threshold.as_range()),
        tile_size: rng.gen_range(bounds.tile_size.as_range()),
    }
}

pub fn init_population<R: Rng>(bounds: &GeneBounds, config: &GaConfig, rng: &mut R) -> Vec<Individual> {
    (0..config.population_size)
        .map(|_| Individual::new(random_genes(bounds, rng)))
        .collect()
}

/// Times `individual` on fresh copies of `sample`, checking each result
/// against `reference`. Fitness is the fastest run, floored at [`MIN_FITNESS_S`].
pub fn evaluate<T: SortElement + Debug>(
    individual: &Individual,
    sample: &[T],
    reference: &[T],
    pool: &WorkerPool,
    repeats: usize,
) -> Result<Individual, TuneError> {
    let mut best = f64::INFINITY;
    for _ in 0..repeats.max(1) {
        let mut buf = SortBuffer::new(sample.to_vec());
        let start = Instant::now();
        adaptive_partition_sort(&mut buf, &individual.genes, pool);
        let elapsed = start.elapsed().as_secs_f64();
        if let Some(index) = first_mismatch(buf.as_slice(), reference) {
            return Err(TuneError::Correctness {
                genes: individual.genes,
                index,
                expected: format!("{:?}", reference.get(index)),
                actual: format!("{:?}", buf.as_slice().get(index)),
            });
        }
        best = best.min(elapsed);
    }
    Ok(Individual {
        genes: individual.genes,
        fitness: Some(best.max(MIN_FITNESS_S)),
    })
}

pub(crate) fn first_mismatch<T: PartialEq>(got: &[T], expected: &[T]) -> Option<usize> {
    got.iter()
        .zip(expected)
        .position(|(g, e)| g != e)
        .or_else(|| (got.len() != expected.len()).then(|| got.len().min(expected.len())))
}

fn best_index(population: &[Individual]) -> Option<usize> {
    (0..population.len()).min_by(|&a, &b| population[a].fitness_or_inf().total_cmp(&population[b].fitness_or_inf()))
}

fn tournament<'a, R: Rng>(population: &'a [Individual], size: usize, rng: &mut R) -> &'a Individual {
    let mut winner = &population[rng.gen_range(0..population.len())];
    for _ in 1..size {
        let challenger = &population[rng.gen_range(0..population.len())];
        if challenger.fitness_or_inf() < winner.fitness_or_inf() {
            winner = challenger;
        }
    }
    winner
}

/// Each gene comes from `a` or `b` on a fair coin.
fn uniform_crossover<R: Rng>(a: &TuningParams, b: &TuningParams, rng: &mut R) -> TuningParams {
    let mut from_b = || rng.gen_bool(0.5);
    TuningParams {
        insertion_threshold: if from_b() { b.insertion_threshold } else { a.insertion_threshold },
        parallel_merge_threshold: if from_b() { b.parallel_merge_threshold } else { a.parallel_merge_threshold },
        algorithm: if from_b() { b.algorithm } else { a.algorithm },
        fallback_threshold: if from_b() { b.fallback_threshold } else { a.fallback_threshold },
        tile_size: if from_b() { b.tile_size } else { a.tile_size },
    }
}

fn mutate<R: Rng>(genes: &mut TuningParams, bounds: &GeneBounds, probability: f64, rng: &mut R) {
    if rng.gen_bool(probability) {
        genes.insertion_threshold = rng.gen_range(bounds.insertion_threshold.as_range());
    }
    if rng.gen_bool(probability) {
        genes.parallel_merge_threshold = rng.gen_range(bounds.parallel_merge_threshold.as_range());
    }
    if rng.gen_bool(probability) {
        genes.algorithm = *bounds.algorithms.choose(rng).expect("non-empty code set");
    }
    if rng.gen_bool(probability) {
        genes.fallback_threshold = rng.gen_range(bounds.fallback_threshold.as_range());
    }
    if rng.gen_bool(probability) {
        genes.tile_size = rng.gen_range(bounds.tile_size.as_range());
    }
}

/// Produces the next generation from an evaluated population.
///
/// The `elite_count` fittest individuals carry over unchanged, fitness
/// included. Each remaining child comes from two tournament winners:
/// uniform crossover with the recombination probability (otherwise a clone
/// of the first winner), then per-gene uniform mutation. Decisions depend only on the
/// recorded fitness values and `rng`.
pub fn evolve<R: Rng>(population: &[Individual], bounds: &GeneBounds, config: &GaConfig, rng: &mut R) -> Vec<Individual> {
    let mut ranked: Vec<&Individual> = population.iter().collect();
    ranked.sort_by(|a, b| a.fitness_or_inf().total_cmp(&b.fitness_or_inf()));

    let mut next: Vec<Individual> = ranked.iter().take(config.elite_count).map(|i| **i).collect();
    while next.len() < config.population_size {
        let p1 = tournament(population, config.tournament_size, rng);
        let p2 = tournament(population, config.tournament_size, rng);
        let mut child = if rng.gen_bool(config.recombination_probability) {
            uniform_crossover(&p1.genes, &p2.genes, rng)
        } else {
            p1.genes
        };
        mutate(&mut child, bounds, config.mutation_probability, rng);
        next.push(Individual::new(child));
    }
    next
}

/// Runs the GA on a freshly generated sample of `config.sample_len(n)` integers.
pub fn run_ga_tuning(n: usize, bounds: &GeneBounds, config: &GaConfig, pool: &WorkerPool) -> Result<TuningOutcome, TuneError> {
    run_ga_tuning_with(n, bounds, config, pool, |_, _| {})
}

/// As [`run_ga_tuning`], calling `on_generation` with the stats and the scored
/// population after each generation.
pub fn run_ga_tuning_with(
    n: usize,
    bounds: &GeneBounds,
    config: &GaConfig,
    pool: &WorkerPool,
    on_generation: impl FnMut(&GenerationStats, &[Individual]),
) -> Result<TuningOutcome, TuneError> {
    config.check()?;
    bounds.check()?;
    let spec = DatasetSpec::uniform(config.sample_len(n), config.element_width, config.rng_seed);
    match generate_dataset(&spec)? {
        Dataset::I32(sample) => tune_on(&sample, bounds, config, pool, on_generation),
        Dataset::I64(sample) => tune_on(&sample, bounds, config, pool, on_generation),
    }
}

/// GA loop over an explicit sample.
pub fn tune_on<T: SortElement + Debug>(
    sample: &[T],
    bounds: &GeneBounds,
    config: &GaConfig,
    pool: &WorkerPool,
    mut on_generation: impl FnMut(&GenerationStats, &[Individual]),
) -> Result<TuningOutcome, TuneError> {
    config.check()?;
    bounds.check()?;
    let mut reference = sample.to_vec();
    reference.sort();

    let mut rng = ga_rng(config.rng_seed);
    let mut population = init_population(bounds, config, &mut rng);
    let mut trace = Vec::with_capacity(config.generations);
    let mut best: Option<Individual> = None;

    for generation in 0..config.generations {
        // evaluations stay sequential so timings do not interfere
        for individual in population.iter_mut().filter(|i| i.fitness.is_none()) {
            *individual = evaluate(individual, sample, &reference, pool, config.evaluation_repeats)?;
        }
        let stats = GenerationStats::of(generation, &population);
        if best.is_none_or(|b| stats.best_time < b.fitness_or_inf()) {
            best = Some(Individual { genes: stats.best_genes, fitness: Some(stats.best_time) });
        }
        on_generation(&stats, &population);
        trace.push(stats);
        if generation + 1 < config.generations {
            population = evolve(&population, bounds, config, &mut rng);
        }
    }

    let best = match best {
        Some(b) => b,
        // zero generations: nothing was timed, fall back to the first candidate
        None => Individual { genes: population[0].genes, fitness: Some(f64::INFINITY) },
    };
    Ok(TuningOutcome {
        best: best.genes,
        best_time: best.fitness_or_inf(),
        trace,
    })
}

/// Writes the per-generation trace as CSV with [`TRACE_HEADER`] columns.
pub fn write_trace_csv(path: &Path, trace: &[GenerationStats]) -> Result<(), TuneError> {
    let io_err = |source: io::Error| TuneError::Io { path: path.display().to_string(), source };
    let mut writer = csv::Writer::from_path(path).map_err(|e| io_err(e.into()))?;
    writer.write_record(TRACE_HEADER).map_err(|e| io_err(e.into()))?;
    for s in trace {
        writer
            .write_record([
                s.generation.to_string(),
                s.best_time.to_string(),
                s.worst_time.to_string(),
                s.average_time.to_string(),
                s.best_genes.to_string(),
            ])
            .map_err(|e| io_err(e.into()))?;
    }
    writer.flush().map_err(io_err)
}
