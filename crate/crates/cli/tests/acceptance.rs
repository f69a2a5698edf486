//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each, and exits non-zero if any criterion fails.
//!
//! Set `ACCEPTANCE_ONLY=<substring>` to run a subset.

use std::num::NonZeroUsize;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use evosort::bench::{generate_dataset, run_pipeline, Dataset, DatasetSpec, ElementWidth, ParamsMode, PipelineConfig, BASELINE_STABLE};
use evosort::model::{ExtremumKind, FALLBACK_MODEL, INSERTION_MODEL, PARALLEL_MERGE_MODEL, TILE_MODEL};
use evosort::sorters::{
    insertion_sort, radix_sort_signed, refined_parallel_mergesort, MergesortPlan, RadixElement, RadixPassPlan,
};
use evosort::tuner::{run_ga_tuning_with, GaConfig};
use evosort::workers::available_workers;
use evosort::{adaptive_partition_sort, AlgorithmCode, GeneBounds, SortBuffer, SortElement, SortPath, TuningParams, WorkerPool};

/// `Ok(Verdict::Skip)` marks an informational criterion whose precondition
/// does not hold on this machine; it does not fail the suite.
enum Verdict {
    Pass(String),
    Skip(String),
}

type Outcome = Result<Verdict, String>;

struct Criterion {
    name: &'static str,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "correctness oracle suite", run: correctness_oracle_suite },
        Criterion { name: "xor key properties", run: xor_key_properties },
        Criterion { name: "ga properties", run: ga_properties },
        Criterion { name: "ga convergence shape", run: ga_convergence_shape },
        Criterion { name: "symbolic model vertices", run: symbolic_model_vertices },
        Criterion { name: "desk-scale speedup", run: desk_scale_speedup },
        Criterion { name: "dispatcher boundary", run: dispatcher_boundary },
        Criterion { name: "bench determinism", run: bench_determinism },
    ];
    let filter = std::env::var("ACCEPTANCE_ONLY").ok();
    let mut failed = 0;
    for c in &criteria {
        if filter.as_deref().is_some_and(|f| !c.name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(Verdict::Pass(detail)) => println!("PASS  {:<26} ({secs:.1}s) {detail}", c.name),
            Ok(Verdict::Skip(detail)) => println!("SKIP  {:<26} ({secs:.1}s) {detail}", c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:<26} ({secs:.1}s) {detail}", c.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pool(workers: usize) -> WorkerPool {
    WorkerPool::new(NonZeroUsize::new(workers).unwrap()).unwrap()
}

fn uniform_i64(n: usize, low: i64, high: i64, seed: u64) -> Vec<i64> {
    let spec = DatasetSpec { n, element_width: ElementWidth::W64, low, high, seed };
    match generate_dataset(&spec).unwrap() {
        Dataset::I64(v) => v,
        Dataset::I32(_) => unreachable!(),
    }
}

const SIZES: [usize; 9] = [0, 1, 2, 17, 255, 256, 257, 1_000, 100_000];
const PATTERNS: [&str; 6] = ["uniform", "full-range+extremes", "narrow", "all-equal", "sorted", "reverse"];

/// Test array over `[lo, hi]` (the element type's range for extremes).
fn pattern(kind: &str, n: usize, lo: i64, hi: i64, seed: u64) -> Vec<i64> {
    match kind {
        "uniform" => uniform_i64(n, -1_000_000_000, 1_000_000_000, seed),
        "full-range+extremes" => {
            let mut v = uniform_i64(n, lo, hi, seed);
            for (i, x) in [lo, hi, lo, hi, 0, -1].into_iter().enumerate() {
                if n > 0 {
                    let at = (i * 7919 + seed as usize) % n;
                    v[at] = x;
                }
            }
            v
        }
        "narrow" => uniform_i64(n, -50, 50, seed),
        "all-equal" => vec![if seed.is_multiple_of(2) { lo } else { hi }; n],
        "sorted" => {
            let mut v = uniform_i64(n, lo, hi, seed);
            v.sort();
            v
        }
        "reverse" => {
            let mut v = uniform_i64(n, lo, hi, seed);
            v.sort_by(|a, b| b.cmp(a));
            v
        }
        _ => unreachable!(),
    }
}

fn mergesort_plan(seed: u64) -> MergesortPlan {
    let chunks = [1, 7, 64, 3075];
    let tiles = [1, 5, 1418];
    let gates = [0, 256, 31291];
    MergesortPlan {
        chunk_size: chunks[seed as usize % chunks.len()],
        tile_size: tiles[(seed / 4) as usize % tiles.len()],
        parallel_merge_threshold: gates[(seed / 12) as usize % gates.len()],
    }
}

fn dispatch_params(seed: u64) -> TuningParams {
    let fallbacks = [1, 100, 1024, 99574];
    let code = [3, 4, 4, 0][(seed / 4) as usize % 4];
    TuningParams::new(
        [16, 3075][seed as usize % 2],
        [512, 31291][(seed / 2) as usize % 2],
        AlgorithmCode::new(code).unwrap(),
        fallbacks[seed as usize % fallbacks.len()],
        [1, 1418][(seed / 8) as usize % 2],
    )
}

fn agree<T: Ord + std::fmt::Debug>(path: &str, got: &[T], expected: &[T], ctx: &str) -> Result<(), String> {
    match got.iter().zip(expected).position(|(a, b)| a != b) {
        None if got.len() == expected.len() => Ok(()),
        None => Err(format!("{path} length mismatch on {ctx}")),
        Some(i) => Err(format!("{path} diverged on {ctx} at {i}: {:?} vs {:?}", got[i], expected[i])),
    }
}

fn sorted_copy<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let mut s = v.to_vec();
    s.sort();
    s
}

fn run_dispatch<T: SortElement>(v: Vec<T>, params: &TuningParams, pool: &WorkerPool) -> Vec<T> {
    let mut buf = SortBuffer::new(v);
    adaptive_partition_sort(&mut buf, params, pool);
    buf.into_vec()
}

fn correctness_oracle_suite() -> Outcome {
    let pool = pool(4);
    let mut counts = [0usize; 5];
    for &n in &SIZES {
        let seeds: u64 = if n >= 100_000 { 3 } else { 24 };
        for kind in PATTERNS {
            for seed in 0..seeds {
                let ctx = format!("{kind} n={n} seed={seed}");
                let wide = pattern(kind, n, i64::MIN, i64::MAX, seed);
                let narrow: Vec<i32> = pattern(kind, n, i32::MIN as i64, i32::MAX as i64, seed)
                    .into_iter()
                    .map(|x| x as i32)
                    .collect();
                let expected_wide = sorted_copy(&wide);
                let expected_narrow = sorted_copy(&narrow);

                // quadratic on large inputs: one seed per pattern at n = 1e5
                if n < 100_000 || seed == 0 {
                    let mut v = wide.clone();
                    insertion_sort(&mut v);
                    agree("insertion", &v, &expected_wide, &ctx)?;
                    counts[0] += 1;
                }

                let mut buf = SortBuffer::new(wide.clone());
                refined_parallel_mergesort(&mut buf, &mergesort_plan(seed), &pool);
                agree("mergesort", buf.as_slice(), &expected_wide, &ctx)?;
                counts[1] += 1;

                let mut buf = SortBuffer::new(narrow.clone());
                radix_sort_signed(&mut buf, &RadixPassPlan::new::<i32>(n, 1 + seed as usize % 5), &pool);
                agree("radix32", buf.as_slice(), &expected_narrow, &ctx)?;
                counts[2] += 1;

                let mut buf = SortBuffer::new(wide.clone());
                radix_sort_signed(&mut buf, &RadixPassPlan::new::<i64>(n, 1 + seed as usize % 5), &pool);
                agree("radix64", buf.as_slice(), &expected_wide, &ctx)?;
                counts[3] += 1;

                let params = dispatch_params(seed);
                agree("dispatch64", &run_dispatch(wide, &params, &pool), &expected_wide, &ctx)?;
                agree("dispatch32", &run_dispatch(narrow, &params, &pool), &expected_narrow, &ctx)?;
                counts[4] += 1;
            }
        }
    }
    let names = ["insertion", "mergesort", "radix32", "radix64", "dispatcher"];
    for (name, &count) in names.iter().zip(&counts) {
        check(count >= 1000, || format!("{name} only covered {count} arrays"))?;
    }
    Ok(Verdict::Pass(format!(
        "arrays checked: {}",
        names.iter().zip(&counts).map(|(n, c)| format!("{n}={c}")).collect::<Vec<_>>().join(" ")
    )))
}

fn xor_check<T: RadixElement + Ord + std::fmt::Debug, U: Ord>(pairs: &[(T, T)], to_unsigned: fn(T) -> U) -> Result<(), String> {
    for &(a, b) in pairs {
        check(a.flip_sign().flip_sign() == a, || format!("involution fails at {a:?}"))?;
        let (ka, kb) = (to_unsigned(a.flip_sign()), to_unsigned(b.flip_sign()));
        check(a.cmp(&b) == ka.cmp(&kb), || format!("order not preserved for ({a:?}, {b:?})"))?;
    }
    Ok(())
}

fn xor_key_properties() -> Outcome {
    const PAIRS: usize = 1_000_000;
    let xs = uniform_i64(PAIRS, i64::MIN, i64::MAX, 1);
    let ys = uniform_i64(PAIRS, i64::MIN, i64::MAX, 2);

    let pairs64: Vec<(i64, i64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    let pairs32: Vec<(i32, i32)> = xs.iter().zip(&ys).map(|(&a, &b)| (a as i32, b as i32)).collect();

    let edges64 = [i64::MIN, i64::MIN + 1, -2, -1, 0, 1, 2, i64::MAX - 1, i64::MAX];
    let edges32 = [i32::MIN, i32::MIN + 1, -2, -1, 0, 1, 2, i32::MAX - 1, i32::MAX];
    let boundary64: Vec<(i64, i64)> = edges64.iter().flat_map(|&a| edges64.iter().map(move |&b| (a, b))).collect();
    let boundary32: Vec<(i32, i32)> = edges32.iter().flat_map(|&a| edges32.iter().map(move |&b| (a, b))).collect();

    xor_check(&pairs64, |x| x as u64)?;
    xor_check(&boundary64, |x| x as u64)?;
    xor_check(&pairs32, |x| x as u32)?;
    xor_check(&boundary32, |x| x as u32)?;
    Ok(Verdict::Pass(format!("{PAIRS} random + {} boundary pairs per width", boundary64.len())))
}

fn ga_properties() -> Outcome {
    let bounds = GeneBounds::default();
    let pool = pool(available_workers().get());
    let mut evaluated = 0;
    for seed in 0..20u64 {
        let config = GaConfig {
            elite_count: 1,
            generations: 10,
            sample_fraction: 0.1,
            rng_seed: seed,
            ..GaConfig::default()
        };
        let mut gene_error = None;
        let outcome = run_ga_tuning_with(100_000, &bounds, &config, &pool, |_, population| {
            evaluated += population.len();
            for ind in population {
                if gene_error.is_none() && (ind.genes.validate(&bounds).is_err() || !bounds.algorithms.contains(&ind.genes.algorithm)) {
                    gene_error = Some(format!("seed {seed}: out-of-bounds genes {}", ind.genes));
                }
            }
        })
        .map_err(|e| format!("seed {seed}: {e}"))?;
        if let Some(e) = gene_error {
            return Err(e);
        }
        check(outcome.trace.len() == 10, || format!("seed {seed}: {} generations", outcome.trace.len()))?;
        for s in &outcome.trace {
            check(s.best_time <= s.average_time && s.average_time <= s.worst_time, || {
                format!("seed {seed} gen {}: best/avg/worst out of order", s.generation)
            })?;
        }
        for w in outcome.trace.windows(2) {
            check(w[1].best_time <= w[0].best_time, || {
                format!("seed {seed}: best_time rose {} -> {} at gen {}", w[0].best_time, w[1].best_time, w[1].generation)
            })?;
        }
    }
    Ok(Verdict::Pass(format!("20 seeds x 10 generations, {evaluated} individuals checked in bounds")))
}

fn ga_convergence_shape() -> Outcome {
    let pool = pool(available_workers().get());
    let mut ratios = Vec::new();
    for seed in 0..5u64 {
        // generations 0..=2 are identical to the first three of a longer run
        let config = GaConfig { generations: 3, rng_seed: seed, element_width: ElementWidth::W64, ..GaConfig::default() };
        let outcome = run_ga_tuning_with(10_000_000, &GeneBounds::default(), &config, &pool, |_, _| {})
            .map_err(|e| format!("seed {seed}: {e}"))?;
        ratios.push(outcome.trace[2].average_time / outcome.trace[0].average_time);
    }
    let passing = ratios.iter().filter(|&&r| r < 0.5).count();
    let detail = format!(
        "gen2/gen0 average ratios [{}], {passing}/5 below 0.5",
        ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
    );
    if passing >= 4 {
        Ok(Verdict::Pass(detail))
    } else {
        Err(detail)
    }
}

fn symbolic_model_vertices() -> Outcome {
    let expected = [
        ("T_ins", INSERTION_MODEL, 6.60, ExtremumKind::Minimum),
        ("T_par", PARALLEL_MERGE_MODEL, 8.54, ExtremumKind::Maximum),
        ("T_np", FALLBACK_MODEL, 9.14, ExtremumKind::Maximum),
        ("T_tile", TILE_MODEL, 7.63, ExtremumKind::Minimum),
    ];
    let mut parts = Vec::new();
    for (name, model, x, kind) in expected {
        let v = model.vertex().map_err(|e| e.to_string())?;
        check((v.x - x).abs() <= 0.02, || format!("{name}: x* = {:.4}, expected {x} +/- 0.02", v.x))?;
        check(v.kind == kind, || format!("{name}: {:?}, expected {kind:?}", v.kind))?;
        check(model.a.is_positive() == (kind == ExtremumKind::Minimum), || format!("{name}: curvature sign"))?;
        parts.push(format!("{name} x*={:.3}", v.x));
    }
    Ok(Verdict::Pass(parts.join(", ")))
}

fn desk_scale_speedup() -> Outcome {
    let threads = available_workers().get();
    let pool = pool(threads);
    let config = PipelineConfig::new(ParamsMode::Symbolic);
    let mut speedups = Vec::new();
    for _ in 0..5 {
        let report = run_pipeline(&[10_000_000], &config, &pool).map_err(|e| e.to_string())?;
        speedups.push(report.results[0].speedup[BASELINE_STABLE]);
    }
    speedups.sort_by(f64::total_cmp);
    let median = speedups[2];
    let detail = format!("median speedup vs {BASELINE_STABLE} at n=1e7 int64: {median:.2}x on {threads} thread(s)");
    if threads < 4 {
        // informational criterion; only defined for >= 4 hardware threads
        return Ok(Verdict::Skip(format!("{detail}; needs >= 4 hardware threads, not asserted")));
    }
    if median >= 1.5 {
        Ok(Verdict::Pass(detail))
    } else {
        Err(format!("{detail} < 1.5x"))
    }
}

fn dispatcher_boundary() -> Outcome {
    let pool = pool(4);
    let ks = [1usize, 2, 17, 256, 1024, 4096, 40967, 46263, 77432, 99574];
    for &k in &ks {
        let params = TuningParams::new(64, 512, AlgorithmCode::LSD_RADIX, k, 256);
        for (n, want) in [(k - 1, SortPath::HostStandardSort), (k, SortPath::RadixSort)] {
            let data = uniform_i64(n, -1_000_000_000, 1_000_000_000, k as u64);
            let expected = sorted_copy(&data);
            let mut buf = SortBuffer::new(data);
            let decision = adaptive_partition_sort(&mut buf, &params, &pool);
            check(decision.path == want, || format!("k={k} n={n}: took {:?}, expected {want:?}", decision.path))?;
            agree("dispatcher", buf.as_slice(), &expected, &format!("k={k} n={n}"))?;
        }
    }
    Ok(Verdict::Pass(format!("k in {ks:?}")))
}

const TIMING_FIELDS: [&str; 3] = ["evosort_time_s", "baseline_times_s", "speedup"];

fn masked_results(dir: &Path) -> Result<(String, serde_json::Value), String> {
    let raw = std::fs::read_to_string(dir.join("results.json")).map_err(|e| e.to_string())?;
    let mut value: serde_json::Value = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
    for result in value.as_array_mut().ok_or("results.json is not an array")? {
        for field in TIMING_FIELDS {
            let slot = result.get_mut(field).ok_or(format!("missing {field}"))?;
            *slot = serde_json::Value::Null;
        }
    }
    Ok((serde_json::to_string_pretty(&value).unwrap(), value))
}

fn bench_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut masked = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_evosort"))
            .args(["bench", "--mode", "symbolic", "--seed", "42", "--size", "1000000", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), || format!("bench exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr)))?;
        masked.push(masked_results(&out)?);
    }
    check(masked[0].0.as_bytes() == masked[1].0.as_bytes(), || "non-timing fields differ between runs".into())?;
    check(masked[0].1[0]["validated"] == serde_json::Value::Bool(true), || "result not validated".into())?;
    Ok(Verdict::Pass(format!("{} bytes of non-timing JSON identical across runs", masked[0].0.len())))
}
