//! Sorting kernels: insertion sort, the bottom-up parallel mergesort with a
//! tiled merge, and the block-based signed LSD radix sort.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::params::TuningParams;
use crate::workers::WorkerPool;

/// Element type facts the dispatcher needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Int32,
    Int64,
    /// Any other totally ordered type; never eligible for radix sort.
    Ordered,
}

impl ElementKind {
    pub fn is_signed_radix_integer(self) -> bool {
        matches!(self, ElementKind::Int32 | ElementKind::Int64)
    }
}

/// Element types accepted by every sort entry point.
///
/// Implement it with the defaults (`impl SortElement for MyKey {}`) to get the
/// mergesort and standard-sort paths; only `i32` and `i64` override the radix hook.
pub trait SortElement: Ord + Copy + Send + Sync {
    const KIND: ElementKind = ElementKind::Ordered;

    /// Runs the radix kernel if this type supports it. Returns `false` otherwise,
    /// leaving the buffer untouched.
    fn radix_sort(_buf: &mut SortBuffer<Self>, _pool: &WorkerPool) -> bool {
        false
    }
}

macro_rules! ordered_element {
    ($($t:ty),*) => { $(impl SortElement for $t {})* };
}

ordered_element!(i8, i16, u8, u16, u32, u64, u128, i128, usize, isize, char, bool);

impl SortElement for i32 {
    const KIND: ElementKind = ElementKind::Int32;

    fn radix_sort(buf: &mut SortBuffer<Self>, pool: &WorkerPool) -> bool {
        let plan = RadixPassPlan::new::<i32>(buf.len(), pool.workers());
        radix_sort_signed(buf, &plan, pool);
        true
    }
}

impl SortElement for i64 {
    const KIND: ElementKind = ElementKind::Int64;

    fn radix_sort(buf: &mut SortBuffer<Self>, pool: &WorkerPool) -> bool {
        let plan = RadixPassPlan::new::<i64>(buf.len(), pool.workers());
        radix_sort_signed(buf, &plan, pool);
        true
    }
}

/// The data to sort plus an equally long scratch array used as the merge
/// destination and radix scatter target.
#[derive(Debug, Clone)]
pub struct SortBuffer<T> {
    primary: Vec<T>,
    scratch: Vec<T>,
}

// scratch contents are not part of the value
impl<T: PartialEq> PartialEq for SortBuffer<T> {
    fn eq(&self, other: &Self) -> bool {
        self.primary == other.primary
    }
}

impl<T: Eq> Eq for SortBuffer<T> {}

impl<T: Copy> SortBuffer<T> {
    pub fn new(data: Vec<T>) -> Self {
        let scratch = data.clone();
        SortBuffer { primary: data, scratch }
    }

    pub fn len(&self) -> usize {
        self.primary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primary.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.primary
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.primary
    }

    pub fn into_vec(self) -> Vec<T> {
        self.primary
    }

    fn swap(&mut self) {
        std::mem::swap(&mut self.primary, &mut self.scratch);
    }
}

/// Stable in-place insertion sort.
pub fn insertion_sort<T: Ord + Copy>(slice: &mut [T]) {
    for i in 1..slice.len() {
        let item = slice[i];
        let mut j = i;
        while j > 0 && slice[j - 1] > item {
            slice[j] = slice[j - 1];
            j -= 1;
        }
        slice[j] = item;
    }
}

/// Knobs for [`refined_parallel_mergesort`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergesortPlan {
    /// Length of the insertion-sorted base chunks.
    pub chunk_size: usize,
    /// Output elements per merge tile.
    pub tile_size: usize,
    /// Levels whose run length is below this merge each pair with one
    /// sequential two-finger merge; longer runs are merged tile by tile in
    /// parallel.
    pub parallel_merge_threshold: usize,
}

impl MergesortPlan {
    pub fn new(chunk_size: usize, tile_size: usize) -> Self {
        MergesortPlan {
            chunk_size,
            tile_size,
            parallel_merge_threshold: 0,
        }
    }

    pub fn from_params(params: &TuningParams) -> Self {
        MergesortPlan {
            chunk_size: params.insertion_threshold,
            tile_size: params.tile_size,
            parallel_merge_threshold: params.parallel_merge_threshold,
        }
    }
}

/// Bottom-up mergesort: insertion-sort base chunks in parallel, then merge
/// adjacent runs level by level, doubling the run length until one run is left.
///
/// Panics if `chunk_size` or `tile_size` is zero.
pub fn refined_parallel_mergesort<T>(buf: &mut SortBuffer<T>, plan: &MergesortPlan, pool: &WorkerPool)
where
    T: Ord + Copy + Send + Sync,
{
    assert!(plan.chunk_size >= 1, "chunk_size must be >= 1");
    assert!(plan.tile_size >= 1, "tile_size must be >= 1");
    let n = buf.len();
    if n <= 1 {
        return;
    }
    pool.install(|| {
        buf.primary.par_chunks_mut(plan.chunk_size).for_each(insertion_sort);

        let mut run = plan.chunk_size;
        while run < n {
            merge_level(&buf.primary, &mut buf.scratch, run, plan);
            buf.swap();
            run = run.saturating_mul(2);
        }
    });
}

fn merge_level<T>(src: &[T], dst: &mut [T], run: usize, plan: &MergesortPlan)
where
    T: Ord + Copy + Send + Sync,
{
    let width = run.saturating_mul(2);
    dst.par_chunks_mut(width)
        .zip(src.par_chunks(width))
        .for_each(|(out, pair)| {
            if pair.len() <= run {
                out.copy_from_slice(pair);
                return;
            }
            let (left, right) = pair.split_at(run);
            if run < plan.parallel_merge_threshold {
                merge_into(left, right, out);
            } else {
                merge_tiled(left, right, out, plan.tile_size);
            }
        });
}

/// Stable merge of two sorted runs into `dest`, produced in independent output
/// tiles of `tile_size` elements. Each tile finds its source sub-ranges by a
/// binary partition search, so tiles run in parallel on the current pool.
///
/// Panics if `dest.len() != left.len() + right.len()` or `tile_size == 0`.
pub fn merge_tiled<T>(left: &[T], right: &[T], dest: &mut [T], tile_size: usize)
where
    T: Ord + Copy + Send + Sync,
{
    assert_eq!(dest.len(), left.len() + right.len(), "destination length mismatch");
    assert!(tile_size >= 1, "tile_size must be >= 1");
    dest.par_chunks_mut(tile_size).enumerate().for_each(|(k, tile)| {
        let start = k * tile_size;
        let end = start + tile.len();
        let (l0, r0) = split_point(left, right, start);
        let (l1, r1) = split_point(left, right, end);
        merge_into(&left[l0..l1], &right[r0..r1], tile);
    });
}

/// How many elements of `left` and `right` make up the first `diag` outputs
/// of their stable merge.
fn split_point<T: Ord>(left: &[T], right: &[T], diag: usize) -> (usize, usize) {
    let mut lo = diag.saturating_sub(right.len());
    let mut hi = diag.min(left.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        // ties go to `left`
        if left[mid] <= right[diag - mid - 1] {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (lo, diag - lo)
}

fn merge_into<T: Ord + Copy>(left: &[T], right: &[T], out: &mut [T]) {
    debug_assert_eq!(out.len(), left.len() + right.len());
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if right[j] < left[i] {
            out[k] = right[j];
            j += 1;
        } else {
            out[k] = left[i];
            i += 1;
        }
        k += 1;
    }
    out[k..k + left.len() - i].copy_from_slice(&left[i..]);
    k += left.len() - i;
    out[k..].copy_from_slice(&right[j..]);
}

/// Signed integers the LSD radix kernel handles.
pub trait RadixElement: Copy + Send + Sync {
    const BITS: u32;
    /// The sign bit, as a value of this type.
    const SIGN_MASK: Self;

    fn flip_sign(self) -> Self;
    /// Byte `shift / 8` of the two's-complement bit pattern.
    fn digit(self, shift: u32) -> usize;
}

impl RadixElement for i32 {
    const BITS: u32 = 32;
    const SIGN_MASK: i32 = i32::MIN;

    #[inline]
    fn flip_sign(self) -> Self {
        self ^ Self::SIGN_MASK
    }

    #[inline]
    fn digit(self, shift: u32) -> usize {
        ((self as u32 >> shift) & 0xFF) as usize
    }
}

impl RadixElement for i64 {
    const BITS: u32 = 64;
    const SIGN_MASK: i64 = i64::MIN;

    #[inline]
    fn flip_sign(self) -> Self {
        self ^ Self::SIGN_MASK
    }

    #[inline]
    fn digit(self, shift: u32) -> usize {
        ((self as u64 >> shift) & 0xFF) as usize
    }
}

pub const RADIX_BITS: u32 = 8;
const BUCKETS: usize = 1 << RADIX_BITS;

/// Pass layout for one radix sort call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadixPassPlan {
    pub pass_count: u32,
    pub bits_per_pass: u32,
    /// Sign bit as an unsigned 64-bit pattern.
    pub sign_mask: u64,
    /// Disjoint, contiguous ranges covering `0..n`, one per worker.
    pub thread_chunks: Vec<Range<usize>>,
}

impl RadixPassPlan {
    /// Splits `n` elements into `ceil(n / workers)`-sized contiguous chunks.
    pub fn new<T: RadixElement>(n: usize, workers: usize) -> Self {
        let workers = workers.max(1);
        let chunk = n.div_ceil(workers).max(1);
        let thread_chunks = (0..n).step_by(chunk).map(|s| s..(s + chunk).min(n)).collect();
        RadixPassPlan {
            pass_count: T::BITS / RADIX_BITS,
            bits_per_pass: RADIX_BITS,
            sign_mask: 1u64 << (T::BITS - 1),
            thread_chunks,
        }
    }
}

#[derive(Clone, Copy)]
struct ScatterPtr<T>(*mut T);

// SAFETY: workers only write through disjoint offsets computed from the
// prefix sums; see `radix_sort_signed`.
unsafe impl<T: Send> Send for ScatterPtr<T> {}
unsafe impl<T: Send> Sync for ScatterPtr<T> {}

impl<T> ScatterPtr<T> {
    fn get(self) -> *mut T {
        self.0
    }
}

/// Block-based LSD radix sort for signed 32/64-bit integers.
///
/// Flips the sign bit so signed order becomes unsigned order, runs one
/// stable counting pass per byte with per-worker histograms, then flips back.
///
/// Panics if `plan` was built for a different width or length.
pub fn radix_sort_signed<T: RadixElement>(buf: &mut SortBuffer<T>, plan: &RadixPassPlan, pool: &WorkerPool) {
    let n = buf.len();
    assert_eq!(plan.pass_count * plan.bits_per_pass, T::BITS, "plan width mismatch");
    assert_eq!(plan.bits_per_pass, RADIX_BITS);
    assert_eq!(plan.pass_count % 2, 0, "odd pass count would leave data in scratch");
    assert_eq!(plan.thread_chunks.iter().map(|r| r.len()).sum::<usize>(), n, "plan length mismatch");

    pool.install(|| {
        buf.primary.par_iter_mut().for_each(|x| *x = x.flip_sign());

        for pass in 0..plan.pass_count {
            let shift = pass * plan.bits_per_pass;
            let src = &buf.primary;

            let local: Vec<[usize; BUCKETS]> = plan
                .thread_chunks
                .par_iter()
                .map(|range| {
                    let mut hist = [0usize; BUCKETS];
                    for &x in &src[range.clone()] {
                        hist[x.digit(shift)] += 1;
                    }
                    hist
                })
                .collect();

            let mut bin_start = [0usize; BUCKETS];
            let mut total = 0;
            for (bin, start) in bin_start.iter_mut().enumerate() {
                *start = total;
                total += local.iter().map(|h| h[bin]).sum::<usize>();
            }

            // worker w writes bin b starting after every earlier worker's share of b
            let mut offsets = Vec::with_capacity(local.len());
            let mut cursor = bin_start;
            for hist in &local {
                offsets.push(cursor);
                for (c, count) in cursor.iter_mut().zip(hist) {
                    *c += count;
                }
            }

            let dst = ScatterPtr(buf.scratch.as_mut_ptr());
            plan.thread_chunks
                .par_iter()
                .zip(offsets.into_par_iter())
                .for_each(|(range, mut offset)| {
                    for &x in &src[range.clone()] {
                        let d = x.digit(shift);
                        // SAFETY: offset[d] < n and no two workers share a slot.
                        unsafe { dst.get().add(offset[d]).write(x) };
                        offset[d] += 1;
                    }
                });

            buf.swap();
        }

        buf.primary.par_iter_mut().for_each(|x| *x = x.flip_sign());
    });
}
