//! Adaptive partition sort: picks the standard library sort, the radix kernel
//! or the refined mergesort from the tuning params, input size and element type.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::params::{AlgorithmCode, TuningParams};
use crate::sorters::{refined_parallel_mergesort, ElementKind, MergesortPlan, SortBuffer, SortElement};
use crate::workers::WorkerPool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortPath {
    HostStandardSort,
    RadixSort,
    RefinedMergesort,
}

impl fmt::Display for SortPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SortPath::HostStandardSort => "host_standard_sort",
            SortPath::RadixSort => "radix_sort",
            SortPath::RefinedMergesort => "refined_mergesort",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DispatchReason {
    BelowFallback { n: usize, fallback_threshold: usize },
    RadixEligible { element: ElementKind },
    /// Code 4 requested but the element type is not a signed 32/64-bit integer.
    NotRadixElement { element: ElementKind },
    MergesortCode { code: AlgorithmCode },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchDecision {
    pub path: SortPath,
    pub reason: DispatchReason,
}

/// Chooses a sort path. Pure; depends only on its arguments.
pub fn decide(n: usize, element: ElementKind, params: &TuningParams) -> DispatchDecision {
    let (path, reason) = if n < params.fallback_threshold {
        (
            SortPath::HostStandardSort,
            DispatchReason::BelowFallback { n, fallback_threshold: params.fallback_threshold },
        )
    } else if params.algorithm.is_radix() {
        if element.is_signed_radix_integer() {
            (SortPath::RadixSort, DispatchReason::RadixEligible { element })
        } else {
            (SortPath::RefinedMergesort, DispatchReason::NotRadixElement { element })
        }
    } else {
        // code 3 and codes 0-2 share the mergesort branch
        (SortPath::RefinedMergesort, DispatchReason::MergesortCode { code: params.algorithm })
    };
    DispatchDecision { path, reason }
}

/// Sorts `buf` along the path [`decide`] picks and reports that decision.
pub fn adaptive_partition_sort<T: SortElement>(
    buf: &mut SortBuffer<T>,
    params: &TuningParams,
    pool: &WorkerPool,
) -> DispatchDecision {
    let decision = decide(buf.len(), T::KIND, params);
    match decision.path {
        SortPath::HostStandardSort => buf.as_mut_slice().sort_unstable(),
        SortPath::RadixSort => {
            let ran = T::radix_sort(buf, pool);
            assert!(ran, "{:?} reported as radix-capable but has no radix kernel", T::KIND);
        }
        SortPath::RefinedMergesort => refined_parallel_mergesort(buf, &MergesortPlan::from_params(params), pool),
    }
    decision
}
