//! Hybrid parallel sorting with tunable dispatch.
//!
//! A bottom-up parallel mergesort and a signed LSD radix sort sit behind an
//! adaptive dispatcher governed by five integer parameters. The parameters
//! come from a genetic-algorithm tuner, from closed-form quadratic models in
//! `log10(n)`, or from the caller. The [`bench`] module wires everything
//! into a seeded, validated benchmark pipeline.

pub mod bench;
pub mod dispatch;
pub mod model;
pub mod params;
pub mod sorters;
pub mod tuner;
pub mod workers;

pub use dispatch::{adaptive_partition_sort, decide, DispatchDecision, SortPath};
pub use params::{AlgorithmCode, GeneBounds, GeneRange, ParamsError, TuningParams};
pub use sorters::{ElementKind, SortBuffer, SortElement};
pub use workers::WorkerPool;
