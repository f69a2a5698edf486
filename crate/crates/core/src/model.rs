//! Closed-form threshold models `T(n) = a x^2 + b x + c` with `x = log10(n)`.
//!
//! The four built-in models replace the GA loop: they were fit on GA output
//! for `n` in `[1e7, 1e10]` with the algorithm gene fixed to radix sort.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{AlgorithmCode, GeneBounds, GeneRange, ParamsError, TuningParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("n must be at least 1 (log10 undefined at 0)")]
    ZeroSize,
    #[error("linear model has no vertex")]
    NoVertex,
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// Exact fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    /// Panics on a zero denominator.
    pub const fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_positive(self) -> bool {
        (self.num > 0) == (self.den > 0) && self.num != 0
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Which gene a model produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Insertion,
    ParallelMerge,
    Fallback,
    Tile,
}

impl Threshold {
    pub fn range(self, bounds: &GeneBounds) -> GeneRange {
        match self {
            Threshold::Insertion => bounds.insertion_threshold,
            Threshold::ParallelMerge => bounds.parallel_merge_threshold,
            Threshold::Fallback => bounds.fallback_threshold,
            Threshold::Tile => bounds.tile_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticModel {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub target: Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    /// `log10(n)` at the extremum.
    pub x: f64,
    pub kind: ExtremumKind,
}

impl Vertex {
    pub fn n(&self) -> f64 {
        10f64.powf(self.x)
    }
}

pub const INSERTION_MODEL: QuadraticModel = QuadraticModel {
    a: Rational::new(18_093_685, 726_826),
    b: Rational::new(-227_830_214, 693_565),
    c: Rational::new(1_730_747_635, 502_001),
    target: Threshold::Insertion,
};

pub const PARALLEL_MERGE_MODEL: QuadraticModel = QuadraticModel {
    a: Rational::new(-4_279_813_193, 907_161),
    b: Rational::new(79_199_394_278, 983_501),
    c: Rational::new(-309_812_890_693, 956_422),
    target: Threshold::ParallelMerge,
};

pub const FALLBACK_MODEL: QuadraticModel = QuadraticModel {
    a: Rational::new(-3_680_680_444, 890_339),
    b: Rational::new(39_413_203_286, 521_933),
    c: Rational::new(-219_719_696_809, 785_367),
    target: Threshold::Fallback,
};

pub const TILE_MODEL: QuadraticModel = QuadraticModel {
    a: Rational::new(2_451_303_315, 877_429),
    b: Rational::new(-7_878_849_997, 184_645),
    c: Rational::new(157_328_357_967, 943_252),
    target: Threshold::Tile,
};

impl QuadraticModel {
    /// Unclamped model value at `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let (a, b, c) = (self.a.to_f64(), self.b.to_f64(), self.c.to_f64());
        (a * x + b) * x + c
    }

    /// Threshold for `n` elements: nearest integer, clamped into the default bounds.
    pub fn eval_threshold(&self, n: u64) -> Result<usize, ModelError> {
        self.eval_threshold_within(n, &GeneBounds::default())
    }

    pub fn eval_threshold_within(&self, n: u64, bounds: &GeneBounds) -> Result<usize, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroSize);
        }
        let x = (n as f64).log10();
        Ok(self.target.range(bounds).clamp(self.value_at(x).round()))
    }

    /// Extremum `x* = -b / (2a)`; a minimum when `a > 0`.
    pub fn vertex(&self) -> Result<Vertex, ModelError> {
        if self.a.is_zero() {
            return Err(ModelError::NoVertex);
        }
        let x = -self.b.to_f64() / (2.0 * self.a.to_f64());
        let kind = if self.a.is_positive() { ExtremumKind::Minimum } else { ExtremumKind::Maximum };
        Ok(Vertex { x, kind })
    }
}

/// The four built-in models with the algorithm gene fixed to radix sort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicParamSet {
    pub insertion: QuadraticModel,
    pub parallel_merge: QuadraticModel,
    pub fallback: QuadraticModel,
    pub tile: QuadraticModel,
    pub algorithm: AlgorithmCode,
}

impl Default for SymbolicParamSet {
    fn default() -> Self {
        SymbolicParamSet {
            insertion: INSERTION_MODEL,
            parallel_merge: PARALLEL_MERGE_MODEL,
            fallback: FALLBACK_MODEL,
            tile: TILE_MODEL,
            algorithm: AlgorithmCode::LSD_RADIX,
        }
    }
}

impl SymbolicParamSet {
    pub fn models(&self) -> [&QuadraticModel; 4] {
        [&self.insertion, &self.parallel_merge, &self.fallback, &self.tile]
    }

    pub fn params_for(&self, n: u64, bounds: &GeneBounds) -> Result<TuningParams, ModelError> {
        let params = TuningParams {
            insertion_threshold: self.insertion.eval_threshold_within(n, bounds)?,
            parallel_merge_threshold: self.parallel_merge.eval_threshold_within(n, bounds)?,
            algorithm: self.algorithm,
            fallback_threshold: self.fallback.eval_threshold_within(n, bounds)?,
            tile_size: self.tile.eval_threshold_within(n, bounds)?,
        };
        Ok(params.validate(bounds)?)
    }
}

/// Tuning params for `n` elements from the built-in models and default bounds.
pub fn symbolic_params(n: u64) -> Result<TuningParams, ModelError> {
    SymbolicParamSet::default().params_for(n, &GeneBounds::default())
}
