//! The five-gene tuning vector shared by the sort kernels, the dispatcher,
//! the GA tuner and the symbolic model.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

/// Strategy selector carried as the third gene.
///
/// Only `4` has its own meaning (LSD radix sort for signed integers); `3` and
/// every other code select the refined parallel mergesort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct AlgorithmCode(u8);

impl AlgorithmCode {
    pub const MAX: u8 = 4;
    pub const REFINED_MERGESORT: AlgorithmCode = AlgorithmCode(3);
    pub const LSD_RADIX: AlgorithmCode = AlgorithmCode(4);

    pub fn new(code: u8) -> Result<Self, ParamsError> {
        if code > Self::MAX {
            return Err(ParamsError::InvalidCode(code as u64));
        }
        Ok(AlgorithmCode(code))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn is_radix(self) -> bool {
        self == Self::LSD_RADIX
    }
}

impl<'de> Deserialize<'de> for AlgorithmCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = u64::deserialize(deserializer)?;
        u8::try_from(raw)
            .ok()
            .and_then(|c| AlgorithmCode::new(c).ok())
            .ok_or_else(|| serde::de::Error::custom(ParamsError::InvalidCode(raw)))
    }
}

impl fmt::Display for AlgorithmCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("{gene} below minimum 1")]
    BelowOne { gene: &'static str },
    #[error("{gene} = {value} outside range [{min}, {max}]")]
    OutOfBounds {
        gene: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("algorithm code {0} outside [0, 4]")]
    InvalidCode(u64),
    #[error("invalid gene bounds for {gene}: {reason}")]
    InvalidBounds { gene: &'static str, reason: String },
    #[error("malformed params: {0}")]
    Parse(String),
}

/// One candidate configuration: `(T_insertion, T_merge, A_code, T_fallback, T_tile)`.
///
/// Serialized as a flat snake_case object. Deserialization also accepts the
/// positional list form `[3075, 31291, 4, 99574, 1418]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TuningParams {
    /// Base chunk length for the insertion-sort stage of the mergesort.
    pub insertion_threshold: usize,
    /// Run length from which merges are split into parallel tiles.
    pub parallel_merge_threshold: usize,
    pub algorithm: AlgorithmCode,
    /// Inputs shorter than this go straight to the standard library sort.
    pub fallback_threshold: usize,
    /// Output elements per merge tile.
    pub tile_size: usize,
}

impl TuningParams {
    pub fn new(
        insertion_threshold: usize,
        parallel_merge_threshold: usize,
        algorithm: AlgorithmCode,
        fallback_threshold: usize,
        tile_size: usize,
    ) -> Self {
        TuningParams {
            insertion_threshold,
            parallel_merge_threshold,
            algorithm,
            fallback_threshold,
            tile_size,
        }
    }

    /// Builds params from the positional five-integer form.
    pub fn from_array(genes: [u64; 5]) -> Result<Self, ParamsError> {
        let to_usize = |v: u64| usize::try_from(v).map_err(|_| ParamsError::Parse(format!("{v} does not fit in usize")));
        let code = u8::try_from(genes[2]).map_err(|_| ParamsError::InvalidCode(genes[2]))?;
        Ok(TuningParams {
            insertion_threshold: to_usize(genes[0])?,
            parallel_merge_threshold: to_usize(genes[1])?,
            algorithm: AlgorithmCode::new(code)?,
            fallback_threshold: to_usize(genes[3])?,
            tile_size: to_usize(genes[4])?,
        })
    }

    pub fn to_array(&self) -> [u64; 5] {
        [
            self.insertion_threshold as u64,
            self.parallel_merge_threshold as u64,
            self.algorithm.get() as u64,
            self.fallback_threshold as u64,
            self.tile_size as u64,
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ParamsError> {
        serde_json::from_str(text).map_err(|e| ParamsError::Parse(e.to_string()))
    }

    /// Checks every gene against `bounds`, returning the params unchanged on success.
    pub fn validate(self, bounds: &GeneBounds) -> Result<Self, ParamsError> {
        for (gene, value, range) in self.numeric_genes(bounds) {
            if value < 1 {
                return Err(ParamsError::BelowOne { gene });
            }
            if !range.contains(value) {
                return Err(ParamsError::OutOfBounds {
                    gene,
                    value,
                    min: range.min,
                    max: range.max,
                });
            }
        }
        // AlgorithmCode can only be constructed in [0, 4]; every such code has
        // dispatch semantics, so any of them is accepted here.
        Ok(self)
    }

    fn numeric_genes(&self, bounds: &GeneBounds) -> [(&'static str, usize, GeneRange); 4] {
        [
            ("insertion_threshold", self.insertion_threshold, bounds.insertion_threshold),
            ("parallel_merge_threshold", self.parallel_merge_threshold, bounds.parallel_merge_threshold),
            ("fallback_threshold", self.fallback_threshold, bounds.fallback_threshold),
            ("tile_size", self.tile_size, bounds.tile_size),
        ]
    }
}

impl fmt::Display for TuningParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e] = self.to_array();
        write!(f, "[{a}, {b}, {c}, {d}, {e}]")
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ParamsRepr {
    Object {
        insertion_threshold: usize,
        parallel_merge_threshold: usize,
        algorithm: AlgorithmCode,
        fallback_threshold: usize,
        tile_size: usize,
    },
    List([u64; 5]),
}

impl<'de> Deserialize<'de> for TuningParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match ParamsRepr::deserialize(deserializer)? {
            ParamsRepr::Object {
                insertion_threshold,
                parallel_merge_threshold,
                algorithm,
                fallback_threshold,
                tile_size,
            } => Ok(TuningParams {
                insertion_threshold,
                parallel_merge_threshold,
                algorithm,
                fallback_threshold,
                tile_size,
            }),
            ParamsRepr::List(genes) => TuningParams::from_array(genes).map_err(serde::de::Error::custom),
        }
    }
}

/// Inclusive integer range for one numeric gene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneRange {
    pub min: usize,
    pub max: usize,
}

impl GeneRange {
    pub const fn new(min: usize, max: usize) -> Self {
        GeneRange { min, max }
    }

    pub fn contains(&self, value: usize) -> bool {
        (self.min..=self.max).contains(&value)
    }

    pub fn clamp(&self, value: f64) -> usize {
        if value.is_nan() || value <= self.min as f64 {
            self.min
        } else if value >= self.max as f64 {
            self.max
        } else {
            value as usize
        }
    }

    pub fn as_range(&self) -> RangeInclusive<usize> {
        self.min..=self.max
    }
}

/// Search space for the GA and clamp targets for the symbolic model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneBounds {
    pub insertion_threshold: GeneRange,
    pub parallel_merge_threshold: GeneRange,
    pub fallback_threshold: GeneRange,
    pub tile_size: GeneRange,
    /// Codes the tuner draws from.
    pub algorithms: Vec<AlgorithmCode>,
}

impl Default for GeneBounds {
    fn default() -> Self {
        GeneBounds {
            insertion_threshold: GeneRange::new(16, 8192),
            parallel_merge_threshold: GeneRange::new(512, 65536),
            fallback_threshold: GeneRange::new(1024, 131_072),
            tile_size: GeneRange::new(256, 32768),
            algorithms: vec![AlgorithmCode::REFINED_MERGESORT, AlgorithmCode::LSD_RADIX],
        }
    }
}

impl GeneBounds {
    pub fn check(&self) -> Result<(), ParamsError> {
        let genes = [
            ("insertion_threshold", self.insertion_threshold),
            ("parallel_merge_threshold", self.parallel_merge_threshold),
            ("fallback_threshold", self.fallback_threshold),
            ("tile_size", self.tile_size),
        ];
        for (gene, range) in genes {
            if range.min < 1 {
                return Err(ParamsError::InvalidBounds { gene, reason: "min must be >= 1".into() });
            }
            if range.min > range.max {
                return Err(ParamsError::InvalidBounds {
                    gene,
                    reason: format!("min {} exceeds max {}", range.min, range.max),
                });
            }
        }
        if self.algorithms.is_empty() {
            return Err(ParamsError::InvalidBounds { gene: "algorithm", reason: "empty code set".into() });
        }
        Ok(())
    }
}
