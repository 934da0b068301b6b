//! Upper bounds on serialism, storage and bit operations of the shaping
//! algorithms, instantiated from the closed-form complexity expressions.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spsh::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostScheme {
    AcCcdm,
    SrDm,
    Ess,
    Sm,
}

impl FromStr for CostScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccdm" | "ac-ccdm" => Ok(Self::AcCcdm),
            "sr" | "sr-dm" => Ok(Self::SrDm),
            "ess" => Ok(Self::Ess),
            "sm" => Ok(Self::Sm),
            _ => Err(Error::InvalidArgument(format!("unknown scheme `{s}`"))),
        }
    }
}

impl fmt::Display for CostScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AcCcdm => "ac-ccdm",
            Self::SrDm => "sr-dm",
            Self::Ess => "ess",
            Self::Sm => "sm",
        })
    }
}

/// Parameters the bounds depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostInput {
    pub n: usize,
    pub k: usize,
    pub n_a: usize,
    /// Number of shells `L`.
    pub shells: usize,
    /// Shaping rate `R_s` in bit/1-D.
    pub shaping_rate: f64,
    /// Number of ones `n_1` of a binary composition (SR-DM only).
    pub n_1: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub scheme: CostScheme,
    pub precision: Precision,
    /// Loop iterations for shaping plus deshaping.
    pub serialism: usize,
    /// Storage bits of the shaping table; `None` where only an `O(log n)`
    /// order is meaningful.
    pub storage_bits: Option<u64>,
    /// Bit operations per dimension; `None` for algorithms whose cost is
    /// counted in arithmetic operations rather than bit operations.
    pub bit_ops_per_dim: Option<u64>,
    /// Table word length: `⌈n R_s⌉` in full precision, `n_m + n_p` bounded.
    pub word_bits: u32,
}

impl CostReport {
    /// Storage in kilobytes of 1000 bytes.
    pub fn storage_kb(&self) -> Option<f64> {
        self.storage_bits.map(|b| b as f64 / 8000.0)
    }
}

/// `⌈log2 n⌉`, the SM table depth.
fn log2_ceil(n: usize) -> u64 {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as u64
}

pub fn cost_report(scheme: CostScheme, input: &CostInput, precision: Precision) -> CostReport {
    let n = input.n as u64;
    let shells = input.shells as u64;
    let full_word = (input.n as f64 * input.shaping_rate).ceil() as u32;
    let word_bits = match precision {
        Precision::Full => full_word,
        Precision::Bounded { mantissa_bits, exponent_bits } => mantissa_bits + exponent_bits,
    };
    let w = word_bits as u64;
    let (serialism, storage_bits, bit_ops) = match scheme {
        CostScheme::AcCcdm => (input.k + input.n, None, None),
        CostScheme::SrDm => (input.n_1.min(input.n - input.n_1) + 1, None, None),
        CostScheme::Ess => (
            input.k + input.n,
            Some(shells * n * w),
            Some(input.n_a as u64 * w),
        ),
        CostScheme::Sm => (
            input.k + log2_ceil(input.n) as usize,
            Some(shells * log2_ceil(input.n) * w),
            Some(shells * w * w),
        ),
    };
    CostReport {
        scheme,
        precision,
        serialism,
        storage_bits,
        bit_ops_per_dim: bit_ops,
        word_bits,
    }
}
