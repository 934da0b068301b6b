//! Sphere shaping: indexing every amplitude sequence of energy at most `E•`,
//! in lexicographic order (enumerative sphere shaping, [`ess`]) or in energy
//! order (shell mapping, [`sm`]).
//!
//! Energies of `n` odd amplitudes lie on the grid `n + 8s`; `s` is called the
//! shell index, and a sphere with `L` shells holds energies `n..=n+8(L-1)`.

pub mod container;
pub mod ess;
pub mod sm;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::alphabet::AmplitudeAlphabet;
use crate::combinatorics::{floor_log2, log2_big};
use crate::error::{Error, Result};

pub use ess::EssTrellis;
pub use sm::SmTables;

/// Arithmetic used when filling shaping tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Full,
    /// Every stored count is rounded down to `mantissa_bits` significant
    /// bits; exponents must fit in `exponent_bits`.
    Bounded { mantissa_bits: u32, exponent_bits: u32 },
}

impl Precision {
    pub fn bounded(mantissa_bits: u32, exponent_bits: u32) -> Self {
        Precision::Bounded {
            mantissa_bits,
            exponent_bits,
        }
    }

    /// Applies the storage rounding to an exactly computed count.
    pub fn store(&self, value: BigUint) -> Result<BigUint> {
        match *self {
            Precision::Full => Ok(value),
            Precision::Bounded {
                mantissa_bits,
                exponent_bits,
            } => Ok(BoundedNumber::round_down(&value, mantissa_bits, exponent_bits)?.value()),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Full => write!(f, "fp"),
            Precision::Bounded {
                mantissa_bits,
                exponent_bits,
            } => write!(f, "bp:{mantissa_bits},{exponent_bits}"),
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    /// Parses `fp` or `bp:<n_m>,<n_p>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("fp") {
            return Ok(Precision::Full);
        }
        let body = s
            .strip_prefix("bp:")
            .ok_or_else(|| Error::Parse(format!("precision {s:?}: expected fp or bp:nm,np")))?;
        let (m, p) = body
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("precision {s:?}: expected bp:nm,np")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|e| Error::Parse(format!("precision {s:?}: {e}")))
        };
        let (m, p) = (parse(m)?, parse(p)?);
        if !(1..=63).contains(&m) || !(1..=31).contains(&p) {
            return Err(Error::Parse(format!("precision {s:?}: field widths out of range")));
        }
        Ok(Precision::bounded(m, p))
    }
}

/// `mantissa · 2^exponent`, with at most `n_m` mantissa bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedNumber {
    pub mantissa: u64,
    pub exponent: u32,
}

impl BoundedNumber {
    /// The largest value `≤ x` expressible with an `n_m`-bit mantissa.
    pub fn round_down(x: &BigUint, n_m: u32, n_p: u32) -> Result<Self> {
        let bits = x.bits() as u32;
        let exponent = bits.saturating_sub(n_m);
        if n_p < 32 && exponent >= (1u32 << n_p) {
            return Err(Error::ExponentOverflow {
                exponent,
                bits: n_p,
            });
        }
        let mantissa = (x >> exponent).to_u64().expect("mantissa fits in 64 bits");
        Ok(Self { mantissa, exponent })
    }

    pub fn value(&self) -> BigUint {
        BigUint::from(self.mantissa) << self.exponent
    }
}

/// `L = ⌊(e_max - n)/8⌋ + 1`.
pub fn num_shells(n: usize, e_max: u64) -> Result<usize> {
    if e_max < n as u64 {
        return Err(Error::InvalidArgument(format!(
            "maximum energy {e_max} below the minimum {n}"
        )));
    }
    Ok(((e_max - n as u64) / 8) as usize + 1)
}

/// `e_max` rounded down to the nearest reachable sequence energy.
pub fn admissible_energy(n: usize, e_max: u64) -> Result<u64> {
    Ok(n as u64 + 8 * (num_shells(n, e_max)? as u64 - 1))
}

/// Largest shell index any length-`n` sequence can occupy.
pub fn max_shell(n: usize, alph: &AmplitudeAlphabet) -> usize {
    n * alph.shell_step(alph.len() - 1)
}

/// Smallest admissible `E•` whose sphere holds at least `2^k` sequences.
pub fn min_radius(n: usize, alph: &AmplitudeAlphabet, k: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be positive".into()));
    }
    let max_k = floor_log2(&BigUint::from(alph.len()).pow(n as u32)).unwrap_or(0);
    if k > max_k {
        return Err(Error::RateTooHigh { k, max: max_k });
    }
    let shells = max_shell(n, alph) + 1;
    let row = ess::sphere_counts(n, alph, shells);
    let need = BigUint::one() << k;
    let s = row.partition_point(|c| c < &need);
    Ok(n as u64 + 8 * s as u64)
}

/// Common interface of the two sphere indexers.
pub trait SphereShaper {
    fn n(&self) -> usize;
    fn alphabet(&self) -> &AmplitudeAlphabet;
    fn e_max(&self) -> u64;
    fn num_shells(&self) -> usize;
    fn precision(&self) -> Precision;
    /// Number of addressable sequences `|A•|` (after any rounding).
    fn size(&self) -> &BigUint;
    /// Sequence with rank `index`.
    fn unrank(&self, index: &BigUint) -> Result<Vec<u32>>;
    /// Rank of `amplitudes`.
    fn rank(&self, amplitudes: &[u32]) -> Result<BigUint>;
    /// Total occurrences of each amplitude over the sequences of rank `< count`.
    fn letter_totals(&self, count: &BigUint) -> Result<Vec<BigUint>>;

    /// `⌊log2 |A•|⌋`.
    fn k(&self) -> usize {
        floor_log2(self.size()).unwrap_or(0)
    }

    /// Shaping rate `log2 |A•| / n`.
    fn shaping_rate(&self) -> f64 {
        log2_big(self.size()) / self.n() as f64
    }

    fn encode(&self, w: &crate::BitWord) -> Result<Vec<u32>> {
        self.encode_k(w, self.k())
    }

    /// Encodes a word of `k ≤ ⌊log2 |A•|⌋` bits.
    fn encode_k(&self, w: &crate::BitWord, k: usize) -> Result<Vec<u32>> {
        if w.len() != k || k > self.k() {
            return Err(Error::WordLength {
                got: w.len(),
                expected: k.min(self.k()),
            });
        }
        self.unrank(&w.to_index())
    }

    fn decode(&self, amplitudes: &[u32]) -> Result<crate::BitWord> {
        self.decode_k(amplitudes, self.k())
    }

    fn decode_k(&self, amplitudes: &[u32], k: usize) -> Result<crate::BitWord> {
        let rank = self.rank(amplitudes)?;
        crate::BitWord::from_index(&rank, k)
    }

    /// Amplitude PMF and average energy over the first `2^k` sequences.
    fn induced_pmf_k(&self, k: usize) -> Result<(crate::Pmf, f64)> {
        let count = BigUint::one() << k;
        if &count > self.size() {
            return Err(Error::RateTooHigh { k, max: self.k() });
        }
        let totals = self.letter_totals(&count)?;
        let grand: BigUint = totals.iter().sum();
        let probs: Vec<f64> = totals
            .iter()
            .map(|t| crate::combinatorics::big_ratio(t, &grand))
            .collect();
        let pmf = crate::Pmf::from_weights(&probs)?;
        let energy = crate::avg_energy(&pmf, self.alphabet());
        Ok((pmf, energy))
    }

    fn induced_pmf(&self) -> Result<(crate::Pmf, f64)> {
        self.induced_pmf_k(self.k())
    }
}

/// Default bounded-precision widths: the smallest mantissa keeping
/// `|A•_BP| ≥ 2^k`, and `n_p = ⌈log2(⌈n R_s⌉ - n_m)⌉` from the full-precision
/// shaping rate.
pub fn bp_defaults<S, F>(build: F, full: &S, k: usize) -> Result<Precision>
where
    S: SphereShaper,
    F: Fn(Precision) -> Result<S>,
{
    let n_rs = (full.shaping_rate() * full.n() as f64).ceil() as u32;
    for n_m in 1..=63u32 {
        let n_p = exponent_bits(n_rs, n_m);
        match build(Precision::bounded(n_m, n_p)) {
            Ok(bp) if bp.k() >= k => return Ok(Precision::bounded(n_m, n_p)),
            Ok(_) | Err(Error::ExponentOverflow { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RateTooHigh { k, max: full.k() })
}

/// `⌈log2(⌈n R_s⌉ - n_m)⌉`, at least one bit.
pub fn exponent_bits(n_rs: u32, n_m: u32) -> u32 {
    let span = n_rs.saturating_sub(n_m).max(2);
    (32 - (span - 1).leading_zeros()).max(1)
}
