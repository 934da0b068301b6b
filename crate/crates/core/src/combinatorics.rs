//! Compositions, exact multinomial counting and bit-word/index conversion.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::alphabet::AmplitudeAlphabet;
use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative integer used for sequence ranks and counts.
pub type BigIndex = BigUint;

/// Occurrence counts `[n_1, ..., n_{n_a}]` of each amplitude in an n-sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition {
    counts: Vec<u32>,
}

impl Composition {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    /// Composition of an amplitude sequence over `alph`.
    pub fn of_sequence(amplitudes: &[u32], alph: &AmplitudeAlphabet) -> Result<Self> {
        let mut counts = vec![0u32; alph.len()];
        for &a in amplitudes {
            let j = alph.index_of(a).ok_or(Error::UnknownAmplitude(a))?;
            counts[j] += 1;
        }
        Ok(Self { counts })
    }

    pub fn of_indices(indices: &[usize], n_a: usize) -> Self {
        let mut counts = vec![0u32; n_a];
        for &j in indices {
            counts[j] += 1;
        }
        Self { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn num_letters(&self) -> usize {
        self.counts.len()
    }

    /// Blocklength `n = Σ n_j`.
    pub fn n(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// Total sequence energy `Σ n_j a_j^2`, identical for every permutation.
    pub fn energy(&self, alph: &AmplitudeAlphabet) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(j, &c)| c as u64 * alph.energy(j))
            .sum()
    }

    /// The complement `2 target - self`, if every entry stays nonnegative.
    pub fn complement(&self, target: &Composition) -> Option<Composition> {
        if self.counts.len() != target.counts.len() {
            return None;
        }
        let counts = self
            .counts
            .iter()
            .zip(&target.counts)
            .map(|(&c, &t)| (2 * t).checked_sub(c))
            .collect::<Option<Vec<_>>>()?;
        Some(Composition { counts })
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("composition entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if counts.is_empty() {
            return Err(Error::Parse("empty composition".into()));
        }
        Ok(Self { counts })
    }
}

/// `n! / Π n_j!`, computed exactly as a product of binomials.
pub fn multinomial(c: &Composition) -> BigIndex {
    let mut acc = BigUint::one();
    let mut total = 0u64;
    for &cj in c.counts() {
        for i in 1..=cj as u64 {
            total += 1;
            acc *= total;
            acc /= i;
        }
    }
    acc
}

/// `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigIndex {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `⌊log2 x⌋` for `x ≥ 1`.
pub fn floor_log2(x: &BigUint) -> Option<usize> {
    (!x.is_zero()).then(|| x.bits() as usize - 1)
}

/// `log2 x` in floating point, accurate for arbitrarily large `x`.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log2() + shift as f64
}

/// Ratio `num / den` of two big integers as `f64`.
pub fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = (num.bits().max(den.bits())).saturating_sub(960);
    let n = (num >> shift).to_f64().unwrap_or(0.0);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// `log2(n!)` for `n = 0..=max`, in floating point.
pub fn log2_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for i in 1..=max {
        acc += (i as f64).log2();
        out.push(acc);
    }
    out
}

/// Fixed-length bit word; the first bit is the most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord {
    bits: Vec<u8>,
}

impl BitWord {
    /// Builds a word from a slice of `0`/`1` values.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!("bit value {b}")));
        }
        Ok(Self { bits })
    }

    /// The `k`-bit big-endian representation of `index`.
    pub fn from_index(index: &BigUint, k: usize) -> Result<Self> {
        if index.bits() as usize > k {
            return Err(Error::RankOverflow);
        }
        let bits = (0..k)
            .map(|i| index.bit((k - 1 - i) as u64) as u8)
            .collect();
        Ok(Self { bits })
    }

    pub fn to_index(&self) -> BigUint {
        bits_to_index(&self.bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Hex rendering of the word's integer value, `⌈k/4⌉` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.bits.len().div_ceil(4);
        if digits == 0 {
            return String::new();
        }
        let hex = self.to_index().to_str_radix(16);
        format!("{hex:0>digits$}")
    }

    /// Parses a hex integer as a `k`-bit word.
    pub fn from_hex(hex: &str, k: usize) -> Result<Self> {
        let hex = hex.trim();
        let value = if hex.is_empty() {
            BigUint::zero()
        } else {
            BigUint::parse_bytes(hex.as_bytes(), 16)
                .ok_or_else(|| Error::Parse(format!("invalid hex word {hex:?}")))?
        };
        Self::from_index(&value, k).map_err(|_| Error::WordLength {
            got: value.bits() as usize,
            expected: k,
        })
    }
}

/// Big-endian bit slice to integer.
pub fn bits_to_index(bits: &[u8]) -> BigUint {
    // Pack into bytes first; BigUint shifting per bit is slow at n ~ 400.
    let pad = (8 - bits.len() % 8) % 8;
    let mut bytes = Vec::with_capacity(bits.len().div_ceil(8));
    let mut acc = 0u8;
    let mut fill = pad;
    for &b in bits {
        acc = (acc << 1) | (b & 1);
        fill += 1;
        if fill == 8 {
            bytes.push(acc);
            acc = 0;
            fill = 0;
        }
    }
    BigUint::from_bytes_be(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn permutations_brute(c: &Composition) -> usize {
        fn rec(left: &mut Vec<u32>, remaining: usize) -> usize {
            if remaining == 0 {
                return 1;
            }
            let mut total = 0;
            for j in 0..left.len() {
                if left[j] > 0 {
                    left[j] -= 1;
                    total += rec(left, remaining - 1);
                    left[j] += 1;
                }
            }
            total
        }
        rec(&mut c.counts().to_vec(), c.n())
    }

    #[test]
    fn multinomial_small_cases() {
        assert_eq!(multinomial(&Composition::new(vec![2, 2])), BigUint::from(6u32));
        assert_eq!(multinomial(&Composition::new(vec![7, 0, 0, 0])), BigUint::one());
        assert_eq!(multinomial(&Composition::new(vec![])), BigUint::one());
    }

    #[test]
    fn multinomial_matches_enumeration_up_to_n8() {
        for n in 0..=8u32 {
            for a in 0..=n {
                for b in 0..=(n - a) {
                    let c = Composition::new(vec![a, b, n - a - b]);
                    assert_eq!(
                        multinomial(&c),
                        BigUint::from(permutations_brute(&c)),
                        "{c}"
                    );
                }
            }
        }
    }

    #[test]
    fn multinomial_example_composition_has_367_bits() {
        let c = Composition::new(vec![95, 69, 37, 15]);
        assert_eq!(floor_log2(&multinomial(&c)), Some(367));
    }

    #[test]
    fn binomial_and_log2() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        let x = BigUint::one() << 1500u32;
        assert!((log2_big(&x) - 1500.0).abs() < 1e-9);
        assert!((big_ratio(&(BigUint::from(3u32) << 1200u32), &(BigUint::one() << 1201u32)) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bit_word_hex() {
        let w = BitWord::new(vec![1, 0, 1, 1, 0]).unwrap();
        assert_eq!(w.to_index(), BigUint::from(22u32));
        assert_eq!(w.to_hex(), "16");
        assert_eq!(BitWord::from_hex("16", 5).unwrap(), w);
        assert!(BitWord::from_hex("40", 5).is_err());
        assert_eq!(BitWord::from_hex("", 0).unwrap().len(), 0);
        assert!(BitWord::new(vec![2]).is_err());
    }

    #[test]
    fn composition_parsing_and_complement() {
        let c: Composition = "95, 69,37,15".parse().unwrap();
        assert_eq!(c.n(), 216);
        assert_eq!(c.to_string(), "95,69,37,15");
        let t = Composition::new(vec![2, 2]);
        assert_eq!(Composition::new(vec![1, 3]).complement(&t), Some(Composition::new(vec![3, 1])));
        assert_eq!(Composition::new(vec![0, 5]).complement(&t), None);
    }
}
