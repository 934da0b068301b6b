//! One-sided ASK amplitude alphabets `{1, 3, ..., 2 n_a - 1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of odd positive amplitudes.
///
/// `levels[j] = 2j + 1`. An alphabet built from `m` bits per 1-D symbol has
/// `n_a = 2^(m-1)` levels; toy alphabets of any size (e.g. `{1, 3, 5}`) can be
/// built with [`AmplitudeAlphabet::with_size`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmplitudeAlphabet {
    levels: Vec<u32>,
}

impl AmplitudeAlphabet {
    /// Amplitudes of `2^m`-ASK.
    pub fn from_bits(m: u32) -> Result<Self> {
        if !(1..=12).contains(&m) {
            return Err(Error::InvalidArgument(format!("m = {m} outside 1..=12")));
        }
        Self::with_size(1usize << (m - 1))
    }

    pub fn with_size(n_a: usize) -> Result<Self> {
        if n_a == 0 {
            return Err(Error::InvalidArgument("empty alphabet".into()));
        }
        Ok(Self {
            levels: (0..n_a as u32).map(|j| 2 * j + 1).collect(),
        })
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `m` such that `n_a = 2^(m-1)`, if the alphabet size is a power of two.
    pub fn bits_per_symbol(&self) -> Option<u32> {
        let n_a = self.len();
        n_a.is_power_of_two().then(|| n_a.trailing_zeros() + 1)
    }

    pub fn amplitude(&self, j: usize) -> u32 {
        self.levels[j]
    }

    pub fn index_of(&self, amplitude: u32) -> Option<usize> {
        if amplitude % 2 == 1 && ((amplitude - 1) / 2) < self.len() as u32 {
            Some(((amplitude - 1) / 2) as usize)
        } else {
            None
        }
    }

    /// Squared amplitude of level `j`.
    pub fn energy(&self, j: usize) -> u64 {
        let a = self.levels[j] as u64;
        a * a
    }

    /// Number of 8-unit energy steps level `j` adds over amplitude 1:
    /// `(a_j^2 - 1) / 8 = j (j + 1) / 2`.
    pub fn shell_step(&self, j: usize) -> usize {
        j * (j + 1) / 2
    }

    pub fn max_energy(&self) -> u64 {
        self.energy(self.len() - 1)
    }

    /// Maps amplitudes to level indices.
    pub fn indices(&self, amplitudes: &[u32]) -> Result<Vec<usize>> {
        amplitudes
            .iter()
            .map(|&a| self.index_of(a).ok_or(Error::UnknownAmplitude(a)))
            .collect()
    }

    pub fn amplitudes(&self, indices: &[usize]) -> Vec<u32> {
        indices.iter().map(|&j| self.levels[j]).collect()
    }

    pub fn sequence_energy(&self, amplitudes: &[u32]) -> u64 {
        amplitudes.iter().map(|&a| (a as u64) * (a as u64)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_ask_levels() {
        let alph = AmplitudeAlphabet::from_bits(3).unwrap();
        assert_eq!(alph.levels(), &[1, 3, 5, 7]);
        assert_eq!(alph.bits_per_symbol(), Some(3));
        assert_eq!(alph.index_of(5), Some(2));
        assert_eq!(alph.index_of(9), None);
        assert_eq!(alph.index_of(4), None);
        for j in 0..4 {
            assert_eq!(alph.energy(j), 1 + 8 * alph.shell_step(j) as u64);
        }
    }

    #[test]
    fn toy_alphabet_has_no_bit_width() {
        let alph = AmplitudeAlphabet::with_size(3).unwrap();
        assert_eq!(alph.levels(), &[1, 3, 5]);
        assert_eq!(alph.bits_per_symbol(), None);
        assert!(AmplitudeAlphabet::from_bits(0).is_err());
    }
}
