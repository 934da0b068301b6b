//! Constant-composition distribution matching by lexicographic
//! multiset-permutation ranking, and binary subset ranking.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, floor_log2, multinomial, BigIndex, BitWord, Composition};
use crate::error::{Error, Result};

/// All permutations of one composition, addressed by their lexicographic
/// rank; the first `2^k` of them form the codebook.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcdmCodebook {
    composition: Composition,
    k: usize,
    size: BigIndex,
}

impl CcdmCodebook {
    pub fn new(composition: Composition) -> Result<Self> {
        if composition.num_letters() == 0 || composition.n() == 0 {
            return Err(Error::InvalidArgument("empty composition".into()));
        }
        let size = multinomial(&composition);
        let k = floor_log2(&size).unwrap_or(0);
        Ok(Self {
            composition,
            k,
            size,
        })
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    /// Input length `⌊log2 size⌋`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of permutations of the composition.
    pub fn size(&self) -> &BigIndex {
        &self.size
    }

    pub fn n(&self) -> usize {
        self.composition.n()
    }

    /// Maps a `k`-bit word to the permutation of that rank.
    pub fn encode(&self, w: &BitWord) -> Result<Vec<u32>> {
        if w.len() != self.k {
            return Err(Error::WordLength {
                got: w.len(),
                expected: self.k,
            });
        }
        let idx = unrank_permutation(&self.composition, &self.size, w.to_index())?;
        Ok(idx.into_iter().map(|j| 2 * j as u32 + 1).collect())
    }

    /// Inverse of [`CcdmCodebook::encode`].
    pub fn decode(&self, amplitudes: &[u32]) -> Result<BitWord> {
        if amplitudes.len() != self.n() {
            return Err(Error::SequenceLength {
                got: amplitudes.len(),
                expected: self.n(),
            });
        }
        let indices = letter_indices(amplitudes, self.composition.num_letters())
            .ok_or(Error::CompositionMismatch)?;
        if Composition::of_indices(&indices, self.composition.num_letters()) != self.composition {
            return Err(Error::CompositionMismatch);
        }
        let rank = rank_permutation(&self.composition, &self.size, &indices);
        BitWord::from_index(&rank, self.k)
    }
}

fn letter_indices(amplitudes: &[u32], n_a: usize) -> Option<Vec<usize>> {
    amplitudes
        .iter()
        .map(|&a| {
            let j = (a.checked_sub(1)? / 2) as usize;
            (a % 2 == 1 && j < n_a).then_some(j)
        })
        .collect()
}

/// The permutation of `c` with lexicographic rank `rank`, as letter indices.
///
/// `total` must equal `multinomial(c)`. The number of completions starting
/// with letter `j` is `total · c_j / len`, so each step costs one
/// multiplication and division per candidate letter.
pub fn unrank_permutation(c: &Composition, total: &BigUint, mut rank: BigUint) -> Result<Vec<usize>> {
    if &rank >= total {
        return Err(Error::RankOverflow);
    }
    let mut counts = c.counts().to_vec();
    let mut total = total.clone();
    let n = c.n();
    let mut out = Vec::with_capacity(n);
    for len in (1..=n).rev() {
        for (j, cj) in counts.iter_mut().enumerate() {
            if *cj == 0 {
                continue;
            }
            let block = &total * *cj / len;
            if rank < block {
                out.push(j);
                *cj -= 1;
                total = block;
                break;
            }
            rank -= block;
        }
    }
    Ok(out)
}

/// Lexicographic rank of a permutation of `c` given as letter indices.
pub fn rank_permutation(c: &Composition, total: &BigUint, seq: &[usize]) -> BigUint {
    let mut counts = c.counts().to_vec();
    let mut total = total.clone();
    let mut rank = BigUint::zero();
    for (pos, &letter) in seq.iter().enumerate() {
        let len = seq.len() - pos;
        for cj in counts.iter().take(letter) {
            if *cj > 0 {
                rank += &total * *cj / len;
            }
        }
        total = &total * counts[letter] / len;
        counts[letter] -= 1;
    }
    rank
}

/// Rank of a binary sequence among all sequences with the same number of
/// ones, where the position sets of the ones are ordered lexicographically.
pub fn sr_rank(seq: &[u8]) -> BigIndex {
    let n = seq.len();
    let mut ones = seq.iter().filter(|&&b| b == 1).count();
    let mut rank = BigUint::zero();
    if ones == 0 {
        return rank;
    }
    // `block` = number of completions placing a one at the current position.
    let mut block = binomial(n as u64 - 1, ones as u64 - 1);
    for (i, &b) in seq.iter().enumerate() {
        if ones == 0 {
            break;
        }
        let len = n - i;
        if b == 1 {
            if ones > 1 {
                block = block * (ones - 1) / (len - 1);
            }
            ones -= 1;
        } else {
            rank += &block;
            block = block * (len - ones) / (len - 1);
        }
    }
    rank
}

/// Inverse of [`sr_rank`] for sequences of length `n` with `n_1` ones.
pub fn sr_unrank(index: &BigIndex, n: usize, n_1: usize) -> Result<Vec<u8>> {
    if n_1 > n {
        return Err(Error::InvalidArgument(format!("{n_1} ones in length {n}")));
    }
    if index >= &binomial(n as u64, n_1 as u64) {
        return Err(Error::RankOverflow);
    }
    let mut out = vec![0u8; n];
    let mut ones = n_1;
    if ones == 0 {
        return Ok(out);
    }
    let mut rank = index.clone();
    let mut block = binomial(n as u64 - 1, ones as u64 - 1);
    for (i, slot) in out.iter_mut().enumerate() {
        if ones == 0 {
            break;
        }
        let len = n - i;
        if rank < block {
            *slot = 1;
            if ones > 1 {
                block = block * (ones - 1) / (len - 1);
            }
            ones -= 1;
        } else {
            rank -= &block;
            block = block * (len - ones) / (len - 1);
        }
    }
    Ok(out)
}

/// Size `C(n, n_1)` of the binary subset codebook.
pub fn sr_size(n: usize, n_1: usize) -> BigIndex {
    if n_1 > n {
        BigUint::zero()
    } else if n_1 == 0 {
        BigUint::one()
    } else {
        binomial(n as u64, n_1 as u64)
    }
}
