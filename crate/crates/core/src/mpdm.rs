//! Multiset-partition distribution matching: complementary composition pairs
//! whose weighted average is the target, addressed through a prefix code with
//! a constant-composition payload per leaf.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::alphabet::AmplitudeAlphabet;
use crate::ccdm::{rank_permutation, unrank_permutation};
use crate::combinatorics::{floor_log2, log2_factorials, multinomial, BitWord, Composition};
use crate::distribution::{avg_energy, entropy, Pmf};
use crate::error::{Error, Result};

/// One codebook node: sequences of `composition`, `payload_bits` bits each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpdmLeaf {
    pub composition: Composition,
    pub payload_bits: usize,
    /// The `k - payload_bits` leading input bits that select this leaf.
    pub prefix: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SerializedCodebook", into = "SerializedCodebook")]
pub struct MpdmCodebook {
    target: Composition,
    k: usize,
    leaves: Vec<MpdmLeaf>,
    /// Integer value of the first input word mapped to each leaf.
    starts: Vec<BigUint>,
    sizes: Vec<BigUint>,
    by_composition: HashMap<Composition, usize>,
}

#[derive(Serialize, Deserialize)]
struct SerializedCodebook {
    target: Composition,
    k: usize,
    leaves: Vec<MpdmLeaf>,
}

impl From<MpdmCodebook> for SerializedCodebook {
    fn from(cb: MpdmCodebook) -> Self {
        Self {
            target: cb.target,
            k: cb.k,
            leaves: cb.leaves,
        }
    }
}

impl TryFrom<SerializedCodebook> for MpdmCodebook {
    type Error = Error;

    fn try_from(s: SerializedCodebook) -> Result<Self> {
        let mut ranges = Vec::with_capacity(s.leaves.len());
        for (i, leaf) in s.leaves.iter().enumerate() {
            if leaf.payload_bits > s.k || leaf.prefix.len() != s.k - leaf.payload_bits {
                return Err(Error::Config(format!("leaf {i}: prefix length mismatch")));
            }
            let prefix = BitWord::new(
                leaf.prefix
                    .bytes()
                    .map(|b| b.wrapping_sub(b'0'))
                    .collect(),
            )
            .map_err(|_| Error::Config(format!("leaf {i}: prefix is not binary")))?;
            if leaf.composition.n() != s.target.n()
                || leaf.composition.num_letters() != s.target.num_letters()
            {
                return Err(Error::Config(format!("leaf {i}: composition shape")));
            }
            ranges.push((prefix.to_index() << leaf.payload_bits, i));
        }
        ranges.sort();
        let mut next = BigUint::zero();
        for (start, i) in &ranges {
            if *start != next {
                return Err(Error::Config("prefix code is not complete and prefix-free".into()));
            }
            next += BigUint::one() << s.leaves[*i].payload_bits;
        }
        if next != BigUint::one() << s.k {
            return Err(Error::Config("prefix code is not complete".into()));
        }
        Ok(Self::assemble(s.target, s.k, s.leaves))
    }
}

/// Whole pair (or self-complementary leaf) considered during construction.
struct Unit {
    members: Vec<Composition>,
    bits: usize,
}

impl Unit {
    /// `log2` of the number of input words the unit absorbs.
    fn weight_log2(&self) -> usize {
        self.bits + self.members.len() - 1
    }
}

/// `⌊log2 MC(c)⌋`, via floating point with an exact fallback near integers.
fn floor_log2_multinomial(c: &Composition, lf: &[f64]) -> usize {
    let approx = lf[c.n()] - c.counts().iter().map(|&x| lf[x as usize]).sum::<f64>();
    let nearest = approx.round();
    if (approx - nearest).abs() < 1e-6 {
        floor_log2(&multinomial(c)).unwrap_or(0)
    } else {
        approx.floor().max(0.0) as usize
    }
}

/// Calls `f` for every composition of `n` with `c_j ≤ bound_j`.
fn for_each_bounded_composition(n: u32, bound: &[u32], mut f: impl FnMut(&[u32])) {
    fn rec(j: usize, left: u32, bound: &[u32], suffix_cap: &[u32], cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if j + 1 == bound.len() {
            if left <= bound[j] {
                cur.push(left);
                f(cur);
                cur.pop();
            }
            return;
        }
        let lo = left.saturating_sub(suffix_cap[j + 1]);
        for c in lo..=left.min(bound[j]) {
            cur.push(c);
            rec(j + 1, left - c, bound, suffix_cap, cur, f);
            cur.pop();
        }
    }
    let mut suffix_cap = vec![0u32; bound.len() + 1];
    for j in (0..bound.len()).rev() {
        suffix_cap[j] = suffix_cap[j + 1] + bound[j];
    }
    let mut cur = Vec::with_capacity(bound.len());
    rec(0, n, bound, &suffix_cap, &mut cur, &mut f);
}

impl MpdmCodebook {
    /// Builds the pairwise codebook for `target`.
    ///
    /// Every composition `C'` with `C' ≤ 2C` is paired with `2C - C'`; a pair
    /// carries `min(⌊log2 MC(C')⌋, ⌊log2 MC(C'')⌋)` payload bits on both
    /// members. Whole pairs are then taken by decreasing size until exactly
    /// `2^k` input words are covered, with `k = ⌊log2 Σ 2^{b_i}⌋`.
    pub fn build(target: &Composition) -> Result<Self> {
        let n = target.n();
        if n == 0 || target.num_letters() == 0 {
            return Err(Error::InvalidArgument("empty target composition".into()));
        }
        let lf = log2_factorials(n);
        let bound: Vec<u32> = target.counts().iter().map(|&c| 2 * c).collect();
        let mut units = Vec::new();
        for_each_bounded_composition(n as u32, &bound, |counts| {
            let c = Composition::new(counts.to_vec());
            let comp = c.complement(target).expect("bounded by 2C");
            match c.cmp(&comp) {
                std::cmp::Ordering::Less => {
                    let bits = floor_log2_multinomial(&c, &lf).min(floor_log2_multinomial(&comp, &lf));
                    units.push(Unit {
                        members: vec![c, comp],
                        bits,
                    });
                }
                std::cmp::Ordering::Equal => {
                    let bits = floor_log2_multinomial(&c, &lf);
                    units.push(Unit {
                        members: vec![c],
                        bits,
                    });
                }
                std::cmp::Ordering::Greater => {}
            }
        });

        let mut total = BigUint::zero();
        for u in &units {
            total += BigUint::one() << u.weight_log2();
        }
        let k = floor_log2(&total).expect("the target itself is a unit");

        // A pair wider than the whole codebook is narrowed to fill it alone.
        for u in units.iter_mut() {
            if u.weight_log2() > k {
                u.bits = k + 1 - u.members.len();
            }
        }
        units.sort_by(|a, b| {
            b.weight_log2()
                .cmp(&a.weight_log2())
                .then_with(|| a.members[0].cmp(&b.members[0]))
        });
        // Sizes are powers of two in decreasing order, so the running sum is
        // always a multiple of the next size and the fill ends exactly at 2^k.
        let full = BigUint::one() << k;
        let mut filled = BigUint::zero();
        let mut chosen: Vec<(Composition, usize)> = Vec::new();
        for u in units {
            if filled == full {
                break;
            }
            let size = BigUint::one() << u.weight_log2();
            if &filled + &size <= full {
                filled += size;
                for c in u.members {
                    chosen.push((c, u.bits));
                }
            }
        }
        debug_assert_eq!(filled, full);
        chosen.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut start = BigUint::zero();
        let mut leaves = Vec::with_capacity(chosen.len());
        for (composition, payload_bits) in chosen {
            let prefix_value = &start >> payload_bits;
            let prefix_len = k - payload_bits;
            let prefix = BitWord::from_index(&prefix_value, prefix_len)
                .expect("prefix fits")
                .bits()
                .iter()
                .map(|&b| char::from(b'0' + b))
                .collect();
            start += BigUint::one() << payload_bits;
            leaves.push(MpdmLeaf {
                composition,
                payload_bits,
                prefix,
            });
        }
        Ok(Self::assemble(target.clone(), k, leaves))
    }

    fn assemble(target: Composition, k: usize, leaves: Vec<MpdmLeaf>) -> Self {
        let mut starts = Vec::with_capacity(leaves.len());
        let mut sizes = Vec::with_capacity(leaves.len());
        let mut by_composition = HashMap::with_capacity(leaves.len());
        for (i, leaf) in leaves.iter().enumerate() {
            let prefix: BigUint = leaf
                .prefix
                .bytes()
                .fold(BigUint::zero(), |acc, b| (acc << 1u32) + u32::from(b - b'0'));
            starts.push(prefix << leaf.payload_bits);
            sizes.push(multinomial(&leaf.composition));
            by_composition.insert(leaf.composition.clone(), i);
        }
        Self {
            target,
            k,
            leaves,
            starts,
            sizes,
            by_composition,
        }
    }

    pub fn target(&self) -> &Composition {
        &self.target
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.target.n()
    }

    pub fn leaves(&self) -> &[MpdmLeaf] {
        &self.leaves
    }

    pub fn num_compositions(&self) -> usize {
        self.leaves.len()
    }

    /// Index of the leaf whose input range contains `index`.
    fn leaf_of(&self, index: &BigUint) -> usize {
        self.starts.partition_point(|s| s <= index) - 1
    }

    pub fn encode(&self, w: &BitWord) -> Result<Vec<u32>> {
        if w.len() != self.k {
            return Err(Error::WordLength {
                got: w.len(),
                expected: self.k,
            });
        }
        // Leaves are ordered by start, so the range search is the prefix match.
        let index = w.to_index();
        let i = if self.starts.len() == 1 { 0 } else { self.leaf_of(&index) };
        let payload = index - &self.starts[i];
        let leaf = &self.leaves[i];
        let seq = unrank_permutation(&leaf.composition, &self.sizes[i], payload)?;
        Ok(seq.into_iter().map(|j| 2 * j as u32 + 1).collect())
    }

    pub fn decode(&self, amplitudes: &[u32]) -> Result<BitWord> {
        if amplitudes.len() != self.n() {
            return Err(Error::SequenceLength {
                got: amplitudes.len(),
                expected: self.n(),
            });
        }
        let n_a = self.target.num_letters();
        let alph = AmplitudeAlphabet::with_size(n_a)?;
        let indices = alph.indices(amplitudes).map_err(|_| Error::UnknownComposition)?;
        let c = Composition::of_indices(&indices, n_a);
        let &i = self.by_composition.get(&c).ok_or(Error::UnknownComposition)?;
        let rank = rank_permutation(&c, &self.sizes[i], &indices);
        if rank.bits() as usize > self.leaves[i].payload_bits {
            return Err(Error::RankOverflow);
        }
        BitWord::from_index(&(rank + &self.starts[i]), self.k)
    }

    /// Per-letter totals `Σ_i 2^{b_i} C'_i`, exact.
    pub fn weighted_counts(&self) -> Vec<BigUint> {
        let mut acc = vec![BigUint::zero(); self.target.num_letters()];
        for leaf in &self.leaves {
            for (a, &c) in acc.iter_mut().zip(leaf.composition.counts()) {
                *a += BigUint::from(c) << leaf.payload_bits;
            }
        }
        acc
    }

    pub fn stats(&self) -> MpdmStats {
        let n = self.n();
        let total = BigUint::one() << self.k;
        let probs: Vec<f64> = self
            .weighted_counts()
            .iter()
            .map(|c| crate::combinatorics::big_ratio(c, &total) / n as f64)
            .collect();
        let pmf = Pmf::from_weights(&probs).expect("nonempty codebook");
        let alph = AmplitudeAlphabet::with_size(self.target.num_letters()).expect("nonempty");
        let h = entropy(&pmf);
        MpdmStats {
            k: self.k,
            num_compositions: self.leaves.len(),
            energy: avg_energy(&pmf, &alph),
            rate_loss: h - self.k as f64 / n as f64,
            entropy: h,
            pmf,
        }
    }

    /// Amplitude PMF over the input words `0..count`, in input order.
    pub fn pmf_of_first(&self, count: &BigUint) -> Result<Pmf> {
        if count.is_zero() || count > &(BigUint::one() << self.k) {
            return Err(Error::RankOverflow);
        }
        let mut acc = vec![BigUint::zero(); self.target.num_letters()];
        for (leaf, start) in self.leaves.iter().zip(&self.starts) {
            if start >= count {
                break;
            }
            let end = start + (BigUint::one() << leaf.payload_bits);
            let used = end.min(count.clone()) - start;
            for (a, &c) in acc.iter_mut().zip(leaf.composition.counts()) {
                *a += &used * c;
            }
        }
        let total: BigUint = acc.iter().sum();
        let probs: Vec<f64> = acc
            .iter()
            .map(|c| crate::combinatorics::big_ratio(c, &total))
            .collect();
        Pmf::from_weights(&probs)
    }

    /// Number of sequences of leaf `i` actually addressed (`2^{b_i}`) over
    /// its permutation count.
    pub fn leaf_usage(&self, i: usize) -> f64 {
        let used = BigUint::one() << self.leaves[i].payload_bits;
        crate::combinatorics::big_ratio(&used, &self.sizes[i])
    }
}

/// Summary of a built codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpdmStats {
    pub k: usize,
    pub num_compositions: usize,
    pub pmf: Pmf,
    pub entropy: f64,
    pub energy: f64,
    pub rate_loss: f64,
}

impl MpdmStats {
    pub fn k_over_n(&self, n: usize) -> f64 {
        self.k.to_f64().unwrap_or(0.0) / n as f64
    }
}
