//! Shell mapping: energy-ordered ranking by recursive halving.
//!
//! For each length `ℓ` occurring when `n` is split repeatedly into `⌊ℓ/2⌋`
//! and `⌈ℓ/2⌉`, `g_ℓ[e]` counts the length-`ℓ` sequences on shell `e`. Ranks
//! run over shells in increasing energy. Within a shell, sequences are
//! ordered by the shell of their first half, then by the rank of the first
//! half, then by the rank of the second half.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{admissible_energy, num_shells, Precision, SphereShaper};
use crate::alphabet::AmplitudeAlphabet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SmTables {
    n: usize,
    alph: AmplitudeAlphabet,
    e_max: u64,
    shells: usize,
    precision: Precision,
    tables: BTreeMap<usize, Vec<BigUint>>,
    /// `Σ_{e' < e} g_n[e']`, with one extra entry holding the total.
    cumulative: Vec<BigUint>,
}

fn halves(len: usize) -> (usize, usize) {
    (len / 2, len - len / 2)
}

/// Every length visited by the halving recursion from `n`.
pub fn recursion_lengths(n: usize) -> Vec<usize> {
    let mut seen = std::collections::BTreeSet::new();
    let mut frontier = vec![n];
    while let Some(len) = frontier.pop() {
        if seen.insert(len) && len > 1 {
            let (a, b) = halves(len);
            frontier.push(a);
            frontier.push(b);
        }
    }
    seen.into_iter().collect()
}

type Totals = HashMap<(usize, usize), Vec<BigUint>>;

impl SmTables {
    pub fn build(n: usize, alph: &AmplitudeAlphabet, e_max: u64, precision: Precision) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("blocklength must be positive".into()));
        }
        let e_max = admissible_energy(n, e_max)?;
        let shells = num_shells(n, e_max)?;
        let mut tables: BTreeMap<usize, Vec<BigUint>> = BTreeMap::new();
        for len in recursion_lengths(n) {
            let row = if len == 1 {
                let mut row = vec![BigUint::zero(); shells];
                for j in 0..alph.len() {
                    if let Some(slot) = row.get_mut(alph.shell_step(j)) {
                        *slot = BigUint::one();
                    }
                }
                row
            } else {
                let (a, b) = halves(len);
                let (ga, gb) = (&tables[&a], &tables[&b]);
                (0..shells)
                    .map(|e| {
                        let exact: BigUint = (0..=e).map(|e1| &ga[e1] * &gb[e - e1]).sum();
                        precision.store(exact)
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            tables.insert(len, row);
        }
        Ok(Self::assemble(n, alph.clone(), e_max, shells, precision, tables))
    }

    fn assemble(
        n: usize,
        alph: AmplitudeAlphabet,
        e_max: u64,
        shells: usize,
        precision: Precision,
        tables: BTreeMap<usize, Vec<BigUint>>,
    ) -> Self {
        let mut cumulative = Vec::with_capacity(shells + 1);
        let mut acc = BigUint::zero();
        cumulative.push(acc.clone());
        for g in &tables[&n] {
            acc += g;
            cumulative.push(acc.clone());
        }
        Self {
            n,
            alph,
            e_max,
            shells,
            precision,
            tables,
            cumulative,
        }
    }

    /// Rebuilds tables from stored rows (see [`super::container`]).
    pub(crate) fn from_parts(
        n: usize,
        alph: AmplitudeAlphabet,
        e_max: u64,
        precision: Precision,
        tables: BTreeMap<usize, Vec<BigUint>>,
    ) -> Result<Self> {
        let shells = num_shells(n, e_max)?;
        let expected = recursion_lengths(n);
        if tables.keys().copied().collect::<Vec<_>>() != expected
            || tables.values().any(|r| r.len() != shells)
        {
            return Err(Error::Config("shell-mapping tables do not match header".into()));
        }
        Ok(Self::assemble(n, alph, e_max, shells, precision, tables))
    }

    /// `g_len[e]`, the number of length-`len` sequences on shell `e`.
    pub fn table(&self, len: usize) -> Option<&[BigUint]> {
        self.tables.get(&len).map(|v| v.as_slice())
    }

    pub(crate) fn tables(&self) -> &BTreeMap<usize, Vec<BigUint>> {
        &self.tables
    }

    fn g(&self, len: usize, e: usize) -> &BigUint {
        &self.tables[&len][e]
    }

    fn steps(&self) -> Vec<usize> {
        (0..self.alph.len()).map(|j| self.alph.shell_step(j)).collect()
    }

    fn shell_of(&self, letters: &[usize], steps: &[usize]) -> usize {
        letters.iter().map(|&a| steps[a]).sum()
    }

    fn unrank_shell(&self, len: usize, e: usize, mut idx: BigUint, steps: &[usize], out: &mut Vec<usize>) -> Result<()> {
        if len == 1 {
            let a = steps.iter().position(|&d| d == e).ok_or(Error::RankOverflow)?;
            if !idx.is_zero() {
                return Err(Error::RankOverflow);
            }
            out.push(a);
            return Ok(());
        }
        let (la, lb) = halves(len);
        for e1 in 0..=e {
            let gb = self.g(lb, e - e1);
            let block = self.g(la, e1) * gb;
            if idx < block {
                let (q, r) = idx.div_rem(gb);
                self.unrank_shell(la, e1, q, steps, out)?;
                return self.unrank_shell(lb, e - e1, r, steps, out);
            }
            idx -= block;
        }
        Err(Error::RankOverflow)
    }

    fn rank_shell(&self, letters: &[usize], steps: &[usize]) -> Result<BigUint> {
        let len = letters.len();
        if len == 1 {
            return Ok(BigUint::zero());
        }
        let (la, lb) = halves(len);
        let (first, second) = letters.split_at(la);
        let e1 = self.shell_of(first, steps);
        let e = e1 + self.shell_of(second, steps);
        let mut idx = BigUint::zero();
        for e1p in 0..e1 {
            idx += self.g(la, e1p) * self.g(lb, e - e1p);
        }
        idx += self.rank_shell(first, steps)? * self.g(lb, e - e1);
        idx += self.rank_shell(second, steps)?;
        if &idx >= self.g(len, e) {
            return Err(Error::RankOverflow);
        }
        Ok(idx)
    }

    fn unit(&self, e: usize, steps: &[usize]) -> Vec<BigUint> {
        let mut v = vec![BigUint::zero(); self.alph.len()];
        if let Some(a) = steps.iter().position(|&d| d == e) {
            v[a] = BigUint::one();
        }
        v
    }

    /// Letter totals over the first `count` sequences of shell `e`.
    fn partial_totals(&self, len: usize, e: usize, mut count: BigUint, steps: &[usize], memo: &mut Totals) -> Result<Vec<BigUint>> {
        let n_a = self.alph.len();
        if count.is_zero() {
            return Ok(vec![BigUint::zero(); n_a]);
        }
        if len == 1 {
            return Ok(self.unit(e, steps).into_iter().map(|x| x * &count).collect());
        }
        let (la, lb) = halves(len);
        let mut acc = vec![BigUint::zero(); n_a];
        let add_scaled = |acc: &mut Vec<BigUint>, v: &[BigUint], f: &BigUint| {
            for (x, y) in acc.iter_mut().zip(v) {
                *x += y * f;
            }
        };
        for e1 in 0..=e {
            let e2 = e - e1;
            let (ga, gb) = (self.g(la, e1).clone(), self.g(lb, e2).clone());
            let block = &ga * &gb;
            if block.is_zero() {
                continue;
            }
            if count >= block {
                let fa = self.full_totals(la, e1, steps, memo)?;
                let fb = self.full_totals(lb, e2, steps, memo)?;
                add_scaled(&mut acc, &fa, &gb);
                add_scaled(&mut acc, &fb, &ga);
                count -= block;
                if count.is_zero() {
                    break;
                }
            } else {
                let (q, r) = count.div_rem(&gb);
                let pa = self.partial_totals(la, e1, q.clone(), steps, memo)?;
                add_scaled(&mut acc, &pa, &gb);
                let fb = self.full_totals(lb, e2, steps, memo)?;
                add_scaled(&mut acc, &fb, &q);
                if !r.is_zero() {
                    let mut head = Vec::with_capacity(la);
                    self.unrank_shell(la, e1, q, steps, &mut head)?;
                    for a in head {
                        acc[a] += &r;
                    }
                    let pb = self.partial_totals(lb, e2, r, steps, memo)?;
                    add_scaled(&mut acc, &pb, &BigUint::one());
                }
                return Ok(acc);
            }
        }
        Ok(acc)
    }

    fn full_totals(&self, len: usize, e: usize, steps: &[usize], memo: &mut Totals) -> Result<Vec<BigUint>> {
        if let Some(v) = memo.get(&(len, e)) {
            return Ok(v.clone());
        }
        let v = self.partial_totals(len, e, self.g(len, e).clone(), steps, memo)?;
        memo.insert((len, e), v.clone());
        Ok(v)
    }
}

impl SphereShaper for SmTables {
    fn n(&self) -> usize {
        self.n
    }

    fn alphabet(&self) -> &AmplitudeAlphabet {
        &self.alph
    }

    fn e_max(&self) -> u64 {
        self.e_max
    }

    fn num_shells(&self) -> usize {
        self.shells
    }

    fn precision(&self) -> Precision {
        self.precision
    }

    fn size(&self) -> &BigUint {
        &self.cumulative[self.shells]
    }

    fn unrank(&self, index: &BigUint) -> Result<Vec<u32>> {
        if index >= self.size() {
            return Err(Error::RankOverflow);
        }
        let e = self.cumulative.partition_point(|c| c <= index) - 1;
        let idx = index - &self.cumulative[e];
        let steps = self.steps();
        let mut letters = Vec::with_capacity(self.n);
        self.unrank_shell(self.n, e, idx, &steps, &mut letters)?;
        Ok(self.alph.amplitudes(&letters))
    }

    fn rank(&self, amplitudes: &[u32]) -> Result<BigUint> {
        if amplitudes.len() != self.n {
            return Err(Error::SequenceLength {
                got: amplitudes.len(),
                expected: self.n,
            });
        }
        let letters = self.alph.indices(amplitudes)?;
        let energy = self.alph.sequence_energy(amplitudes);
        if energy > self.e_max {
            return Err(Error::EnergyOverflow {
                energy,
                e_max: self.e_max,
            });
        }
        let steps = self.steps();
        let e = self.shell_of(&letters, &steps);
        Ok(&self.cumulative[e] + self.rank_shell(&letters, &steps)?)
    }

    fn letter_totals(&self, count: &BigUint) -> Result<Vec<BigUint>> {
        if count > self.size() {
            return Err(Error::RankOverflow);
        }
        let steps = self.steps();
        let mut memo = Totals::new();
        let mut acc = vec![BigUint::zero(); self.alph.len()];
        for e in 0..self.shells {
            let start = &self.cumulative[e];
            if start >= count {
                break;
            }
            let take = (count - start).min(self.g(self.n, e).clone());
            let part = self.partial_totals(self.n, e, take, &steps, &mut memo)?;
            for (x, y) in acc.iter_mut().zip(part) {
                *x += y;
            }
        }
        Ok(acc)
    }
}
