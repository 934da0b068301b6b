//! Enumerative sphere shaping: lexicographic ranking over a trellis of
//! completion counts.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{admissible_energy, num_shells, Precision, SphereShaper};
use crate::alphabet::AmplitudeAlphabet;
use crate::error::{Error, Result};

/// Counts `W[ℓ][s]` of length-`ℓ` completions with at most `s` shells of
/// energy headroom.
///
/// In the usual trellis notation the entry at stage `j` and energy level `l`
/// is `T[j][l] = W[n - j][L - 1 - l]`: `l` indexes the energy already used
/// by the first `j` amplitudes and `T[0][0] = |A•|`.
#[derive(Debug, Clone, PartialEq)]
pub struct EssTrellis {
    n: usize,
    alph: AmplitudeAlphabet,
    e_max: u64,
    shells: usize,
    precision: Precision,
    rows: Vec<Vec<BigUint>>,
}

/// `W[n][s]` for `s = 0..shells` in full precision, one row at a time.
pub(crate) fn sphere_counts(n: usize, alph: &AmplitudeAlphabet, shells: usize) -> Vec<BigUint> {
    let steps: Vec<usize> = (0..alph.len()).map(|j| alph.shell_step(j)).collect();
    let mut row = vec![BigUint::one(); shells];
    for _ in 0..n {
        row = next_row(&row, &steps);
    }
    row
}

fn next_row(prev: &[BigUint], steps: &[usize]) -> Vec<BigUint> {
    (0..prev.len())
        .map(|s| {
            steps
                .iter()
                .filter(|&&d| d <= s)
                .map(|&d| &prev[s - d])
                .sum()
        })
        .collect()
}

impl EssTrellis {
    /// Builds the trellis for sequences of energy at most `e_max`, which is
    /// first rounded down to an admissible energy.
    pub fn build(n: usize, alph: &AmplitudeAlphabet, e_max: u64, precision: Precision) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("blocklength must be positive".into()));
        }
        let e_max = admissible_energy(n, e_max)?;
        let shells = num_shells(n, e_max)?;
        let steps: Vec<usize> = (0..alph.len()).map(|j| alph.shell_step(j)).collect();
        let mut rows = Vec::with_capacity(n + 1);
        rows.push(vec![BigUint::one(); shells]);
        for l in 1..=n {
            let exact = next_row(&rows[l - 1], &steps);
            let stored = exact
                .into_iter()
                .map(|v| precision.store(v))
                .collect::<Result<Vec<_>>>()?;
            rows.push(stored);
        }
        Ok(Self {
            n,
            alph: alph.clone(),
            e_max,
            shells,
            precision,
            rows,
        })
    }

    /// Rebuilds a trellis from stored rows (see [`super::container`]).
    pub(crate) fn from_parts(
        n: usize,
        alph: AmplitudeAlphabet,
        e_max: u64,
        precision: Precision,
        rows: Vec<Vec<BigUint>>,
    ) -> Result<Self> {
        let shells = num_shells(n, e_max)?;
        if rows.len() != n + 1 || rows.iter().any(|r| r.len() != shells) {
            return Err(Error::Config("trellis dimensions do not match header".into()));
        }
        Ok(Self {
            n,
            alph,
            e_max,
            shells,
            precision,
            rows,
        })
    }

    /// `T[j][l]`: completions after `j` amplitudes that used `l` shells.
    pub fn count(&self, j: usize, l: usize) -> &BigUint {
        &self.rows[self.n - j][self.shells - 1 - l]
    }

    /// Row `W[ℓ]` indexed by remaining headroom.
    pub fn row(&self, remaining: usize) -> &[BigUint] {
        &self.rows[remaining]
    }

    pub(crate) fn rows(&self) -> &[Vec<BigUint>] {
        &self.rows
    }

    fn steps(&self) -> Vec<usize> {
        (0..self.alph.len()).map(|j| self.alph.shell_step(j)).collect()
    }

    /// Letter totals over the first `count` completions of node `(len, s)`.
    fn partial_totals(
        &self,
        len: usize,
        s: usize,
        mut count: BigUint,
        full: &mut HashMap<(usize, usize), Vec<BigUint>>,
    ) -> Vec<BigUint> {
        let n_a = self.alph.len();
        let steps = self.steps();
        let mut acc = vec![BigUint::zero(); n_a];
        let (mut len, mut s) = (len, s);
        while len > 0 && !count.is_zero() {
            let mut descended = false;
            for (a, &d) in steps.iter().enumerate() {
                if d > s {
                    break;
                }
                let child = &self.rows[len - 1][s - d];
                if &count >= child {
                    let sub = self.full_totals(len - 1, s - d, full);
                    for (x, y) in acc.iter_mut().zip(sub) {
                        *x += y;
                    }
                    acc[a] += child;
                    count -= child;
                } else {
                    acc[a] += &count;
                    len -= 1;
                    s -= d;
                    descended = true;
                    break;
                }
            }
            if !descended {
                break;
            }
        }
        acc
    }

    /// Letter totals over every completion counted at node `(len, s)`.
    fn full_totals(
        &self,
        len: usize,
        s: usize,
        full: &mut HashMap<(usize, usize), Vec<BigUint>>,
    ) -> Vec<BigUint> {
        if let Some(v) = full.get(&(len, s)) {
            return v.clone();
        }
        let v = if len == 0 {
            vec![BigUint::zero(); self.alph.len()]
        } else {
            self.partial_totals(len, s, self.rows[len][s].clone(), full)
        };
        full.insert((len, s), v.clone());
        v
    }
}

impl SphereShaper for EssTrellis {
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
        &self.rows[self.n][self.shells - 1]
    }

    fn unrank(&self, index: &BigUint) -> Result<Vec<u32>> {
        if index >= self.size() {
            return Err(Error::RankOverflow);
        }
        let steps = self.steps();
        let mut rank = index.clone();
        let mut s = self.shells - 1;
        let mut out = Vec::with_capacity(self.n);
        for len in (1..=self.n).rev() {
            let row = &self.rows[len - 1];
            let mut chosen = None;
            for (a, &d) in steps.iter().enumerate() {
                if d > s {
                    break;
                }
                let child = &row[s - d];
                if &rank < child {
                    chosen = Some((a, d));
                    break;
                }
                rank -= child;
            }
            // Stored counts never exceed the sum of their children, so a
            // rank below the node count always finds a child.
            let (a, d) = chosen.ok_or(Error::RankOverflow)?;
            out.push(self.alph.amplitude(a));
            s -= d;
        }
        Ok(out)
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
        // Headroom before each position.
        let mut slack = Vec::with_capacity(self.n);
        let mut s = self.shells - 1;
        for &a in &letters {
            slack.push(s);
            s -= steps[a];
        }
        let mut rank = BigUint::zero();
        for i in (0..self.n).rev() {
            let len = self.n - i;
            let s = slack[i];
            for &d in steps.iter().take(letters[i]) {
                rank += &self.rows[len - 1][s - d];
            }
            if rank >= self.rows[len][s] {
                return Err(Error::RankOverflow);
            }
        }
        Ok(rank)
    }

    fn letter_totals(&self, count: &BigUint) -> Result<Vec<BigUint>> {
        if count > self.size() {
            return Err(Error::RankOverflow);
        }
        let mut full = HashMap::new();
        Ok(self.partial_totals(self.n, self.shells - 1, count.clone(), &mut full))
    }
}
