//! Binary reflected Gray code labeling of `2^m`-ASK.

use serde::{Deserialize, Serialize};

use crate::alphabet::AmplitudeAlphabet;
use crate::distribution::Pmf;
use crate::error::{Error, Result};

/// BRGC labels for the points `x_i = 2i - (2^m - 1)`, `i = 0..2^m`.
///
/// Bit `B1` (index 0, the most significant label bit) is the sign: it is `1`
/// for positive points. The remaining `m - 1` bits depend on the amplitude
/// only, so `±a` share their amplitude bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrgcLabeling {
    m: u32,
}

impl BrgcLabeling {
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=12).contains(&m) {
            return Err(Error::InvalidArgument(format!("m = {m} outside 1..=12")));
        }
        Ok(Self { m })
    }

    pub fn for_alphabet(alph: &AmplitudeAlphabet) -> Result<Self> {
        let m = alph.bits_per_symbol().ok_or_else(|| {
            Error::InvalidArgument(format!("{} amplitudes is not a power of two", alph.len()))
        })?;
        Self::new(m)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn num_points(&self) -> usize {
        1 << self.m
    }

    /// Coordinate of point `i`.
    pub fn point(&self, i: usize) -> f64 {
        (2 * i as i64 - (self.num_points() as i64 - 1)) as f64
    }

    /// `m`-bit label of point `i`, `B1` in the most significant position.
    pub fn label(&self, i: usize) -> u32 {
        let i = i as u32;
        i ^ (i >> 1)
    }

    /// Bit `B_{j+1}` of point `i`.
    pub fn bit(&self, i: usize, j: u32) -> u8 {
        ((self.label(i) >> (self.m - 1 - j)) & 1) as u8
    }

    /// Point index of the label `label`.
    pub fn point_of_label(&self, label: u32) -> usize {
        let mut i = label;
        let mut shift = 1;
        while shift < self.m {
            i ^= i >> shift;
            shift <<= 1;
        }
        i as usize
    }

    /// Point index carrying amplitude level `j` with the given sign bit.
    pub fn point_of(&self, sign_bit: u8, amp_index: usize) -> usize {
        let half = self.num_points() / 2;
        if sign_bit == 1 {
            half + amp_index
        } else {
            half - 1 - amp_index
        }
    }

    /// The `m - 1` amplitude bits of amplitude level `j`, `B2` first.
    pub fn amplitude_bits(&self, amp_index: usize) -> u32 {
        let half = self.num_points() / 2;
        self.label(half + amp_index) & (half as u32 - 1)
    }

    /// Amplitude level carrying the given `m - 1` amplitude bits.
    pub fn amplitude_of_bits(&self, bits: u32) -> usize {
        let half = self.num_points() / 2;
        self.point_of_label(bits | half as u32) - half
    }

    /// `P_X` over all `2^m` points for uniform signs and amplitude PMF `p`.
    pub fn symmetric_pmf(&self, p: &Pmf) -> Vec<f64> {
        let half = self.num_points() / 2;
        (0..self.num_points())
            .map(|i| {
                let j = if i >= half { i - half } else { half - 1 - i };
                p.probs()[j] / 2.0
            })
            .collect()
    }
}
