//! PAS rate bookkeeping and finite-length rate quantities.

use serde::Serialize;

use crate::distribution::{entropy, Pmf};
use crate::error::{Error, Result};
use crate::labeling::BrgcLabeling;
use crate::metrics::bmd::rbmd;

/// Bit budget of one PAS block of `n` symbols over `2^m`-ASK.
///
/// The amplitude entropy is taken as `k/n`, so every field is an integer
/// number of bits per block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PasRates {
    pub m: u32,
    /// Transmission rate in bit/1-D.
    pub rate: f64,
    pub code_rate: f64,
    pub gamma: f64,
    /// Bits carried by the amplitudes.
    pub k: usize,
    pub n: usize,
    /// Uniform bits carried by the signs, `γn`.
    pub sign_data: usize,
    /// `n(m - 1) - k`.
    pub shaping_redundancy: usize,
    /// `n(1 - γ)`, the parity bits.
    pub coding_redundancy: usize,
}

impl PasRates {
    /// Bookkeeping for an FEC code of rate `code_rate` over `n` symbols
    /// whose amplitudes carry `k` bits.
    pub fn new(m: u32, code_rate: f64, n: usize, k: usize) -> Result<Self> {
        if m < 2 || n == 0 || !(0.0..=1.0).contains(&code_rate) {
            return Err(Error::InvalidArgument(format!(
                "m = {m}, n = {n}, code rate = {code_rate}"
            )));
        }
        let n_c = m as usize * n;
        let info = code_rate * n_c as f64;
        if (info - info.round()).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "code rate {code_rate} gives a non-integer information length for {n_c} bits"
            )));
        }
        let info = info.round() as usize;
        let amp_bits = (m as usize - 1) * n;
        if info < amp_bits {
            return Err(Error::Config(format!(
                "code rate {code_rate} is below (m-1)/m; amplitude bits do not fit"
            )));
        }
        if k > amp_bits {
            return Err(Error::RateTooHigh { k, max: amp_bits });
        }
        let sign_data = info - amp_bits;
        let gamma = sign_data as f64 / n as f64;
        Ok(Self {
            m,
            rate: k as f64 / n as f64 + gamma,
            code_rate,
            gamma,
            k,
            n,
            sign_data,
            shaping_redundancy: amp_bits - k,
            coding_redundancy: n_c - info,
        })
    }

    /// Amplitude bits `k` that reach `rate` bit/1-D with this code rate.
    pub fn for_rate(m: u32, code_rate: f64, n: usize, rate: f64) -> Result<Self> {
        let gamma = code_rate * m as f64 - (m as f64 - 1.0);
        let k = (rate - gamma) * n as f64;
        if k < 0.0 || (k - k.round()).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "rate {rate} with code rate {code_rate} needs k = {k} amplitude bits"
            )));
        }
        Self::new(m, code_rate, n, k.round() as usize)
    }

    pub fn data_bits(&self) -> usize {
        self.k + self.sign_data
    }

    pub fn redundancy(&self) -> usize {
        self.shaping_redundancy + self.coding_redundancy
    }
}

/// `H(p) - k/n` in bit/1-D.
pub fn rate_loss(p: &Pmf, k: usize, n: usize) -> f64 {
    entropy(p) - k as f64 / n as f64
}

/// Finite-length achievable rate `R_BMD - R_loss` in bit/1-D.
pub fn air_n(p: &Pmf, k: usize, n: usize, snr_db: f64, lab: &BrgcLabeling) -> f64 {
    rbmd(p, snr_db, lab) - rate_loss(p, k, n)
}
