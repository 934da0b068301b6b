//! Amplitude PMFs, Maxwell-Boltzmann families and n-type quantization.

use serde::{Deserialize, Serialize};

use crate::alphabet::AmplitudeAlphabet;
use crate::combinatorics::Composition;
use crate::error::{Error, Result};
use crate::metrics::bmd::{self, RateMetric};

const SUM_TOLERANCE: f64 = 1e-12;

/// Probability mass function aligned with an amplitude alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates nonnegativity and normalization (within `1e-12`).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty pmf".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid probability {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("pmf sums to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidArgument("weights do not normalize".into()));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n_a: usize) -> Self {
        Self {
            probs: vec![1.0 / n_a as f64; n_a],
        }
    }

    /// Empirical distribution `C / n` of a composition.
    pub fn from_composition(c: &Composition) -> Self {
        let n = c.n() as f64;
        Self {
            probs: c.counts().iter().map(|&x| x as f64 / n).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.probs
    }
}

/// Entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// Average energy per symbol `Σ p(a) a^2`.
pub fn avg_energy(p: &Pmf, alph: &AmplitudeAlphabet) -> f64 {
    p.probs()
        .iter()
        .enumerate()
        .map(|(j, &x)| x * alph.energy(j) as f64)
        .sum()
}

/// Informational divergence `D(p || q)` in bits.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).log2() } else { f64::INFINITY })
        .sum()
}

/// Maxwell-Boltzmann distribution `K(λ) exp(-λ a^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MBDistribution {
    pub lambda: f64,
    pub normalizer: f64,
    pub pmf: Pmf,
}

impl MBDistribution {
    pub fn new(alph: &AmplitudeAlphabet, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda = {lambda}")));
        }
        // Weights relative to a = 1 keep large λ from underflowing everything.
        let rel: Vec<f64> = (0..alph.len())
            .map(|j| (-lambda * (alph.energy(j) - 1) as f64).exp())
            .collect();
        let sum: f64 = rel.iter().sum();
        let normalizer = lambda.exp() / sum;
        let pmf = Pmf {
            probs: rel.iter().map(|w| w / sum).collect(),
        };
        Ok(Self {
            lambda,
            normalizer,
            pmf,
        })
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.pmf)
    }
}

/// Upper end of the λ bracket searched by [`mb_from_entropy`].
pub const LAMBDA_BRACKET: f64 = 10.0;

/// The MB distribution over `alph` whose entropy equals `h_target`.
///
/// Entropy is strictly decreasing in λ, so λ is found by bisection on
/// `[0, 10]` (extended if the target lies below the entropy at λ = 10).
pub fn mb_from_entropy(alph: &AmplitudeAlphabet, h_target: f64) -> Result<MBDistribution> {
    let h_max = (alph.len() as f64).log2();
    if !(h_target > 0.0) || h_target > h_max + 1e-12 {
        return Err(Error::EntropyOutOfRange {
            target: h_target,
            max: h_max,
        });
    }
    if (h_max - h_target).abs() <= 1e-15 {
        return MBDistribution::new(alph, 0.0);
    }
    let h_at = |lambda: f64| MBDistribution::new(alph, lambda).map(|d| d.entropy());
    let mut lo = 0.0;
    let mut hi = LAMBDA_BRACKET;
    while h_at(hi)? > h_target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::EntropyOutOfRange {
                target: h_target,
                max: h_max,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h_at(mid)? > h_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            break;
        }
    }
    MBDistribution::new(alph, 0.5 * (lo + hi))
}

/// The MB distribution maximizing `metric` over the AWGN channel at `snr_db`.
///
/// The search runs over the entropy of the family (a monotone
/// reparametrization of λ): a 64-point grid locates the bracket, golden
/// section refines it.
pub fn optimize_mb(
    alph: &AmplitudeAlphabet,
    snr_db: f64,
    metric: RateMetric,
) -> Result<MBDistribution> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("snr_db = {snr_db}")));
    }
    let h_max = (alph.len() as f64).log2();
    if alph.len() == 1 {
        return MBDistribution::new(alph, 0.0);
    }
    let rate_at = |h: f64| -> Result<f64> {
        let mb = if h >= h_max {
            MBDistribution::new(alph, 0.0)?
        } else {
            mb_from_entropy(alph, h)?
        };
        Ok(bmd::rate(&mb.pmf, alph, snr_db, metric))
    };
    const GRID: usize = 64;
    let grid: Vec<f64> = (1..=GRID).map(|i| h_max * i as f64 / GRID as f64).collect();
    let mut best = 0;
    let mut best_rate = f64::NEG_INFINITY;
    for (i, &h) in grid.iter().enumerate() {
        let r = rate_at(h)?;
        if r > best_rate {
            best_rate = r;
            best = i;
        }
    }
    let mut a = if best == 0 { 1e-9 } else { grid[best - 1] };
    let mut b = if best + 1 == GRID { h_max } else { grid[best + 1] };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = rate_at(c)?;
    let mut fd = rate_at(d)?;
    while b - a > 1e-7 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = rate_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = rate_at(d)?;
        }
    }
    let mut h = 0.5 * (a + b);
    if best + 1 == GRID && rate_at(h_max)? >= rate_at(h)? {
        h = h_max;
    }
    if h >= h_max {
        MBDistribution::new(alph, 0.0)
    } else {
        mb_from_entropy(alph, h)
    }
}

/// The n-type composition minimizing `D(C/n || p)`.
///
/// The objective is separable and convex in the counts, so allocating the
/// `n` units one at a time to the letter with the smallest divergence
/// increase is optimal. Ties go to the highest letter index, which yields the
/// lexicographically smallest optimal counts.
pub fn quantize_pmf(p: &Pmf, n: usize) -> Result<Composition> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be positive".into()));
    }
    let probs = p.probs();
    let cost = |c: u32, q: f64| -> f64 {
        if c == 0 {
            0.0
        } else {
            let c = c as f64;
            c * (c / (n as f64 * q)).ln()
        }
    };
    let increment = |c: u32, q: f64| -> f64 {
        if q <= 0.0 {
            f64::INFINITY
        } else {
            cost(c + 1, q) - cost(c, q)
        }
    };
    let mut counts = vec![0u32; probs.len()];
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut best_inc = f64::INFINITY;
        for (j, &q) in probs.iter().enumerate() {
            let inc = increment(counts[j], q);
            if inc <= best_inc && inc.is_finite() {
                best_inc = inc;
                best = j;
            }
        }
        counts[best] += 1;
    }
    Ok(Composition::new(counts))
}
