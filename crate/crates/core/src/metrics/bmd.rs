//! Achievable rates over the real AWGN channel: bit-metric decoding rate
//! `R_BMD`, mutual information, and the gap to capacity.

use std::f64::consts::{LN_2, PI};
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussHermite;
use serde::{Deserialize, Serialize};

use crate::alphabet::AmplitudeAlphabet;
use crate::distribution::{entropy_of, Pmf};
use crate::error::{Error, Result};
use crate::labeling::BrgcLabeling;

/// Gauss-Hermite nodes used for every channel expectation.
pub const QUADRATURE_NODES: usize = 128;

/// Lower and upper end of the SNR search used by [`required_snr_db`].
pub const SNR_SEARCH_DB: (f64, f64) = (-20.0, 60.0);

/// Tolerance of the SNR bisection.
pub const SNR_TOLERANCE_DB: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMetric {
    Rbmd,
    Mi,
}

/// Nodes `t_i` and normalized weights `w_i / √π` such that
/// `E[f(Z)] ≈ Σ w_i f(√2 t_i)` for `Z ~ N(0, 1)`.
fn nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let rule = GaussHermite::new(NonZeroUsize::new(QUADRATURE_NODES).unwrap());
        rule.as_node_weight_pairs()
            .iter()
            .map(|&(t, w)| (t * 2f64.sqrt(), w / PI.sqrt()))
            .collect()
    })
}

/// Linear SNR `E[X^2] / σ^2` from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Noise variance giving `snr_db` for the symmetric input `p_x` over `lab`.
pub fn noise_variance(p_x: &[f64], lab: &BrgcLabeling, snr_db: f64) -> f64 {
    let energy: f64 = p_x
        .iter()
        .enumerate()
        .map(|(i, &p)| p * lab.point(i).powi(2))
        .sum();
    energy / db_to_linear(snr_db)
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Conditional entropies `(H(X|Y), [H(B_j|Y)])` in bits.
fn conditional_entropies(p_x: &[f64], lab: &BrgcLabeling, sigma2: f64) -> (f64, Vec<f64>) {
    let m = lab.m();
    let log_prior: Vec<f64> = p_x
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        .collect();
    let sigma = sigma2.sqrt();
    let mut h_x = 0.0;
    let mut h_b = vec![0.0; m as usize];
    let mut metric = vec![0.0; p_x.len()];
    for (i, &p) in p_x.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let x = lab.point(i);
        for &(z, w) in nodes() {
            let y = x + sigma * z;
            for (k, out) in metric.iter_mut().enumerate() {
                let d = y - lab.point(k);
                *out = log_prior[k] - d * d / (2.0 * sigma2);
            }
            let all = log_sum_exp(metric.iter().cloned());
            h_x += p * w * (all - metric[i]);
            for (j, hb) in h_b.iter_mut().enumerate() {
                let b = lab.bit(i, j as u32);
                let same = log_sum_exp(
                    metric
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| lab.bit(*k, j as u32) == b)
                        .map(|(_, &v)| v),
                );
                *hb += p * w * (all - same);
            }
        }
    }
    (h_x / LN_2, h_b.into_iter().map(|h| h / LN_2).collect())
}

/// `R_BMD = [H(X) - Σ_j H(B_j | Y)]^+` for the symmetric input induced by
/// the amplitude PMF `p` with uniform signs.
pub fn rbmd(p: &Pmf, snr_db: f64, lab: &BrgcLabeling) -> f64 {
    let p_x = lab.symmetric_pmf(p);
    let sigma2 = noise_variance(&p_x, lab, snr_db);
    let (_, h_b) = conditional_entropies(&p_x, lab, sigma2);
    (entropy_of(&p_x) - h_b.iter().sum::<f64>()).max(0.0)
}

/// Mutual information `I(X; Y)` for the same input.
pub fn mutual_information(p: &Pmf, snr_db: f64, lab: &BrgcLabeling) -> f64 {
    let p_x = lab.symmetric_pmf(p);
    let sigma2 = noise_variance(&p_x, lab, snr_db);
    let (h_xy, _) = conditional_entropies(&p_x, lab, sigma2);
    (entropy_of(&p_x) - h_xy).max(0.0)
}

/// Rate under `metric` for a BRGC-labeled alphabet.
pub fn rate(p: &Pmf, alph: &AmplitudeAlphabet, snr_db: f64, metric: RateMetric) -> f64 {
    let lab = BrgcLabeling::for_alphabet(alph).expect("alphabet size must be a power of two");
    match metric {
        RateMetric::Rbmd => rbmd(p, snr_db, &lab),
        RateMetric::Mi => mutual_information(p, snr_db, &lab),
    }
}

/// Smallest SNR (dB) at which `rate_at(snr)` reaches `target`, by bisection.
pub fn solve_snr_db(target: f64, rate_at: impl Fn(f64) -> f64) -> Result<f64> {
    solve_snr_db_tol(target, SNR_TOLERANCE_DB, rate_at)
}

/// [`solve_snr_db`] with an explicit tolerance.
pub fn solve_snr_db_tol(target: f64, tol: f64, rate_at: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi) = SNR_SEARCH_DB;
    if rate_at(hi) < target {
        return Err(Error::Unachievable { rate: target });
    }
    if rate_at(lo) >= target {
        return Ok(lo);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rate_at(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// SNR (dB) at which `R_BMD` of `p` equals `r`.
pub fn required_snr_db(p: &Pmf, r: f64, lab: &BrgcLabeling) -> Result<f64> {
    let h_x = entropy_of(&lab.symmetric_pmf(p));
    if r >= h_x {
        return Err(Error::Unachievable { rate: r });
    }
    solve_snr_db(r, |snr| rbmd(p, snr, lab))
}

/// SNR (dB) needed by the Gaussian channel capacity to carry `r` bit/1-D.
pub fn capacity_snr_db(r: f64) -> f64 {
    linear_to_db(2f64.powf(2.0 * r) - 1.0)
}

/// Gap to capacity `ΔSNR` in dB at rate `r`.
pub fn delta_snr(p: &Pmf, r: f64, lab: &BrgcLabeling) -> Result<f64> {
    Ok(required_snr_db(p, r, lab)? - capacity_snr_db(r))
}
