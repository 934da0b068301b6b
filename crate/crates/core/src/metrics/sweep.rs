//! Parameter sweeps behind the rate-loss, AIR and gap-to-capacity curves.
//! Grid points are evaluated in parallel; rows keep the input order.

use rayon::prelude::*;
use serde::Serialize;

use crate::alphabet::AmplitudeAlphabet;
use crate::ccdm::CcdmCodebook;
use crate::distribution::{avg_energy, entropy, mb_from_entropy, quantize_pmf, Pmf};
use crate::error::{Error, Result};
use crate::labeling::BrgcLabeling;
use crate::metrics::bmd::{capacity_snr_db, rbmd, solve_snr_db_tol, SNR_TOLERANCE_DB};
use crate::metrics::rates::{air_n, rate_loss};
use crate::mpdm::MpdmCodebook;
use crate::shaper::Shaper;
use crate::spsh::{min_radius, EssTrellis, Precision, SmTables, SphereShaper};

/// One `rateloss.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateLossRow {
    pub scheme: String,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "H")]
    pub entropy: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub rloss: f64,
}

impl RateLossRow {
    fn new(scheme: &str, n: usize, k: usize, p: &Pmf, alph: &AmplitudeAlphabet) -> Self {
        Self {
            scheme: scheme.to_string(),
            n,
            k,
            entropy: entropy(p),
            energy: avg_energy(p, alph),
            rloss: rate_loss(p, k, n),
        }
    }
}

/// Rate losses of CCDM, MPDM, ESS and SM at blocklength `n`.
///
/// The matchers use the composition quantized from `target`; both sphere
/// shapers are operated with MPDM's input length on the smallest sphere
/// holding `2^k` sequences.
pub fn rate_loss_point(alph: &AmplitudeAlphabet, target: &Pmf, n: usize) -> Result<Vec<RateLossRow>> {
    let c = quantize_pmf(target, n)?;
    let ccdm = CcdmCodebook::new(c.clone())?;
    let mpdm = MpdmCodebook::build(&c)?;
    let k = mpdm.k();
    let e_max = min_radius(n, alph, k)?;
    let ess = EssTrellis::build(n, alph, e_max, Precision::Full)?;
    let sm = SmTables::build(n, alph, e_max, Precision::Full)?;
    let (ess_pmf, _) = ess.induced_pmf_k(k)?;
    let (sm_pmf, _) = sm.induced_pmf_k(k)?;
    let mpdm_stats = mpdm.stats();
    Ok(vec![
        RateLossRow::new("ccdm", n, ccdm.k(), &Pmf::from_composition(&c), alph),
        RateLossRow::new("mpdm", n, k, &mpdm_stats.pmf, alph),
        RateLossRow::new("ess", n, k, &ess_pmf, alph),
        RateLossRow::new("sm", n, k, &sm_pmf, alph),
    ])
}

/// [`rate_loss_point`] over every blocklength in `ns`.
pub fn rate_loss_sweep(alph: &AmplitudeAlphabet, target: &Pmf, ns: &[usize]) -> Result<Vec<RateLossRow>> {
    let rows: Result<Vec<Vec<RateLossRow>>> = ns
        .par_iter()
        .map(|&n| rate_loss_point(alph, target, n))
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// The MB pmf of entropy `h` bit, uniform at the maximum.
pub fn mb_target(alph: &AmplitudeAlphabet, h: f64) -> Result<Pmf> {
    if h >= (alph.len() as f64).log2() - 1e-12 {
        Ok(Pmf::uniform(alph.len()))
    } else {
        Ok(mb_from_entropy(alph, h)?.pmf)
    }
}

/// Amplitude statistics of a shaping scheme, as seen by `AIR_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AirScheme {
    pub name: String,
    pub pmf: Pmf,
    pub k: usize,
    pub n: usize,
}

impl AirScheme {
    pub fn of_shaper(shaper: &Shaper) -> Result<Self> {
        Ok(Self {
            name: shaper.name().to_string(),
            pmf: shaper.induced_pmf()?,
            k: shaper.k(),
            n: shaper.n(),
        })
    }

    /// Uniform amplitudes with no rate loss.
    pub fn uniform(alph: &AmplitudeAlphabet, n: usize) -> Result<Self> {
        let m = BrgcLabeling::for_alphabet(alph)?.m() as usize;
        Ok(Self {
            name: "uniform".to_string(),
            pmf: Pmf::uniform(alph.len()),
            k: n * (m - 1),
            n,
        })
    }

    pub fn air(&self, snr_db: f64, lab: &BrgcLabeling) -> f64 {
        air_n(&self.pmf, self.k, self.n, snr_db, lab)
    }

    /// SNR (dB) at which `AIR_n` reaches `target`.
    pub fn required_snr_db(&self, target: f64, lab: &BrgcLabeling) -> Result<f64> {
        solve_snr_db_tol(target, SNR_TOLERANCE_DB, |s| self.air(s, lab))
    }
}

/// One `air.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AirRow {
    pub scheme: String,
    pub snr_db: f64,
    pub air: f64,
}

pub fn air_sweep(schemes: &[AirScheme], snrs: &[f64], lab: &BrgcLabeling) -> Vec<AirRow> {
    schemes
        .iter()
        .flat_map(|s| snrs.iter().map(move |&snr| (s, snr)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(s, snr)| AirRow {
            scheme: s.name.clone(),
            snr_db: snr,
            air: s.air(snr, lab),
        })
        .collect()
}

/// One `g2c.csv` row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2cRow {
    #[serde(rename = "Hx")]
    pub hx: f64,
    #[serde(rename = "Rc")]
    pub rc: f64,
    pub delta_snr_db: f64,
}

/// SNR tolerance used when the gap curve is minimized; the curve is flat
/// near its minimum, so the default tolerance would dominate the result.
const FINE_SNR_TOLERANCE_DB: f64 = 1e-6;

/// Gap to capacity at rate `rate` for the symmetric MB input of entropy `hx`.
pub fn g2c_point(alph: &AmplitudeAlphabet, rate: f64, hx: f64) -> Result<G2cRow> {
    g2c_point_tol(alph, rate, hx, SNR_TOLERANCE_DB)
}

fn g2c_point_tol(alph: &AmplitudeAlphabet, rate: f64, hx: f64, tol: f64) -> Result<G2cRow> {
    let lab = BrgcLabeling::for_alphabet(alph)?;
    let m = lab.m() as f64;
    if hx <= rate || hx > m + 1e-12 {
        return Err(Error::Unachievable { rate });
    }
    let p = mb_target(alph, hx - 1.0)?;
    let snr = solve_snr_db_tol(rate, tol, |s| rbmd(&p, s, &lab))?;
    Ok(G2cRow {
        hx,
        rc: (m + rate - hx) / m,
        delta_snr_db: snr - capacity_snr_db(rate),
    })
}

pub fn g2c_sweep(alph: &AmplitudeAlphabet, rate: f64, hx: &[f64]) -> Result<Vec<G2cRow>> {
    hx.par_iter().map(|&h| g2c_point(alph, rate, h)).collect()
}

/// Minimum of the gap curve over the MB family, by golden-section search
/// on `H(X) ∈ (rate, m]` to `1e-5` bit.
pub fn g2c_minimum(alph: &AmplitudeAlphabet, rate: f64) -> Result<G2cRow> {
    let m = BrgcLabeling::for_alphabet(alph)?.m() as f64;
    let f = |h: f64| g2c_point_tol(alph, rate, h, FINE_SNR_TOLERANCE_DB);
    // Coarse scan to bracket the minimum, then golden section.
    const GRID: usize = 40;
    let lo = rate + (m - rate) / GRID as f64;
    let grid: Vec<f64> = (0..=GRID)
        .map(|i| lo + (m - lo) * i as f64 / GRID as f64)
        .collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&h| f(h).map(|r| r.delta_snr_db))
        .collect::<Result<_>>()?;
    let best = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?.delta_snr_db;
    let mut fd = f(d)?.delta_snr_db;
    while b - a > 1e-5 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?.delta_snr_db;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?.delta_snr_db;
        }
    }
    f(0.5 * (a + b))
}
