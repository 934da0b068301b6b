//! Monte-Carlo frame error rate over the real AWGN channel.
//!
//! Frame `f` draws its information bits and unit-variance noise from the
//! ChaCha8 stream `f` of the configured seed, so every SNR point sees the
//! same frames and results do not depend on the number of worker threads.
//! Frames run in batches of [`BATCH`]; the stop rule is checked between
//! batches.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ldpc::{Builtin, DecoderKind, LdpcCode, QcPrototype};
use super::PasSystem;
use crate::alphabet::AmplitudeAlphabet;
use crate::error::{Error, Result};
use crate::metrics::rates::PasRates;
use crate::shaper::ShaperSpec;

pub const BATCH: usize = 64;

/// Where the binary code comes from. File paths are relative to the
/// configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeSpec {
    /// One of the shipped `n_c = 648` prototypes, by rate (`"5/6"`).
    Builtin(Builtin),
    /// A quasi-cyclic prototype in JSON (`{"z": .., "base": [[..]]}`).
    Qc(PathBuf),
    Alist(PathBuf),
}

impl CodeSpec {
    pub fn load(&self, base_dir: &Path) -> Result<LdpcCode> {
        let read = |p: &PathBuf| std::fs::read_to_string(base_dir.join(p)).map_err(Error::from);
        match self {
            CodeSpec::Builtin(rate) => Ok(LdpcCode::ieee80211_648(*rate)),
            CodeSpec::Qc(p) => LdpcCode::from_prototype(&QcPrototype::from_json(&read(p)?)?),
            CodeSpec::Alist(p) => LdpcCode::from_alist(&read(p)?),
        }
    }
}

fn default_iterations() -> usize {
    50
}

fn default_min_errors() -> usize {
    100
}

fn default_max_frames() -> usize {
    100_000
}

/// Simulation configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PasConfig {
    /// Bits per real ASK symbol; 64-QAM is two 8-ASK symbols, `m = 3`.
    pub m: u32,
    pub shaper: ShaperSpec,
    pub code: CodeSpec,
    /// Transmission rate in bit/1-D.
    pub rate: f64,
    /// Optional check of `γ = R_c m - (m - 1)`.
    #[serde(default)]
    pub gamma: Option<f64>,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub decoder: DecoderKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_min_errors")]
    pub min_frame_errors: usize,
    #[serde(default = "default_max_frames")]
    pub max_frames: usize,
}

impl PasConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds the transmitter/receiver and the rate bookkeeping.
    pub fn system(&self, base_dir: &Path) -> Result<(PasSystem, PasRates)> {
        let code = self.code.load(base_dir)?;
        let m = self.m;
        if m < 2 || code.n() % m as usize != 0 {
            return Err(Error::Config(format!(
                "code length {} does not split into {m}-bit symbols",
                code.n()
            )));
        }
        let n = code.n() / m as usize;
        let code_rate = code.k() as f64 / code.n() as f64;
        let uniform = matches!(self.shaper, ShaperSpec::Uniform);
        let rates = if uniform {
            let r = code_rate * m as f64;
            if (r - self.rate).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "uniform signaling with code rate {code_rate} carries {r} bit/1-D, not {}",
                    self.rate
                )));
            }
            PasRates::new(m, (m as f64 - 1.0) / m as f64, n, n * (m as usize - 1))?
        } else {
            PasRates::for_rate(m, code_rate, n, self.rate)?
        };
        if let Some(g) = self.gamma {
            if !uniform && (g - rates.gamma).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "gamma {g} disagrees with the code rate, which gives {}",
                    rates.gamma
                )));
            }
        }
        let alph = AmplitudeAlphabet::from_bits(m)?;
        let shaper = if uniform {
            None
        } else {
            Some(self.shaper.build(&alph, n, rates.k)?)
        };
        Ok((PasSystem::new(m, shaper, code)?, rates))
    }
}

/// One `fer.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerRecord {
    pub snr_db: f64,
    pub frames: usize,
    pub frame_errors: usize,
    pub bit_errors: usize,
    pub fer: f64,
    pub ber: f64,
}

/// Errors of one frame: `(frame error, bit errors)`. A deshaping failure
/// counts every shaped bit as wrong, plus the sign-carried bits that differ.
pub fn run_frame(
    sys: &PasSystem,
    frame_id: u64,
    seed: u64,
    sigma2: f64,
    max_iter: usize,
    kind: DecoderKind,
) -> Result<(bool, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame_id);
    let u: Vec<u8> = (0..sys.info_bits()).map(|_| rng.gen_range(0..2)).collect();
    let sigma = sigma2.sqrt();
    let y: Vec<f64> = sys
        .transmit(&u)?
        .into_iter()
        .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let llr = sys.codeword_llrs(&y, sigma2)?;
    let decoded = sys.code().decode(&llr, max_iter, kind)?;
    match sys.recover(&decoded.bits) {
        Ok(v) => {
            let errors = v.iter().zip(&u).filter(|(a, b)| a != b).count();
            Ok((errors > 0, errors))
        }
        Err(Error::DeshapeFailure) => {
            let k = sys.shaped_bits();
            let extra: Vec<u8> = sys.code().info_positions()[sys.code().k() - (u.len() - k)..]
                .iter()
                .map(|&p| decoded.bits[p])
                .collect();
            let wrong = extra.iter().zip(&u[k..]).filter(|(a, b)| a != b).count();
            Ok((true, k + wrong))
        }
        Err(e) => Err(e),
    }
}

/// FER and BER at every configured SNR.
pub fn simulate_fer(cfg: &PasConfig, sys: &PasSystem) -> Result<Vec<FerRecord>> {
    if cfg.max_frames == 0 {
        return Err(Error::Config("max_frames must be positive".into()));
    }
    let mut records = Vec::with_capacity(cfg.snr_db.len());
    for &snr in &cfg.snr_db {
        let sigma2 = sys.noise_variance(snr);
        let (mut frames, mut frame_errors, mut bit_errors) = (0usize, 0usize, 0usize);
        while frames < cfg.max_frames && frame_errors < cfg.min_frame_errors {
            let batch = BATCH.min(cfg.max_frames - frames);
            let results: Vec<(bool, usize)> = (frames..frames + batch)
                .into_par_iter()
                .map(|f| run_frame(sys, f as u64, cfg.seed, sigma2, cfg.max_iterations, cfg.decoder))
                .collect::<Result<_>>()?;
            frames += batch;
            frame_errors += results.iter().filter(|r| r.0).count();
            bit_errors += results.iter().map(|r| r.1).sum::<usize>();
        }
        records.push(FerRecord {
            snr_db: snr,
            frames,
            frame_errors,
            bit_errors,
            fer: frame_errors as f64 / frames as f64,
            ber: bit_errors as f64 / (frames * sys.info_bits()) as f64,
        });
    }
    Ok(records)
}

/// SNR at which the FER curve crosses `target`, interpolating `log10 FER`
/// linearly between the two bracketing points. `None` if not bracketed.
pub fn snr_at_fer(records: &[FerRecord], target: f64) -> Option<f64> {
    records.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.fer >= target && b.fer < target && b.fer > 0.0 {
            let (la, lb, lt) = (a.fer.log10(), b.fer.log10(), target.log10());
            Some(a.snr_db + (b.snr_db - a.snr_db) * (la - lt) / (la - lb))
        } else if a.fer >= target && b.fer == 0.0 {
            // No errors at the upper point: bound the crossing at one error.
            let lb = (1.0 / b.frames as f64).log10();
            let (la, lt) = (a.fer.log10(), target.log10());
            (lt > lb).then(|| a.snr_db + (b.snr_db - a.snr_db) * (la - lt) / (la - lb))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(shaper: &str, code: &str, rate: f64) -> PasConfig {
        PasConfig::from_json(&format!(
            r#"{{"m": 3, "shaper": {shaper}, "code": {{"builtin": "{code}"}}, "rate": {rate},
                "snr_db": [30.0], "seed": 11, "max_frames": 128}}"#
        ))
        .unwrap()
    }

    #[test]
    fn far_above_the_waterfall_nothing_fails() {
        let cfg = config(r#"{"scheme": "ess"}"#, "5/6", 2.25);
        let (sys, rates) = cfg.system(Path::new(".")).unwrap();
        assert_eq!(rates.k, 378);
        let rec = simulate_fer(&cfg, &sys).unwrap();
        assert_eq!(rec[0].frames, 128);
        assert_eq!(rec[0].frame_errors, 0);
    }

    #[test]
    fn inconsistent_configurations_are_rejected() {
        let cfg = config(r#"{"scheme": "uniform"}"#, "5/6", 2.25);
        assert!(cfg.system(Path::new(".")).is_err());
        let mut cfg = config(r#"{"scheme": "ess"}"#, "5/6", 2.25);
        cfg.gamma = Some(0.25);
        assert!(cfg.system(Path::new(".")).is_err());
        assert!(PasConfig::from_json(r#"{"m": 3}"#).is_err());
    }

    #[test]
    fn crossing_is_interpolated_in_log_domain() {
        let rec = |snr: f64, fer: f64| FerRecord {
            snr_db: snr,
            frames: 1000,
            frame_errors: (fer * 1000.0) as usize,
            bit_errors: 0,
            fer,
            ber: 0.0,
        };
        let r = [rec(1.0, 0.5), rec(2.0, 0.1), rec(3.0, 0.001)];
        assert!((snr_at_fer(&r, 0.01).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(snr_at_fer(&r, 0.9), None);
    }
}
