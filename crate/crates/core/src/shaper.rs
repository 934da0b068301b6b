//! Uniform interface over every amplitude shaper, with the input length
//! reduced to a target `k` when the codebook is larger than needed.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::alphabet::AmplitudeAlphabet;
use crate::ccdm::CcdmCodebook;
use crate::combinatorics::{BitWord, Composition};
use crate::distribution::{avg_energy, entropy, mb_from_entropy, optimize_mb, quantize_pmf, Pmf};
use crate::error::{Error, Result};
use crate::labeling::BrgcLabeling;
use crate::metrics::bmd::RateMetric;
use crate::mpdm::MpdmCodebook;
use crate::spsh::{min_radius, EssTrellis, Precision, SmTables, SphereShaper};

/// Shaper choice as written in configuration files.
///
/// For the distribution matchers the composition is either given, or
/// derived from the MB pmf that is optimal at `snr_db` (raised until the
/// codebook reaches `2^k` words), or, with neither field, from the MB pmf of
/// entropy `k/n` raised the same way. Sphere shapers default to the smallest
/// sphere holding `2^k` sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum ShaperSpec {
    /// Uniform signaling: no shaper, consecutive bit-to-symbol mapping.
    Uniform,
    /// Uniform amplitudes inside the PAS chain.
    Identity,
    Ccdm {
        #[serde(default)]
        composition: Option<Composition>,
        #[serde(default)]
        snr_db: Option<f64>,
    },
    Mpdm {
        #[serde(default)]
        composition: Option<Composition>,
        #[serde(default)]
        snr_db: Option<f64>,
    },
    Ess {
        #[serde(default)]
        e_max: Option<u64>,
        #[serde(default = "full_precision")]
        precision: Precision,
    },
    Sm {
        #[serde(default)]
        e_max: Option<u64>,
        #[serde(default = "full_precision")]
        precision: Precision,
    },
}

fn full_precision() -> Precision {
    Precision::Full
}

impl ShaperSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ShaperSpec::Uniform => "uniform",
            ShaperSpec::Identity => "identity",
            ShaperSpec::Ccdm { .. } => "ccdm",
            ShaperSpec::Mpdm { .. } => "mpdm",
            ShaperSpec::Ess { .. } => "ess",
            ShaperSpec::Sm { .. } => "sm",
        }
    }

    /// Builds a shaper with exactly `k` input bits over `n` amplitudes.
    pub fn build(&self, alph: &AmplitudeAlphabet, n: usize, k: usize) -> Result<Shaper> {
        let kind = match self {
            ShaperSpec::Uniform | ShaperSpec::Identity => {
                let lab = BrgcLabeling::for_alphabet(alph)?;
                let native = n * (lab.m() as usize - 1);
                if k != native {
                    return Err(Error::Config(format!(
                        "uniform amplitudes carry {native} bits per block, not {k}"
                    )));
                }
                ShaperKind::Identity(lab)
            }
            ShaperSpec::Ccdm { composition, snr_db } => {
                let c = match composition {
                    Some(c) => c.clone(),
                    None => dm_composition(alph, n, k, DmScheme::Ccdm, *snr_db)?,
                };
                ShaperKind::Ccdm(CcdmCodebook::new(c)?)
            }
            ShaperSpec::Mpdm { composition, snr_db } => {
                let c = match composition {
                    Some(c) => c.clone(),
                    None => dm_composition(alph, n, k, DmScheme::Mpdm, *snr_db)?,
                };
                ShaperKind::Mpdm(MpdmCodebook::build(&c)?)
            }
            ShaperSpec::Ess { e_max, precision } => {
                let e = match e_max {
                    Some(e) => *e,
                    None => min_radius(n, alph, k)?,
                };
                ShaperKind::Ess(EssTrellis::build(n, alph, e, *precision)?)
            }
            ShaperSpec::Sm { e_max, precision } => {
                let e = match e_max {
                    Some(e) => *e,
                    None => min_radius(n, alph, k)?,
                };
                ShaperKind::Sm(SmTables::build(n, alph, e, *precision)?)
            }
        };
        Shaper::new(kind, alph.clone(), k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmScheme {
    Ccdm,
    Mpdm,
}

/// Input length of a distribution matcher built for composition `c`.
pub fn dm_input_bits(c: &Composition, scheme: DmScheme) -> Result<usize> {
    Ok(match scheme {
        DmScheme::Ccdm => CcdmCodebook::new(c.clone())?.k(),
        DmScheme::Mpdm => MpdmCodebook::build(c)?.k(),
    })
}

/// Target composition for a matcher that must address `2^k` words.
///
/// Starts from the MB pmf optimal at `snr_db` (or of entropy `k/n`) and, if
/// its quantized composition falls short of `k` bits, moves up the MB family
/// (higher entropy, i.e. a higher design SNR) to the first entropy that
/// suffices, located by bisection to `1e-6` bit.
pub fn dm_composition(
    alph: &AmplitudeAlphabet,
    n: usize,
    k: usize,
    scheme: DmScheme,
    snr_db: Option<f64>,
) -> Result<Composition> {
    let h_max = (alph.len() as f64).log2();
    let compose = |h: f64| -> Result<Composition> {
        let pmf = if h >= h_max {
            Pmf::uniform(alph.len())
        } else {
            mb_from_entropy(alph, h)?.pmf
        };
        quantize_pmf(&pmf, n)
    };
    let start = match snr_db {
        Some(snr) => entropy(&optimize_mb(alph, snr, RateMetric::Rbmd)?.pmf),
        None => (k as f64 / n as f64).min(h_max),
    };
    let c = compose(start)?;
    if dm_input_bits(&c, scheme)? >= k {
        return Ok(c);
    }
    let top = compose(h_max)?;
    if dm_input_bits(&top, scheme)? < k {
        return Err(Error::RateTooHigh {
            k,
            max: dm_input_bits(&top, scheme)?,
        });
    }
    let (mut lo, mut hi) = (start, h_max);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if dm_input_bits(&compose(mid)?, scheme)? >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    compose(hi)
}

#[derive(Debug, Clone)]
pub enum ShaperKind {
    Identity(BrgcLabeling),
    Ccdm(CcdmCodebook),
    Mpdm(MpdmCodebook),
    Ess(EssTrellis),
    Sm(SmTables),
}

/// A shaper operated with `k` input bits. Words are extended with leading
/// zeros to the native input length, so only the first `2^k` codewords are
/// used.
#[derive(Debug, Clone)]
pub struct Shaper {
    kind: ShaperKind,
    alph: AmplitudeAlphabet,
    k: usize,
    native_k: usize,
    n: usize,
}

impl Shaper {
    pub fn new(kind: ShaperKind, alph: AmplitudeAlphabet, k: usize) -> Result<Self> {
        let (native_k, n) = match &kind {
            ShaperKind::Identity(_) => (k, 0),
            ShaperKind::Ccdm(cb) => (cb.k(), cb.n()),
            ShaperKind::Mpdm(cb) => (cb.k(), cb.n()),
            ShaperKind::Ess(t) => (t.k(), t.n()),
            ShaperKind::Sm(t) => (t.k(), t.n()),
        };
        let n = match &kind {
            ShaperKind::Identity(lab) => k / (lab.m() as usize - 1),
            _ => n,
        };
        if k > native_k {
            return Err(Error::RateTooHigh { k, max: native_k });
        }
        Ok(Self {
            kind,
            alph,
            k,
            native_k,
            n,
        })
    }

    pub fn kind(&self) -> &ShaperKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ShaperKind::Identity(_) => "identity",
            ShaperKind::Ccdm(_) => "ccdm",
            ShaperKind::Mpdm(_) => "mpdm",
            ShaperKind::Ess(_) => "ess",
            ShaperKind::Sm(_) => "sm",
        }
    }

    /// Operational input length.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Input length of the full codebook.
    pub fn native_k(&self) -> usize {
        self.native_k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &AmplitudeAlphabet {
        &self.alph
    }

    pub fn shape(&self, bits: &[u8]) -> Result<Vec<u32>> {
        if bits.len() != self.k {
            return Err(Error::WordLength {
                got: bits.len(),
                expected: self.k,
            });
        }
        if let ShaperKind::Identity(lab) = &self.kind {
            let w = lab.m() as usize - 1;
            return Ok(bits
                .chunks(w)
                .map(|c| {
                    let v = c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                    self.alph.amplitude(lab.amplitude_of_bits(v))
                })
                .collect());
        }
        let mut padded = vec![0u8; self.native_k - self.k];
        padded.extend_from_slice(bits);
        let w = BitWord::new(padded)?;
        match &self.kind {
            ShaperKind::Ccdm(cb) => cb.encode(&w),
            ShaperKind::Mpdm(cb) => cb.encode(&w),
            ShaperKind::Ess(t) => t.encode(&w),
            ShaperKind::Sm(t) => t.encode(&w),
            ShaperKind::Identity(_) => unreachable!(),
        }
    }

    /// Inverse of [`Shaper::shape`]; any sequence outside the operated
    /// codebook yields [`Error::DeshapeFailure`].
    pub fn deshape(&self, amplitudes: &[u32]) -> Result<Vec<u8>> {
        if amplitudes.len() != self.n {
            return Err(Error::DeshapeFailure);
        }
        if let ShaperKind::Identity(lab) = &self.kind {
            let w = lab.m() - 1;
            let mut out = Vec::with_capacity(self.k);
            for &a in amplitudes {
                let j = self.alph.index_of(a).ok_or(Error::DeshapeFailure)?;
                let v = lab.amplitude_bits(j);
                out.extend((0..w).rev().map(|i| ((v >> i) & 1) as u8));
            }
            return Ok(out);
        }
        let word = match &self.kind {
            ShaperKind::Ccdm(cb) => cb.decode(amplitudes),
            ShaperKind::Mpdm(cb) => cb.decode(amplitudes),
            ShaperKind::Ess(t) => t.decode(amplitudes),
            ShaperKind::Sm(t) => t.decode(amplitudes),
            ShaperKind::Identity(_) => unreachable!(),
        }
        .map_err(|_| Error::DeshapeFailure)?;
        let pad = self.native_k - self.k;
        if word.bits()[..pad].iter().any(|&b| b != 0) {
            return Err(Error::DeshapeFailure);
        }
        Ok(word.bits()[pad..].to_vec())
    }

    /// Amplitude PMF over the `2^k` operated codewords.
    pub fn induced_pmf(&self) -> Result<Pmf> {
        let count = BigUint::one() << self.k;
        match &self.kind {
            ShaperKind::Identity(_) => Ok(Pmf::uniform(self.alph.len())),
            ShaperKind::Ccdm(cb) => Ok(Pmf::from_composition(cb.composition())),
            ShaperKind::Mpdm(cb) => cb.pmf_of_first(&count),
            ShaperKind::Ess(t) => t.induced_pmf_k(self.k).map(|(p, _)| p),
            ShaperKind::Sm(t) => t.induced_pmf_k(self.k).map(|(p, _)| p),
        }
    }

    pub fn avg_energy(&self) -> Result<f64> {
        Ok(avg_energy(&self.induced_pmf()?, &self.alph))
    }

    /// `H(P) - k/n` for the induced pmf.
    pub fn rate_loss(&self) -> Result<f64> {
        let p = self.induced_pmf()?;
        Ok(entropy(&p) - self.k as f64 / self.n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_scheme_round_trips_with_reduced_k() {
        let alph = AmplitudeAlphabet::from_bits(3).unwrap();
        let n = 24;
        let k = 36;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let specs = [
            ShaperSpec::Ccdm { composition: None, snr_db: None },
            ShaperSpec::Mpdm { composition: None, snr_db: None },
            ShaperSpec::Ess { e_max: None, precision: Precision::Full },
            ShaperSpec::Sm { e_max: None, precision: Precision::bounded(8, 5) },
        ];
        for spec in specs {
            let s = spec.build(&alph, n, k).unwrap();
            assert_eq!(s.k(), k);
            assert!(s.native_k() >= k);
            for _ in 0..50 {
                let bits: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2)).collect();
                let amps = s.shape(&bits).unwrap();
                assert_eq!(s.deshape(&amps).unwrap(), bits, "{}", s.name());
            }
        }
    }

    #[test]
    fn identity_shaper_uses_amplitude_labels() {
        let alph = AmplitudeAlphabet::from_bits(3).unwrap();
        let s = ShaperSpec::Identity.build(&alph, 2, 4).unwrap();
        assert_eq!(s.shape(&[1, 0, 0, 0]).unwrap(), vec![1, 7]);
        assert_eq!(s.deshape(&[5, 3]).unwrap(), vec![0, 1, 1, 1]);
        assert!(ShaperSpec::Identity.build(&alph, 2, 3).is_err());
    }

    #[test]
    fn unused_sequences_fail_to_deshape() {
        let alph = AmplitudeAlphabet::from_bits(3).unwrap();
        let s = ShaperSpec::Ess { e_max: None, precision: Precision::Full }
            .build(&alph, 8, 6)
            .unwrap();
        assert_eq!(s.deshape(&[7; 8]), Err(Error::DeshapeFailure));
    }

    #[test]
    fn composition_search_reaches_the_rate() {
        let alph = AmplitudeAlphabet::from_bits(3).unwrap();
        let c = dm_composition(&alph, 216, 378, DmScheme::Ccdm, None).unwrap();
        assert!(CcdmCodebook::new(c).unwrap().k() >= 378);
    }
}
