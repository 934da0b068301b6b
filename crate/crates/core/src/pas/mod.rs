//! Probabilistic amplitude shaping over `2^m`-ASK with a systematic binary
//! code, and uniform signaling for reference.
//!
//! In a shaped frame of `n` symbols the encoder input is the `n(m-1)`
//! amplitude bits (symbol by symbol, `B2` first) followed by `γn` uniform
//! bits. The sign of symbol `i` is the `i`-th bit of the remaining codeword
//! positions taken in order, so the `γn` uniform bits come first and the
//! parity bits after them. Uniform frames map the codeword to symbols as
//! consecutive `m`-bit labels `B1 ... Bm`.

pub mod ldpc;
pub mod llr;
pub mod sim;

pub use crate::labeling::BrgcLabeling;
pub use ldpc::{Builtin, DecoderKind, LdpcCode, QcPrototype};
pub use llr::{llr, Demapper};
pub use sim::{simulate_fer, CodeSpec, FerRecord, PasConfig};

use crate::alphabet::AmplitudeAlphabet;
use crate::error::{Error, Result};
use crate::metrics::bmd::noise_variance;
use crate::shaper::Shaper;

/// A transmitter/receiver pair for one shaper and code.
#[derive(Debug, Clone)]
pub struct PasSystem {
    lab: BrgcLabeling,
    alph: AmplitudeAlphabet,
    /// `None` for uniform signaling.
    shaper: Option<Shaper>,
    code: LdpcCode,
    n: usize,
    /// Uniform bits carried by the signs.
    extra: usize,
    p_x: Vec<f64>,
    /// Codeword positions of the sign bits, one per symbol.
    sign_positions: Vec<usize>,
}

/// A transmitted frame: codeword and the chosen point indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub codeword: Vec<u8>,
    pub points: Vec<usize>,
}

impl PasSystem {
    pub fn new(m: u32, shaper: Option<Shaper>, code: LdpcCode) -> Result<Self> {
        let lab = BrgcLabeling::new(m)?;
        let alph = AmplitudeAlphabet::from_bits(m)?;
        let m = m as usize;
        if code.n() % m != 0 {
            return Err(Error::Config(format!(
                "code length {} is not a multiple of m = {m}",
                code.n()
            )));
        }
        let n = code.n() / m;
        let (extra, p_x, sign_positions) = match &shaper {
            None => (0, vec![1.0 / lab.num_points() as f64; lab.num_points()], Vec::new()),
            Some(s) => {
                if s.n() != n {
                    return Err(Error::Config(format!(
                        "shaper produces {} amplitudes, the code carries {n} symbols",
                        s.n()
                    )));
                }
                let amp_bits = n * (m - 1);
                if code.k() < amp_bits {
                    return Err(Error::Config(format!(
                        "code rate {} is below (m-1)/m",
                        code.rate()
                    )));
                }
                let signs: Vec<usize> = code.info_positions()[amp_bits..]
                    .iter()
                    .chain(code.parity_positions())
                    .copied()
                    .collect();
                debug_assert_eq!(signs.len(), n);
                let p_a = s.induced_pmf()?;
                (code.k() - amp_bits, lab.symmetric_pmf(&p_a), signs)
            }
        };
        Ok(Self {
            lab,
            alph,
            shaper,
            code,
            n,
            extra,
            p_x,
            sign_positions,
        })
    }

    /// Symbols per frame.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labeling(&self) -> &BrgcLabeling {
        &self.lab
    }

    pub fn code(&self) -> &LdpcCode {
        &self.code
    }

    pub fn shaper(&self) -> Option<&Shaper> {
        self.shaper.as_ref()
    }

    /// Information bits per frame, `k + γn` (or `k_c` when uniform).
    pub fn info_bits(&self) -> usize {
        match &self.shaper {
            None => self.code.k(),
            Some(s) => s.k() + self.extra,
        }
    }

    /// The bits carried by the amplitudes; zero when uniform.
    pub fn shaped_bits(&self) -> usize {
        self.shaper.as_ref().map_or(0, Shaper::k)
    }

    /// Prior over the `2^m` points.
    pub fn point_pmf(&self) -> &[f64] {
        &self.p_x
    }

    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        noise_variance(&self.p_x, &self.lab, snr_db)
    }

    pub fn transmit_frame(&self, u: &[u8]) -> Result<Frame> {
        if u.len() != self.info_bits() {
            return Err(Error::WordLength {
                got: u.len(),
                expected: self.info_bits(),
            });
        }
        let m = self.lab.m() as usize;
        let Some(shaper) = &self.shaper else {
            let codeword = self.code.encode(u)?;
            let points = codeword
                .chunks(m)
                .map(|c| {
                    let label = c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                    self.lab.point_of_label(label)
                })
                .collect();
            return Ok(Frame { codeword, points });
        };
        let (shaped, extra) = u.split_at(shaper.k());
        let amplitudes = shaper.shape(shaped)?;
        let indices = self.alph.indices(&amplitudes)?;
        let mut info = Vec::with_capacity(self.code.k());
        for &j in &indices {
            let bits = self.lab.amplitude_bits(j);
            info.extend((0..m - 1).rev().map(|b| ((bits >> b) & 1) as u8));
        }
        info.extend_from_slice(extra);
        let codeword = self.code.encode(&info)?;
        let points = indices
            .iter()
            .zip(&self.sign_positions)
            .map(|(&j, &p)| self.lab.point_of(codeword[p], j))
            .collect();
        Ok(Frame { codeword, points })
    }

    /// Channel input `x^n` for the information bits `u`.
    pub fn transmit(&self, u: &[u8]) -> Result<Vec<f64>> {
        let frame = self.transmit_frame(u)?;
        Ok(frame.points.iter().map(|&i| self.lab.point(i)).collect())
    }

    /// Codeword LLRs of the received block.
    pub fn codeword_llrs(&self, y: &[f64], sigma2: f64) -> Result<Vec<f64>> {
        if y.len() != self.n {
            return Err(Error::SequenceLength {
                got: y.len(),
                expected: self.n,
            });
        }
        let m = self.lab.m() as usize;
        let demapper = Demapper::new(self.lab, &self.p_x, sigma2);
        let mut out = vec![0.0; self.code.n()];
        let mut bits = vec![0.0; m];
        let info = self.code.info_positions();
        for (i, &yi) in y.iter().enumerate() {
            demapper.llrs(yi, &mut bits);
            if self.shaper.is_none() {
                out[m * i..m * (i + 1)].copy_from_slice(&bits);
            } else {
                out[self.sign_positions[i]] = bits[0];
                for j in 1..m {
                    out[info[(m - 1) * i + j - 1]] = bits[j];
                }
            }
        }
        Ok(out)
    }

    /// Information bits recovered from a decoded codeword.
    pub fn recover(&self, codeword: &[u8]) -> Result<Vec<u8>> {
        let info: Vec<u8> = self.code.info_positions().iter().map(|&p| codeword[p]).collect();
        let Some(shaper) = &self.shaper else {
            return Ok(info);
        };
        let m = self.lab.m() as usize;
        let amp_bits = self.n * (m - 1);
        let amplitudes: Vec<u32> = info[..amp_bits]
            .chunks(m - 1)
            .map(|c| {
                let v = c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                self.alph.amplitude(self.lab.amplitude_of_bits(v))
            })
            .collect();
        let mut u = shaper.deshape(&amplitudes)?;
        u.extend_from_slice(&info[amp_bits..]);
        Ok(u)
    }

    /// Demaps, decodes and deshapes `y`. An amplitude sequence outside the
    /// shaper's codebook yields [`Error::DeshapeFailure`].
    pub fn receive(&self, y: &[f64], sigma2: f64, max_iter: usize, kind: DecoderKind) -> Result<Vec<u8>> {
        let llr = self.codeword_llrs(y, sigma2)?;
        let decoded = self.code.decode(&llr, max_iter, kind)?;
        self.recover(&decoded.bits)
    }
}
