//! Finite-blocklength amplitude shaping for probabilistic amplitude shaping
//! (PAS): constant-composition and multiset-partition distribution matching,
//! enumerative sphere shaping and shell mapping, rate/complexity analytics,
//! and an AWGN link simulator with LDPC coding.

pub mod alphabet;
pub mod ccdm;
pub mod combinatorics;
pub mod distribution;
pub mod error;
pub mod labeling;
pub mod metrics;
pub mod mpdm;
pub mod pas;
pub mod shaper;
pub mod spsh;

pub use alphabet::AmplitudeAlphabet;
pub use combinatorics::{multinomial, BigIndex, BitWord, Composition};
pub use distribution::{entropy, avg_energy, mb_from_entropy, quantize_pmf, MBDistribution, Pmf};
pub use error::{Error, Result};
pub use labeling::BrgcLabeling;
