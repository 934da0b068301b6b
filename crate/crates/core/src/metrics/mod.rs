//! Rate, achievable-rate and complexity analytics.

pub mod bmd;
pub mod cost;
pub mod rates;
pub mod sweep;

pub use bmd::{delta_snr, rbmd, required_snr_db, RateMetric};
pub use cost::{cost_report, CostInput, CostReport, CostScheme};
pub use rates::{air_n, rate_loss, PasRates};
