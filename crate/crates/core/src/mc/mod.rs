//! Monotone heat-bath dynamics and coupling-from-the-past sampling for
//! regions beyond the exact engines.

mod cftp;
mod heatbath;

pub use cftp::{cftp_sample, estimate_gap, sample_magnetizations, Cftp, CftpSample, GapEstimate, GapMethod, GapSampler, DEFAULT_SWEEP_BUDGET};
pub use heatbath::{heatbath_threshold, CoupledChainPair, HeatBath};
