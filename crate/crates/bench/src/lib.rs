//! Fixtures shared by the benchmarks in `benches/`.

use fhc_core::{ShiftParameters, ShiftProfile};

/// Every `stride`-th index in `[1, count * stride]`, so inputs spread over
/// many dyadic scales without a random source.
pub fn strided_indices(count: u64, stride: u64) -> Vec<u64> {
    (1..=count).map(|i| i * stride).collect()
}

/// The weight profile built from the default parameters.
pub fn default_profile() -> ShiftProfile {
    ShiftProfile::new(ShiftParameters::default()).expect("default parameters build a profile")
}
