//! Admissible summability matrices and weighted densities.
//!
//! A weight sequence `α` defines the matrix `m_{n,k} = α_k / φ(n)` with
//! `φ(n) = Σ_{k ≤ n} α_k`, and the lower/upper density of a set `E` as the
//! liminf/limsup of `r_n = Σ_{k ≤ n, k ∈ E} α_k / φ(n)`. All sums are kept in
//! the log domain (see [`logsum`]).

mod density;
mod family;
pub mod logsum;
mod regularity;
mod set;

pub(crate) use density::subsequence_from_elements;
pub use density::{
    a1_gap_check, cr_equivalence_check, density_compare, density_estimate, density_via_subsequence,
    direct_ratios_at, A1GapReport, CrEquivalence, DensityComparison, DensityEstimate,
    SubsequenceRatios, Verdict, ORDERING_TOL, REGULARITY_WARNING_ENTRY, SAMPLE_POINTS,
    STABILITY_TOL,
};
pub use family::{h_s, CustomFamily, IteratedLog, WeightFamily};
pub use regularity::{
    regularity_report, summatory_log, summatory_report, RegularityReport, SummatoryReport,
    ENTRY_BOUND_SLACK, ROW_SUM_TOL,
};
pub use set::{check_increasing, IntegerSet};
