//! Dyadic block combinatorics and the frequency sequences `n_k(f)`.
//!
//! For a step function `f` the sequence is `n_1 = 1`,
//! `n_k = n_{k-1} + f(δ_{k-1}) + f(δ_k)`, where `δ_k` is the length of the
//! lowest run of ones in the binary expansion of `k`. Besides the recursion
//! this module evaluates `n_k` in closed form (random access, exact) and
//! checks the separation and partition properties the sequences are built
//! for.

mod checks;
mod profile;
mod sequence;
mod step;

pub use checks::{
    lambda_identity_residual, lambda_index, limit_ratio_report, partition_indices, partition_set,
    sandwich_bounds, sandwich_check, separation_check, separation_check_exhaustive,
    verify_closed_form, ClosedFormRoute, ClosedFormScan, LambdaRatio, LimitRatioReport, Mismatch,
    SandwichRow, SeparationReport, SeparationWitness,
};
pub use profile::{blocks, delta, dyadic_profile, Block, DyadicProfile};
pub use sequence::{
    nk_closed_general, nk_closed_identity, nk_power, nk_recursive, notation_params, BlockNotation,
    ConstructedSequence, SequenceTerm, MAX_POWER,
};
pub use step::{ATerm, StepFunction};
