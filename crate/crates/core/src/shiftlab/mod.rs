//! A weighted backward shift on `c_0` that is frequently hypercyclic but
//! whose return sets have zero lower `A(r)`-density for every `0 < r < 1`.
//!
//! The shift is described by `P(n) = log₂(w_0 ⋯ w_{n-1})`, the maximum of
//! trapezoids of two kinds: height `p` around every multiple of `b_p`, and
//! height `max(p(u), p(v))` on `I_u^ε - I_v^ε + [0, p(u)]` for `u > v`, where
//! `I_u^λ = [(1-λ)a^u, (1+λ)a^u]` and `p(u)` is the partition class of `u`.
//! The sets `E_p` are the multiples of `b_p` inside `I_u^ε`, `u ∈ A_p`.

mod decay;
mod orbit;
mod params;
mod profile;
mod verify;

pub use decay::{fp_decay_report, tail_bounds, FpDecayReport, FpDecayRow, TAIL_CUTOFF};
pub use orbit::{orbit_hit_set, preimage_of_e0};
pub use params::{
    audit_parameters, derive_parameters, format_rational, parse_decimal, union_density_proxy,
    ParamCheck, ParamFile, ParameterAudit, Partition, Rational, SearchBounds, ShiftParameters,
    AUDIT_U_MAX,
};
pub use profile::{ep_membership, ep_windows, window_of, Band, ShiftProfile};
pub use verify::{
    verify_characterization, Condition, ConditionFlags, HitReport, Violation, WindowStat,
};
