//! Executable weighted-density machinery for frequency questions in linear
//! dynamics.
//!
//! The crate is split in three layers:
//!
//! * [`weights`]: admissible (Riesz-type) summability matrices, their weight
//!   families, and finite-horizon lower/upper density estimators computed in
//!   the natural-log domain.
//! * [`dyadic`]: dyadic block decompositions, the frequency sequences
//!   `n_k(f)` built from step functions `f`, their exact closed forms and the
//!   separation / partition properties they satisfy.
//! * [`shiftlab`]: a weighted backward shift on `c_0` that is frequently
//!   hypercyclic but has vanishing `A_r`-density return sets, together with
//!   finite-horizon checkers for its characterization conditions.
//!
//! Everything is deterministic. Scans that are embarrassingly parallel use
//! rayon with ordered merges, so results are reproducible bit for bit.

pub mod dyadic;
mod error;
pub mod shiftlab;
pub mod weights;

pub use dyadic::{ConstructedSequence, DyadicProfile, StepFunction};
pub use error::{Error, Result};
pub use shiftlab::{HitReport, ShiftParameters, ShiftProfile};
pub use weights::{DensityEstimate, IntegerSet, WeightFamily};
