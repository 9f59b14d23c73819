use serde::Serialize;

use super::profile::{blocks, delta};
use super::step::StepFunction;
use crate::{Error, Result};

/// One term of `n_k(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SequenceTerm {
    pub k: u64,
    pub delta: u32,
    pub n: u128,
}

/// Streams `n_k(f)` via `n_k = n_{k-1} + f(δ_{k-1}) + f(δ_k)`, `n_1 = f(1) = 1`.
#[derive(Debug, Clone)]
pub struct ConstructedSequence {
    f: StepFunction,
    k: u64,
    prev_f_delta: u64,
    n: u128,
}

impl ConstructedSequence {
    pub fn new(f: StepFunction) -> Self {
        ConstructedSequence {
            f,
            k: 0,
            prev_f_delta: 0,
            n: 0,
        }
    }

    pub fn step_function(&self) -> &StepFunction {
        &self.f
    }
}

impl Iterator for ConstructedSequence {
    type Item = SequenceTerm;

    fn next(&mut self) -> Option<SequenceTerm> {
        self.k = self.k.checked_add(1)?;
        let d = delta(self.k);
        let fd = self.f.eval(d as u64);
        self.n += (self.prev_f_delta + fd) as u128;
        self.prev_f_delta = fd;
        Some(SequenceTerm {
            k: self.k,
            delta: d,
            n: self.n,
        })
    }
}

/// `n_1, …, n_K` by the recursion.
pub fn nk_recursive(f: &StepFunction, count: u64) -> Vec<u128> {
    ConstructedSequence::new(f.clone())
        .take(count as usize)
        .map(|t| t.n)
        .collect()
}

/// `n_k` for `f = identity`: `4k - 2 Σ_i L_i (q_i + 1) - δ_k` over blocks `(q_i, L_i)`.
pub fn nk_closed_identity(k: u64) -> Result<u128> {
    if k == 0 {
        return Err(Error::Domain("n_k needs k >= 1".into()));
    }
    let weighted: u128 = blocks(k)
        .map(|b| b.len as u128 * (b.start as u128 + 1))
        .sum();
    Ok(4 * k as u128 - 2 * weighted - delta(k) as u128)
}

/// Largest `t` accepted by [`nk_power`]; keeps `2^{t+1}` sums inside `u128`.
pub const MAX_POWER: u32 = 125;

/// `n_{2^t} = Σ_{a_i ≤ t} 2^{t+2-a_i} - 2m + 1` with `m = #{i : a_i ≤ t}`.
pub fn nk_power(f: &StepFunction, t: u32) -> Result<u128> {
    if t > MAX_POWER {
        return Err(Error::Domain(format!(
            "n_(2^t) needs t <= {MAX_POWER}, got {t}"
        )));
    }
    let mut sum = 0u128;
    let mut m = 0u128;
    for a in f.breakpoints_up_to(t as u64) {
        sum += 1u128 << (t as u64 + 2 - a);
        m += 1;
    }
    Ok(sum + 1 - 2 * m)
}

/// `n_k(f)` as a finite sum over the blocks `(q_i, L_i)` of `k`:
/// `Σ_i Σ_{j<L_i} n_{2^{q_i+j}} + 2 Σ_i Σ_{j≤L_i} f(j) - Σ_i L_i - f(L_1)`.
pub fn nk_closed_general(f: &StepFunction, k: u64) -> Result<u128> {
    if k == 0 {
        return Err(Error::Domain("n_k needs k >= 1".into()));
    }
    let mut total = 0u128;
    let mut lengths = 0u128;
    for b in blocks(k) {
        for j in 0..b.len {
            total += nk_power(f, b.start + j)?;
        }
        total += 2 * f.prefix_sum(b.len as u64);
        lengths += b.len as u128;
    }
    Ok(total - lengths - f.eval(delta(k) as u64) as u128)
}

/// `(m, t, p, s)` for one block `(q, L)` of `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BlockNotation {
    Regular {
        start: u32,
        len: u32,
        /// Largest `m` with `a_m ≤ q + L - 1`.
        m: u64,
        /// `q + L - 1 - a_m`.
        t: u64,
        /// `#{l < m : q ≤ a_l ≤ q + L - 1}`.
        p: u64,
        /// `L - 1 - t - (a_m - a_{m-p})`; negative when `t ≥ L`.
        s: i64,
    },
    /// The block lies entirely below `a_1` (only bit 0 set).
    Degenerate { start: u32, len: u32 },
}

pub fn notation_params(k: u64, f: &StepFunction) -> Result<Vec<BlockNotation>> {
    if k == 0 {
        return Err(Error::Domain("notation parameters need k >= 1".into()));
    }
    blocks(k)
        .map(|b| {
            let top = (b.start + b.len - 1) as u64;
            let m = f.eval(top);
            if m == 0 {
                return Ok(BlockNotation::Degenerate {
                    start: b.start,
                    len: b.len,
                });
            }
            let a = |i: u64| {
                f.a_exact(i)
                    .ok_or_else(|| Error::Domain(format!("a_{i} of {f} is not representable")))
            };
            let am = a(m)?;
            let below_start = if b.start == 0 {
                0
            } else {
                f.eval(b.start as u64 - 1)
            };
            let p = (m - 1) - below_start.min(m - 1);
            let s = b.len as i64 - 1 - (top - am) as i64 - (am - a(m - p)?) as i64;
            Ok(BlockNotation::Regular {
                start: b.start,
                len: b.len,
                m,
                t: top - am,
                p,
                s,
            })
        })
        .collect()
}
