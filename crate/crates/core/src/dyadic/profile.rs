use serde::Serialize;

use crate::{Error, Result};

/// A maximal run of ones in a binary expansion: bits `start..start + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub start: u32,
    pub len: u32,
}

/// Run-length decomposition of the ones in `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DyadicProfile {
    pub k: u64,
    /// Number of trailing zeros; `k ∈ I(l, ν)` has `l - 1` of them.
    pub trailing_zeros: u32,
    /// Length `δ_k` of the lowest block.
    pub delta: u32,
    /// Blocks ordered by increasing start.
    pub blocks: Vec<Block>,
}

/// `δ_k`, the length of the lowest run of ones (`δ_0 = 0`).
#[inline]
pub fn delta(k: u64) -> u32 {
    if k == 0 {
        return 0;
    }
    (k >> k.trailing_zeros()).trailing_ones()
}

/// Blocks of `k` without allocating a profile.
pub fn blocks(k: u64) -> impl Iterator<Item = Block> {
    let mut rest = k;
    std::iter::from_fn(move || {
        if rest == 0 {
            return None;
        }
        let start = rest.trailing_zeros();
        let len = (rest >> start).trailing_ones();
        rest &= if start + len >= 64 {
            0
        } else {
            !0u64 << (start + len)
        };
        Some(Block { start, len })
    })
}

impl DyadicProfile {
    pub fn new(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("dyadic profile needs k >= 1".into()));
        }
        Ok(DyadicProfile {
            k,
            trailing_zeros: k.trailing_zeros(),
            delta: delta(k),
            blocks: blocks(k).collect(),
        })
    }

    /// `k ∈ I(l, ν)`: `l - 1` trailing zeros followed by exactly `ν` ones.
    pub fn in_class(&self, l: u32, nu: u32) -> bool {
        l >= 1 && self.trailing_zeros == l - 1 && self.delta == nu
    }

    /// Sum of the blocks, which is `k` again.
    pub fn reconstruct(&self) -> u64 {
        self.blocks
            .iter()
            .map(|b| ((1u128 << b.len) - 1) as u64 * (1u64 << b.start))
            .sum()
    }
}

pub fn dyadic_profile(k: u64) -> Result<DyadicProfile> {
    DyadicProfile::new(k)
}
