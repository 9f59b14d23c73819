use num_rational::Ratio;
use serde::Serialize;

use super::params::{Rational, ShiftParameters};
use crate::{Error, Result};

/// Trapezoid of height `p` centred on the multiples of `b_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Band {
    pub p: u32,
    pub b: u64,
}

/// Plateau `[l1, r1]` of height `h` for one pair `(u, v)`; scaled by the
/// denominator of `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Plateau {
    v: u32,
    h: i128,
    l1: i128,
    r1: i128,
}

/// Support `I_u^{4ε} = [lo, hi]` (scaled) and the plateaus of all `(u, v)`, `v < u`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Window {
    u: u32,
    lo: i128,
    hi: i128,
    plateaus: Vec<Plateau>,
}

/// `P(n) = log₂(w_0 ⋯ w_{n-1})` of the weighted shift, as the maximum of
/// the band trapezoids and the `(u, v)` trapezoids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftProfile {
    params: ShiftParameters,
    scale: i128,
    bands: Vec<Band>,
    windows: Vec<Window>,
}

impl ShiftProfile {
    pub fn new(params: ShiftParameters) -> Result<Self> {
        params.check_range()?;
        let (c, d) = params.eps_parts();
        let limit = d * u64::MAX as i128;
        let mut bands = Vec::new();
        for p in 1.. {
            match params.b_u64(p) {
                Some(b) => bands.push(Band { p, b }),
                None => break,
            }
        }
        let mut windows = Vec::new();
        for u in 2u32.. {
            let Some(au) = params
                .a_pow(u)
                .filter(|au| au.checked_mul(d + 4 * c).is_some())
            else {
                break;
            };
            let lo = (d - 4 * c) * au;
            if lo > limit {
                break;
            }
            let hi = (d + 4 * c) * au;
            let pu = params.partition_of(u as u64) as i128;
            let plateaus = (1..u)
                .map(|v| {
                    let av = params.a_pow(v).expect("a^v < a^u fits");
                    let pv = params.partition_of(v as u64) as i128;
                    Plateau {
                        v,
                        h: pu.max(pv),
                        l1: (d - c) * au - (d + c) * av,
                        r1: (d + c) * au - (d - c) * av + d * pu,
                    }
                })
                .collect::<Vec<_>>();
            for pl in &plateaus {
                if !(lo < pl.l1 && pl.l1 <= pl.r1 && pl.r1 < hi) {
                    return Err(Error::InvalidParameters(format!(
                        "plateau of ({u}, {}) is not inside I_{u}^(4eps)",
                        pl.v
                    )));
                }
                if pl.h * d > pl.l1 - lo || pl.h * d > hi - pl.r1 {
                    return Err(Error::InvalidParameters(format!(
                        "ramp of ({u}, {}) is steeper than 1",
                        pl.v
                    )));
                }
            }
            if let Some(prev) = windows.last().map(|w: &Window| w.hi) {
                if lo <= prev {
                    return Err(Error::InvalidParameters(format!(
                        "I_{u}^(4eps) overlaps I_{}^(4eps)",
                        u - 1
                    )));
                }
            }
            windows.push(Window {
                u,
                lo,
                hi,
                plateaus,
            });
        }
        Ok(ShiftProfile {
            params,
            scale: d,
            bands,
            windows,
        })
    }

    pub fn params(&self) -> &ShiftParameters {
        &self.params
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Twice the band contribution at `n`.
    fn band_halves(&self, n: u64) -> i64 {
        let mut best = 0i64;
        for band in &self.bands {
            let reach = 4 * band.p as u64;
            if band.b > n.saturating_add(reach) {
                break;
            }
            let j = n / band.b;
            let below = if j >= 1 { n - j * band.b } else { u64::MAX };
            let above = (j + 1).checked_mul(band.b).map_or(u64::MAX, |c| c - n);
            let dist = below.min(above);
            let p = band.p as u64;
            let halves = if dist <= 2 * p {
                2 * p
            } else {
                (4 * p).saturating_sub(dist)
            };
            best = best.max(halves as i64);
        }
        best
    }

    /// `P(n)` exactly; `P(0) = 0`.
    pub fn log2_product(&self, n: u64) -> Rational {
        if n == 0 {
            return Ratio::from_integer(0);
        }
        let mut best = Ratio::new_raw(self.band_halves(n) as i128, 2);
        let x = self.scale * n as i128;
        for w in &self.windows {
            if w.lo > x {
                break;
            }
            if x > w.hi {
                continue;
            }
            for pl in &w.plateaus {
                let cand = if x < pl.l1 {
                    Ratio::new_raw(pl.h * (x - w.lo), pl.l1 - w.lo)
                } else if x > pl.r1 {
                    Ratio::new_raw(pl.h * (w.hi - x), w.hi - pl.r1)
                } else {
                    Ratio::new_raw(pl.h, 1)
                };
                if cand > best {
                    best = cand;
                }
            }
        }
        Ratio::new(*best.numer(), *best.denom())
    }

    /// `P(n)` rounded to `f64`.
    pub fn log2_product_f64(&self, n: u64) -> f64 {
        let r = self.log2_product(n);
        *r.numer() as f64 / *r.denom() as f64
    }

    /// `log₂ w_n = P(n+1) - P(n)`.
    pub fn log2_weight(&self, n: u64) -> Rational {
        self.log2_product(n + 1) - self.log2_product(n)
    }

    /// `w_n`.
    pub fn weight_at(&self, n: u64) -> f64 {
        let r = self.log2_weight(n);
        (*r.numer() as f64 / *r.denom() as f64).exp2()
    }

    /// `true` when no trapezoid covers `n`.
    pub fn outside_supports(&self, n: u64) -> bool {
        let x = self.scale * n as i128;
        let in_window = self.windows.iter().any(|w| w.lo <= x && x <= w.hi);
        let in_band = self.bands.iter().any(|b| {
            let j = n / b.b;
            let dist = if j >= 1 { n - j * b.b } else { u64::MAX }.min(b.b * (j + 1) - n);
            dist <= 4 * b.p as u64
        });
        !in_window && !in_band
    }
}

/// The `u` with `n ∈ I_u^{λε}`, if any.
pub fn window_of(params: &ShiftParameters, n: u64, lambda: i128) -> Option<u32> {
    let (c, d) = params.eps_parts();
    let x = d * n as i128;
    for u in 1u32.. {
        let au = params.a_pow(u)?;
        let lo = (d - lambda * c).checked_mul(au)?;
        if lo > x {
            return None;
        }
        if x <= (d + lambda * c).checked_mul(au)? {
            return Some(u);
        }
    }
    None
}

/// `n ∈ E_p`: `n ∈ I_u^ε` for some `u ∈ A_p`, and `b_p | n`.
pub fn ep_membership(params: &ShiftParameters, p: u32, n: u64) -> bool {
    let Some(b) = params.b_u64(p) else {
        return false;
    };
    n >= 1
        && n.is_multiple_of(b)
        && window_of(params, n, 1).is_some_and(|u| params.partition_of(u as u64) == p)
}

/// Members of `E_p` in `[1, horizon]`, grouped by window `u`.
pub fn ep_windows(params: &ShiftParameters, p: u32, horizon: u64) -> Vec<(u32, Vec<u64>)> {
    let Some(b) = params.b_u64(p) else {
        return Vec::new();
    };
    let (c, d) = params.eps_parts();
    let mut out = Vec::new();
    for u in 1u32.. {
        let Some(au) = params.a_pow(u) else { break };
        let lo = ((d - c) * au + d - 1) / d;
        if lo > horizon as i128 {
            break;
        }
        if params.partition_of(u as u64) != p {
            continue;
        }
        let hi = (((d + c) * au) / d).min(horizon as i128) as u64;
        let first = (lo as u64).div_ceil(b) * b;
        let members: Vec<u64> = (first..=hi).step_by(b as usize).collect();
        out.push((u, members));
    }
    out
}
