//! Streaming log-domain accumulation.
//!
//! Weights such as `e^{k/log^2 k}` overflow `f64` long before the horizons
//! we care about, so every partial sum is kept as `offset + ln(sum)` where
//! `sum` holds `exp(lw - offset)` terms. The offset only moves when a new
//! term would exceed it by more than [`RESCALE_GAP`] nats, which keeps the
//! number of (inexact) rescalings small.

/// Headroom before the shared offset is moved. `e^512` times any realistic
/// term count stays far below `f64::MAX`.
const RESCALE_GAP: f64 = 512.0;

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.comp *= factor;
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Running `ln Σ exp(lw_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExp {
    offset: f64,
    acc: CompensatedSum,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp {
            offset: f64::NEG_INFINITY,
            acc: CompensatedSum::default(),
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, lw: f64) {
        if lw == f64::NEG_INFINITY {
            return;
        }
        if self.offset == f64::NEG_INFINITY {
            self.offset = lw;
        } else if lw > self.offset + RESCALE_GAP {
            self.acc.scale((self.offset - lw).exp());
            self.offset = lw;
        }
        self.acc.add((lw - self.offset).exp());
    }

    /// `ln` of the accumulated sum; `-inf` when nothing (or only zeros) was pushed.
    pub fn ln(&self) -> f64 {
        if self.offset == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.offset + self.acc.value().ln()
    }
}

/// Three sums sharing one offset: all weights, weights of members, weights of
/// non-members. Ratios are then plain quotients of the scaled sums and never
/// leave the representable range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioAccumulator {
    offset: f64,
    total: CompensatedSum,
    hit: CompensatedSum,
    miss: CompensatedSum,
}

impl Default for RatioAccumulator {
    fn default() -> Self {
        RatioAccumulator {
            offset: f64::NEG_INFINITY,
            total: CompensatedSum::default(),
            hit: CompensatedSum::default(),
            miss: CompensatedSum::default(),
        }
    }
}

impl RatioAccumulator {
    pub fn push(&mut self, lw: f64, member: bool) {
        if lw == f64::NEG_INFINITY {
            return;
        }
        if self.offset == f64::NEG_INFINITY {
            self.offset = lw;
        } else if lw > self.offset + RESCALE_GAP {
            let factor = (self.offset - lw).exp();
            self.total.scale(factor);
            self.hit.scale(factor);
            self.miss.scale(factor);
            self.offset = lw;
        }
        let term = (lw - self.offset).exp();
        self.total.add(term);
        if member {
            self.hit.add(term);
        } else {
            self.miss.add(term);
        }
    }

    fn quotient(part: &CompensatedSum, total: &CompensatedSum) -> f64 {
        let t = total.value();
        if t <= 0.0 {
            return 0.0;
        }
        (part.value() / t).clamp(0.0, 1.0)
    }

    /// `Σ_{k≤n, k∈E} α_k / φ(n)`.
    pub fn hit_ratio(&self) -> f64 {
        Self::quotient(&self.hit, &self.total)
    }

    /// `Σ_{k≤n, k∉E} α_k / φ(n)`.
    pub fn miss_ratio(&self) -> f64 {
        Self::quotient(&self.miss, &self.total)
    }

    /// `ln φ(n)`.
    pub fn ln_total(&self) -> f64 {
        if self.offset == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.offset + self.total.value().ln()
    }

    /// Matrix entry `α_k / φ(n)` for a weight with log `lw`, at the current row.
    pub fn entry(&self, lw: f64) -> f64 {
        let t = self.total.value();
        if t <= 0.0 || lw == f64::NEG_INFINITY {
            return 0.0;
        }
        (lw - self.offset).exp() / t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum_in_range() {
        let mut lse = LogSumExp::default();
        let mut direct = 0.0f64;
        for k in 1..=200u64 {
            let lw = (k as f64).sqrt();
            lse.push(lw);
            direct += lw.exp();
        }
        assert!((lse.ln() - direct.ln()).abs() < 1e-13);
    }

    #[test]
    fn survives_overflowing_terms() {
        // ln Σ_{k≤n} e^k = n + ln((1 - e^{-n}) / (1 - e^{-1}))
        let n = 5000u64;
        let mut lse = LogSumExp::default();
        for k in 1..=n {
            lse.push(k as f64);
        }
        let expected = n as f64 - (1.0 - (-1.0f64).exp()).ln();
        assert!((lse.ln() - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn empty_and_zero_weights() {
        let mut lse = LogSumExp::default();
        assert_eq!(lse.ln(), f64::NEG_INFINITY);
        lse.push(f64::NEG_INFINITY);
        assert_eq!(lse.ln(), f64::NEG_INFINITY);
        let acc = RatioAccumulator::default();
        assert_eq!(acc.hit_ratio(), 0.0);
    }

    #[test]
    fn all_members_gives_exact_one() {
        let mut acc = RatioAccumulator::default();
        for k in 1..=10_000u64 {
            acc.push((k as f64) / (k as f64).ln().max(1.0).powi(2), true);
            assert_eq!(acc.hit_ratio(), 1.0);
        }
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let s: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
