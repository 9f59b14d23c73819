use serde::Serialize;

use super::family::WeightFamily;
use super::logsum::RatioAccumulator;
use super::regularity::geometric_points;
use super::set::{check_increasing, IntegerSet};
use crate::{Error, Result};

/// Geometric sample points stored per estimate.
pub const SAMPLE_POINTS: usize = 256;
/// Slack allowed when comparing proxies of two families.
pub const ORDERING_TOL: f64 = 0.02;
/// Tail oscillation above which a comparison is reported as inconclusive.
pub const STABILITY_TOL: f64 = 0.005;
/// `α_n / φ(n)` above this at the last index flags the subsequence formula.
pub const REGULARITY_WARNING_ENTRY: f64 = 0.1;

/// Walks `n = 1..=horizon`, pushing `α_n` into an accumulator and calling
/// `visit(n, member, acc)` after each step.
pub(crate) fn scan<F>(
    members: &[u64],
    family: &WeightFamily,
    horizon: u64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(u64, bool, &RatioAccumulator),
{
    let mut acc = RatioAccumulator::default();
    let mut next = members.iter().copied().peekable();
    for n in 1..=horizon {
        let lw = family.checked_log_weight(n)?;
        let member = next.peek() == Some(&n);
        if member {
            next.next();
        }
        acc.push(lw, member);
        visit(n, member, &acc);
    }
    Ok(())
}

/// Finite-horizon lower/upper density statistics of a set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub family: String,
    pub horizon: u64,
    /// `(n, r_n)` at geometric points of the tail window `[N/2, N]`.
    pub ratios: Vec<(u64, f64)>,
    /// `min r_n` over every `n` in `[N/2, N]`.
    pub liminf_proxy: f64,
    /// `max r_n` over every `n` in `[N/2, N]`.
    pub limsup_proxy: f64,
    /// `1 - min` of the complement's ratio over the same window.
    pub limsup_via_complement: f64,
    /// `(min, max)` over the previous window `[N/4, N/2)`.
    pub previous_window: (f64, f64),
}

impl DensityEstimate {
    /// Largest drift of either proxy between the previous and the tail window.
    pub fn tail_oscillation(&self) -> f64 {
        (self.liminf_proxy - self.previous_window.0)
            .abs()
            .max((self.limsup_proxy - self.previous_window.1).abs())
    }
}

fn window_start(horizon: u64) -> u64 {
    horizon.div_ceil(2).max(1)
}

fn estimate_from_members(
    members: &[u64],
    family: &WeightFamily,
    horizon: u64,
) -> Result<DensityEstimate> {
    let lo = window_start(horizon);
    let prev_lo = (horizon / 4).max(1);
    let samples = geometric_points(lo, horizon, SAMPLE_POINTS);
    let mut next_sample = samples.iter().peekable();
    let mut ratios = Vec::with_capacity(samples.len());
    let (mut min, mut max, mut min_miss) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
    scan(members, family, horizon, |n, _, acc| {
        if n < prev_lo {
            return;
        }
        let r = acc.hit_ratio();
        if n < lo {
            pmin = pmin.min(r);
            pmax = pmax.max(r);
            return;
        }
        min = min.min(r);
        max = max.max(r);
        min_miss = min_miss.min(acc.miss_ratio());
        if next_sample.peek() == Some(&&n) {
            next_sample.next();
            ratios.push((n, r));
        }
    })?;
    if pmin > pmax {
        (pmin, pmax) = (min, max);
    }
    Ok(DensityEstimate {
        family: family.name(),
        horizon,
        ratios,
        liminf_proxy: min,
        limsup_proxy: max,
        limsup_via_complement: 1.0 - min_miss,
        previous_window: (pmin, pmax),
    })
}

pub fn density_estimate(
    set: &IntegerSet,
    family: &WeightFamily,
    horizon: u64,
) -> Result<DensityEstimate> {
    if horizon < 4 {
        return Err(Error::Domain(format!(
            "density estimate needs horizon >= 4, got {horizon}"
        )));
    }
    family.validate()?;
    let members = set.elements_up_to(horizon)?;
    estimate_from_members(&members, family, horizon)
}

/// `r_n` at each requested point (any order; points must be >= 1).
pub fn direct_ratios_at(
    set: &IntegerSet,
    family: &WeightFamily,
    points: &[u64],
) -> Result<Vec<f64>> {
    let Some(&horizon) = points.iter().max() else {
        return Ok(Vec::new());
    };
    if points.contains(&0) {
        return Err(Error::Domain("ratios are defined for n >= 1".into()));
    }
    family.validate()?;
    let members = set.elements_up_to(horizon)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i]);
    let mut out = vec![0.0; points.len()];
    let mut cursor = 0;
    scan(&members, family, horizon, |n, _, acc| {
        while cursor < order.len() && points[order[cursor]] == n {
            out[order[cursor]] = acc.hit_ratio();
            cursor += 1;
        }
    })?;
    Ok(out)
}

/// `ρ_k = Σ_{j ≤ k} α_{n_j} / φ(n_k)` for `k = 1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsequenceRatios {
    pub family: String,
    pub elements: Vec<u64>,
    pub ratios: Vec<f64>,
    /// `α_{n_K} / φ(n_K)`.
    pub last_entry: f64,
    /// Set when `last_entry` exceeds [`REGULARITY_WARNING_ENTRY`]: the
    /// subsequence form then need not describe the lower density.
    pub regularity_warning: bool,
}

impl SubsequenceRatios {
    /// `min ρ_k` over `k ∈ [from, to]` (1-based, inclusive).
    pub fn min_over(&self, from: usize, to: usize) -> Option<f64> {
        let to = to.min(self.ratios.len());
        if from == 0 || from > to {
            return None;
        }
        self.ratios[from - 1..to].iter().copied().reduce(f64::min)
    }
}

pub fn density_via_subsequence(
    seq: &IntegerSet,
    family: &WeightFamily,
    count: usize,
) -> Result<SubsequenceRatios> {
    if count == 0 {
        return Err(Error::Domain("subsequence ratios need K >= 1".into()));
    }
    family.validate()?;
    let elements = seq.first(count, u64::MAX)?;
    subsequence_from_elements(elements, family)
}

pub(crate) fn subsequence_from_elements(
    elements: Vec<u64>,
    family: &WeightFamily,
) -> Result<SubsequenceRatios> {
    check_increasing(&elements)?;
    let horizon = *elements
        .last()
        .ok_or_else(|| Error::Domain("empty subsequence".into()))?;
    let mut ratios = Vec::with_capacity(elements.len());
    let mut last_entry = 0.0;
    scan(&elements, family, horizon, |n, member, acc| {
        if member {
            ratios.push(acc.hit_ratio());
        }
        if n == horizon {
            last_entry = acc.entry(family.log_weight(n));
        }
    })?;
    if last_entry > REGULARITY_WARNING_ENTRY {
        log::warn!(
            "{}: alpha_n/phi(n) = {last_entry:.3} at n = {horizon}; subsequence ratios may not reflect the lower density",
            family.name()
        );
    }
    Ok(SubsequenceRatios {
        family: family.name(),
        elements,
        ratios,
        last_entry,
        regularity_warning: last_entry > REGULARITY_WARNING_ENTRY,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityComparison {
    /// Estimate under the family with the smaller weights (`α`).
    pub a: DensityEstimate,
    /// Estimate under the family with the larger weights (`β`).
    pub b: DensityEstimate,
    pub verdict: Verdict,
}

/// Compares densities under `α` (`family_a`) and `β` (`family_b`) where
/// `α_k / β_k` decreases to 0: the `β`-density interval must sit outside the
/// `α`-density interval.
pub fn density_compare(
    set: &IntegerSet,
    family_a: &WeightFamily,
    family_b: &WeightFamily,
    horizon: u64,
) -> Result<DensityComparison> {
    if horizon < 4 {
        return Err(Error::Domain(format!(
            "density comparison needs horizon >= 4, got {horizon}"
        )));
    }
    family_a.validate()?;
    family_b.validate()?;
    let lo = window_start(horizon);
    let log_ratio =
        |k| Ok::<_, Error>(family_a.checked_log_weight(k)? - family_b.checked_log_weight(k)?);
    let mut prev = log_ratio(lo)?;
    let first = prev;
    for k in lo + 1..=horizon {
        let cur = log_ratio(k)?;
        if cur > prev + 1e-12 * prev.abs().max(1.0) {
            return Err(Error::precondition_at(
                format!(
                    "alpha/beta increases at k = {k} ({} vs {})",
                    family_a, family_b
                ),
                k,
            ));
        }
        prev = cur;
    }
    if prev >= first {
        return Err(Error::precondition_at(
            format!(
                "alpha/beta is not decreasing over [{lo}, {horizon}] ({} vs {})",
                family_a, family_b
            ),
            horizon,
        ));
    }
    let members = set.elements_up_to(horizon)?;
    let a = estimate_from_members(&members, family_a, horizon)?;
    let b = estimate_from_members(&members, family_b, horizon)?;
    let ordered = b.liminf_proxy <= a.liminf_proxy + ORDERING_TOL
        && a.limsup_proxy <= b.limsup_proxy + ORDERING_TOL;
    let verdict = if ordered {
        Verdict::Holds
    } else if a.tail_oscillation().max(b.tail_oscillation()) > STABILITY_TOL {
        Verdict::Inconclusive
    } else {
        Verdict::Violated
    };
    Ok(DensityComparison { a, b, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrEquivalence {
    pub natural_positive: bool,
    pub cr_positive: bool,
    pub agree: bool,
    /// `max n_k / k` over the last half of the materialized prefix.
    pub tail_growth: f64,
    pub cr_liminf_proxy: f64,
}

/// Bound on `n_k / k` treated as "bounded".
const GROWTH_CAP: f64 = 1000.0;
/// `C(r)` liminf proxy above this counts as positive.
const POSITIVE_PROXY: f64 = 0.01;

/// Positive natural lower density versus positive `C(r)` lower density.
pub fn cr_equivalence_check(set: &IntegerSet, r: f64, horizon: u64) -> Result<CrEquivalence> {
    if horizon < 100 {
        return Err(Error::Domain(format!(
            "C(r) equivalence needs horizon >= 100, got {horizon}"
        )));
    }
    let family = WeightFamily::polynomial(r)?;
    if r == -1.0 {
        return Err(Error::Domain("C(r) equivalence needs r > -1".into()));
    }
    let members = set.elements_up_to(horizon)?;
    let growth = |lo: usize, hi: usize| {
        members[lo..hi]
            .iter()
            .enumerate()
            .map(|(i, &n)| n as f64 / (lo + i + 1) as f64)
            .fold(0.0f64, f64::max)
    };
    let len = members.len();
    let (tail, previous) = if len >= 4 {
        (growth(len / 2, len), growth(len / 4, len / 2))
    } else {
        (f64::INFINITY, 0.0)
    };
    let natural_positive = tail <= GROWTH_CAP.min(1.5 * previous);
    let est = estimate_from_members(&members, &family, horizon)?;
    let cr_positive = est.liminf_proxy > POSITIVE_PROXY;
    Ok(CrEquivalence {
        natural_positive,
        cr_positive,
        agree: natural_positive == cr_positive,
        tail_growth: tail,
        cr_liminf_proxy: est.liminf_proxy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A1GapReport {
    pub horizon: u64,
    /// Largest gap `n_{k+1} - n_k` (or `n_1`) below the horizon.
    pub max_gap: u64,
    /// Largest gap ending inside `[N/2, N]`.
    pub window_max_gap: u64,
    /// `min` of the `A(1)` ratio at gap right-endpoints in `[N/2, N]` and at `N`.
    pub a1_liminf_proxy: f64,
    /// `proxy >= 0.01` implies `window_max_gap <= ln 100 + 1`.
    pub bound_holds: bool,
}

pub fn a1_gap_check(set: &IntegerSet, horizon: u64) -> Result<A1GapReport> {
    if horizon < 10 {
        return Err(Error::Domain(format!(
            "A(1) gap check needs horizon >= 10, got {horizon}"
        )));
    }
    let members = set.elements_up_to(horizon)?;
    let lo = window_start(horizon);
    let mut max_gap = 0u64;
    let mut window_max_gap = 0u64;
    let mut prev = 0u64;
    for &n in &members {
        let gap = n - prev;
        max_gap = max_gap.max(gap);
        if n >= lo {
            window_max_gap = window_max_gap.max(gap);
        }
        prev = n;
    }
    let family = WeightFamily::A(1.0);
    let mut proxy = f64::INFINITY;
    let mut idx = 0usize;
    scan(&members, &family, horizon, |n, member, acc| {
        if member {
            idx += 1;
        }
        if n < lo {
            return;
        }
        let next_is_member = members.get(idx) == Some(&(n + 1));
        if n == horizon || (!member && next_is_member) {
            proxy = proxy.min(acc.hit_ratio());
        }
    })?;
    let bound_holds = proxy < POSITIVE_PROXY || (window_max_gap as f64) <= 100f64.ln() + 1.0;
    Ok(A1GapReport {
        horizon,
        max_gap,
        window_max_gap,
        a1_liminf_proxy: proxy,
        bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naturals_have_density_one() {
        let e = density_estimate(&IntegerSet::naturals(), &WeightFamily::B(2.0), 10_000).unwrap();
        assert_eq!(e.liminf_proxy, 1.0);
        assert_eq!(e.limsup_proxy, 1.0);
        assert!(e.ratios.iter().all(|&(_, r)| r == 1.0));
    }

    #[test]
    fn empty_set_is_zero() {
        let e = density_estimate(&IntegerSet::Sorted(vec![]), &WeightFamily::Cesaro, 100).unwrap();
        assert_eq!(e.limsup_proxy, 0.0);
        assert_eq!(e.limsup_via_complement, 0.0);
    }

    #[test]
    fn evens_under_cesaro() {
        let e = density_estimate(
            &IntegerSet::multiples(2).unwrap(),
            &WeightFamily::Cesaro,
            100_000,
        )
        .unwrap();
        // floor(n/2)/n has min 0.5 - 1/(2n) at odd n
        assert!((e.liminf_proxy - (0.5 - 1.0 / 100_000.0)).abs() < 1e-9);
        assert_eq!(e.limsup_proxy, 0.5);
        assert!((e.limsup_proxy - e.limsup_via_complement).abs() < 1e-12);
    }

    #[test]
    fn direct_ratios_any_order() {
        let s = IntegerSet::multiples(3).unwrap();
        let r = direct_ratios_at(&s, &WeightFamily::Cesaro, &[9, 3, 4]).unwrap();
        assert_eq!(r, vec![3.0 / 9.0, 1.0 / 3.0, 0.25]);
    }

    #[test]
    fn subsequence_matches_direct_form() {
        let s = IntegerSet::sequence(|k| k * k + k);
        let fam = WeightFamily::C(1.0);
        let sub = density_via_subsequence(&s, &fam, 50).unwrap();
        let points: Vec<u64> = sub.elements.clone();
        let direct = direct_ratios_at(&s, &fam, &points).unwrap();
        for (a, b) in sub.ratios.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
        assert!(!sub.regularity_warning);
        let evens = density_via_subsequence(
            &IntegerSet::multiples(2).unwrap(),
            &WeightFamily::Cesaro,
            1000,
        )
        .unwrap();
        assert_eq!(*evens.ratios.last().unwrap(), 0.5);
    }

    #[test]
    fn geometric_family_warns() {
        let sub =
            density_via_subsequence(&IntegerSet::naturals(), &WeightFamily::A(1.0), 100).unwrap();
        assert!(sub.regularity_warning);
    }

    #[test]
    fn compare_requires_decreasing_ratio() {
        let err = density_compare(
            &IntegerSet::naturals(),
            &WeightFamily::C(1.0),
            &WeightFamily::Cesaro,
            100,
        );
        assert!(matches!(
            err,
            Err(Error::Precondition {
                index: Some(51),
                ..
            })
        ));
        let ok = density_compare(
            &IntegerSet::naturals(),
            &WeightFamily::Cesaro,
            &WeightFamily::C(1.0),
            10_000,
        )
        .unwrap();
        assert_eq!(ok.verdict, Verdict::Holds);
    }

    #[test]
    fn three_n_gap_oracle() {
        let rep = a1_gap_check(&IntegerSet::multiples(3).unwrap(), 10_000).unwrap();
        let e = std::f64::consts::E;
        let oracle = e.powi(-2) * (1.0 - 1.0 / e) / (1.0 - e.powi(-3));
        assert_eq!(rep.max_gap, 3);
        assert!((rep.a1_liminf_proxy - oracle).abs() < 1e-9);
        assert!(rep.bound_holds);
    }

    #[test]
    fn cr_check_basic() {
        let v = cr_equivalence_check(&IntegerSet::naturals(), 0.0, 1000).unwrap();
        assert!(v.natural_positive && v.cr_positive && v.agree);
        assert!(cr_equivalence_check(&IntegerSet::naturals(), 0.0, 50).is_err());
    }
}
