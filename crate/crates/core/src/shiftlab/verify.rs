use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use super::params::ShiftParameters;
use super::profile::{ep_windows, ShiftProfile};
use crate::{Error, Result};

/// Witnesses kept per condition; the total is still counted.
const MAX_WITNESSES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Condition {
    /// Positive lower density of each `E_p`.
    #[serde(rename = "a")]
    A,
    /// `(E_p + [0,p]) ∩ (E_q + [0,q]) = ∅` for `p ≠ q`.
    #[serde(rename = "b")]
    B,
    /// `P → ∞` along `E_p + [0,p]`.
    #[serde(rename = "c")]
    C,
    /// `P(m - n + t) ≥ log₂(M(p) M(q))`.
    #[serde(rename = "d")]
    D,
    /// `|n - m| > max(p, q)` for distinct members.
    #[serde(rename = "gap")]
    GapLemma,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::A => "a",
            Condition::B => "b",
            Condition::C => "c",
            Condition::D => "d",
            Condition::GapLemma => "gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub p: u32,
    pub q: Option<u32>,
    pub n: u64,
    pub m: Option<u64>,
    pub t: Option<u64>,
}

impl Violation {
    /// `(p, q, n, m, t)` with `-` for absent entries.
    pub fn witness(&self) -> String {
        let opt = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        format!(
            "({}, {}, {}, {}, {})",
            self.p,
            opt(self.q.map(u64::from)),
            self.n,
            opt(self.m),
            opt(self.t)
        )
    }
}

/// Statistics of `E_p` on one window `I_u^ε ∩ [1, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowStat {
    pub p: u32,
    pub u: u32,
    pub members: u64,
    /// `#(E_p ∩ [1, end]) / end` at the window's clipped right end.
    pub density_proxy: f64,
    /// `min P` over `(E_p ∩ window) + [0, p]`.
    pub min_log2_product: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionFlags {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    pub gap_lemma: bool,
}

impl ConditionFlags {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c && self.d && self.gap_lemma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitReport {
    pub horizon: u64,
    pub pmax: u32,
    /// Triples `(n, m, t)` tested for condition (d).
    pub pairs_checked: u64,
    pub windows: Vec<WindowStat>,
    pub flags: ConditionFlags,
    pub violation_count: u64,
    /// Up to 64 witnesses per condition, ordered by condition then position.
    pub violations: Vec<Violation>,
}

struct Members {
    p: u32,
    windows: Vec<(u32, Vec<u64>)>,
}

impl Members {
    fn all(&self) -> impl Iterator<Item = u64> + '_ {
        self.windows.iter().flat_map(|(_, v)| v.iter().copied())
    }
}

#[derive(Default)]
struct Witnesses {
    list: Vec<Violation>,
    count: u64,
}

impl Witnesses {
    fn add(&mut self, v: Violation) {
        self.count += 1;
        if self
            .list
            .iter()
            .filter(|w| w.condition == v.condition)
            .count()
            < MAX_WITNESSES
        {
            self.list.push(v);
        }
    }

    fn any(&self, c: Condition) -> bool {
        self.list.iter().any(|v| v.condition == c)
    }
}

/// Checks the characterization conditions of the shift on `[1, horizon]`
/// for `E_1, …, E_pmax`.
pub fn verify_characterization(
    profile: &ShiftProfile,
    horizon: u64,
    pmax: u32,
) -> Result<HitReport> {
    let params = profile.params();
    let cube = (params.a as u128).pow(3);
    if (horizon as u128) < cube {
        return Err(Error::precondition(format!(
            "horizon {horizon} is below a^3 = {cube}"
        )));
    }
    if pmax == 0 || pmax >= 64 {
        return Err(Error::Domain(format!(
            "pmax must lie in [1, 63], got {pmax}"
        )));
    }
    let sets: Vec<Members> = (1..=pmax)
        .map(|p| Members {
            p,
            windows: ep_windows(params, p, horizon),
        })
        .collect();
    if let Some(empty) = sets.iter().find(|s| s.all().next().is_none()) {
        return Err(Error::precondition_at(
            format!("E_{} has no members up to {horizon}", empty.p),
            empty.p as u64,
        ));
    }

    let mut found = Witnesses::default();
    let windows = check_windows(profile, &sets, horizon, &mut found);
    check_gap_lemma(&sets, &mut found);
    check_disjoint(&sets, &mut found);
    let pairs_checked = check_products(profile, &sets, horizon, &mut found);

    found
        .list
        .sort_by_key(|v| (v.condition, v.n, v.m, v.t, v.p));
    let flags = ConditionFlags {
        a: !found.any(Condition::A),
        b: !found.any(Condition::B),
        c: !found.any(Condition::C),
        d: !found.any(Condition::D),
        gap_lemma: !found.any(Condition::GapLemma),
    };
    Ok(HitReport {
        horizon,
        pmax,
        pairs_checked,
        windows,
        flags,
        violation_count: found.count,
        violations: found.list,
    })
}

fn check_windows(
    profile: &ShiftProfile,
    sets: &[Members],
    horizon: u64,
    found: &mut Witnesses,
) -> Vec<WindowStat> {
    let params = profile.params();
    let (c, d) = params.eps_parts();
    let mut stats = Vec::new();
    for set in sets {
        let p = set.p;
        let b = params.b_u64(p).expect("E_p is non-empty, so b_p fits");
        let mut cumulative = 0u64;
        let mut last_min: Option<Ratio<i128>> = None;
        let mut last_n = 0u64;
        for (u, members) in &set.windows {
            let au = params.a_pow(*u).expect("window below horizon");
            let lo = (((d - c) * au + d - 1) / d) as u64;
            let hi_full = ((d + c) * au / d) as u64;
            let end = hi_full.min(horizon);
            cumulative += members.len() as u64;
            // a complete window at least b_p wide must contain a multiple of b_p
            if members.is_empty() && hi_full <= horizon && hi_full - lo + 1 >= b {
                found.add(Violation {
                    condition: Condition::A,
                    p,
                    q: None,
                    n: lo,
                    m: Some(hi_full),
                    t: None,
                });
            }
            let mut min: Option<Ratio<i128>> = None;
            for &n in members {
                for t in 0..=p as u64 {
                    let k = n + t;
                    if k > horizon {
                        break;
                    }
                    let v = profile.log2_product(k);
                    if v < Ratio::from_integer(p as i128) {
                        found.add(Violation {
                            condition: Condition::C,
                            p,
                            q: None,
                            n,
                            m: None,
                            t: Some(t),
                        });
                    }
                    min = Some(min.map_or(v, |m| m.min(v)));
                }
            }
            if let (Some(prev), Some(cur)) = (last_min, min) {
                if cur < prev {
                    found.add(Violation {
                        condition: Condition::C,
                        p,
                        q: None,
                        n: members[0],
                        m: Some(last_n),
                        t: None,
                    });
                }
            }
            if min.is_some() {
                last_min = min;
                last_n = members[0];
            }
            stats.push(WindowStat {
                p,
                u: *u,
                members: members.len() as u64,
                density_proxy: cumulative as f64 / end as f64,
                min_log2_product: min.map(|r| *r.numer() as f64 / *r.denom() as f64),
            });
        }
        if cumulative == 0 {
            found.add(Violation {
                condition: Condition::A,
                p,
                q: None,
                n: horizon,
                m: None,
                t: None,
            });
        }
    }
    stats
}

fn merged(sets: &[Members]) -> Vec<(u64, u32)> {
    let mut all: Vec<(u64, u32)> = sets
        .iter()
        .flat_map(|s| s.all().map(move |n| (n, s.p)))
        .collect();
    all.sort_unstable();
    all
}

/// Adjacent members suffice: for `n < m < k`,
/// `k - n > max(p_m, p_k) + max(p_n, p_m) ≥ max(p_n, p_k)`.
fn check_gap_lemma(sets: &[Members], found: &mut Witnesses) {
    for w in merged(sets).windows(2) {
        let ((n, p), (m, q)) = (w[0], w[1]);
        if m - n <= p.max(q) as u64 {
            found.add(Violation {
                condition: Condition::GapLemma,
                p,
                q: Some(q),
                n,
                m: Some(m),
                t: None,
            });
        }
    }
}

fn check_disjoint(sets: &[Members], found: &mut Witnesses) {
    // (end, p, start) of the interval reaching furthest so far
    let mut reach: Option<(u64, u32, u64)> = None;
    for (n, p) in merged(sets) {
        if let Some((end, q, start)) = reach {
            if n <= end && p != q {
                found.add(Violation {
                    condition: Condition::B,
                    p: q,
                    q: Some(p),
                    n: start,
                    m: Some(n),
                    t: None,
                });
            }
        }
        let end = n + p as u64;
        if reach.is_none_or(|(e, _, _)| end > e) {
            reach = Some((end, p, n));
        }
    }
}

/// Bitsets `P(x) ≥ log₂ K` over `x ∈ [0, len)`, one per threshold `K`.
fn threshold_bitsets(profile: &ShiftProfile, thresholds: &[u64], len: u64) -> Vec<Vec<u64>> {
    let words = len.div_ceil(64) as usize;
    let per_word: Vec<Vec<u64>> = (0..words)
        .into_par_iter()
        .map(|w| {
            let mut bits = vec![0u64; thresholds.len()];
            for i in 0..64u64 {
                let x = w as u64 * 64 + i;
                if x >= len {
                    break;
                }
                let v = profile.log2_product(x);
                let vf = *v.numer() as f64 / *v.denom() as f64;
                for (slot, &k) in thresholds.iter().enumerate() {
                    let ok = if k.is_power_of_two() {
                        v >= Ratio::from_integer(k.ilog2() as i128)
                    } else {
                        vf >= (k as f64).log2()
                    };
                    if ok {
                        bits[slot] |= 1 << i;
                    }
                }
            }
            bits
        })
        .collect();
    (0..thresholds.len())
        .map(|slot| per_word.iter().map(|b| b[slot]).collect())
        .collect()
}

fn check_products(
    profile: &ShiftProfile,
    sets: &[Members],
    horizon: u64,
    found: &mut Witnesses,
) -> u64 {
    let pmax = sets.len() as u32;
    let mut thresholds: Vec<u64> = (1..=pmax)
        .flat_map(|p| {
            (1..=pmax).map(move |q| ShiftParameters::m_bound(p) * ShiftParameters::m_bound(q))
        })
        .collect();
    thresholds.sort_unstable();
    thresholds.dedup();
    let bits = threshold_bitsets(profile, &thresholds, horizon + pmax as u64 + 1);
    let slot = |p: u32, q: u32| {
        let k = ShiftParameters::m_bound(p) * ShiftParameters::m_bound(q);
        thresholds.binary_search(&k).expect("threshold listed")
    };
    let lists: Vec<(u32, Vec<u64>)> = sets.iter().map(|s| (s.p, s.all().collect())).collect();
    let starts: Vec<(u32, u64)> = lists
        .iter()
        .flat_map(|(p, v)| v.iter().map(move |&n| (*p, n)))
        .collect();
    let results: Vec<(u64, Vec<Violation>)> = starts
        .par_iter()
        .map(|&(p, n)| {
            let mut checked = 0u64;
            let mut bad = Vec::new();
            for (q, ms) in &lists {
                let set = &bits[slot(p, *q)];
                let from = ms.partition_point(|&m| m <= n);
                for &m in &ms[from..] {
                    for t in 0..=*q as u64 {
                        let x = m - n + t;
                        checked += 1;
                        if set[(x / 64) as usize] >> (x % 64) & 1 == 0 && bad.len() < MAX_WITNESSES
                        {
                            bad.push(Violation {
                                condition: Condition::D,
                                p,
                                q: Some(*q),
                                n,
                                m: Some(m),
                                t: Some(t),
                            });
                        }
                    }
                }
            }
            (checked, bad)
        })
        .collect();
    let mut total = 0;
    for (checked, bad) in results {
        total += checked;
        for v in bad {
            found.add(v);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass_at_small_horizon() {
        let profile = ShiftProfile::new(ShiftParameters::default()).unwrap();
        let rep = verify_characterization(&profile, 1_000_000, 1).unwrap();
        assert!(rep.flags.all(), "{:?}", rep.violations);
        let us: Vec<u32> = rep
            .windows
            .iter()
            .filter(|w| w.members > 0)
            .map(|w| w.u)
            .collect();
        assert_eq!(us, vec![3, 5]);
        assert!(rep.pairs_checked > 0);
    }

    #[test]
    fn preconditions() {
        let profile = ShiftProfile::new(ShiftParameters::default()).unwrap();
        assert!(verify_characterization(&profile, 1000, 1).is_err());
        // E_2 first appears at u = 6
        let err = verify_characterization(&profile, 100_000, 2).unwrap_err();
        assert!(matches!(err, Error::Precondition { index: Some(2), .. }));
    }

    #[test]
    fn disjointness_detects_overlap() {
        let sets = vec![
            Members {
                p: 1,
                windows: vec![(1, vec![10])],
            },
            Members {
                p: 2,
                windows: vec![(2, vec![11])],
            },
        ];
        let mut found = Witnesses::default();
        check_disjoint(&sets, &mut found);
        check_gap_lemma(&sets, &mut found);
        assert!(found.any(Condition::B));
        assert!(found.any(Condition::GapLemma));
        assert_eq!(found.list[0].witness(), "(1, 2, 10, 11, -)");
    }
}
