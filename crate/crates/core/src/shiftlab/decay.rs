use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use super::params::ShiftParameters;
use super::profile::ShiftProfile;
use crate::weights::logsum::CompensatedSum;
use crate::weights::{direct_ratios_at, IntegerSet, WeightFamily};
use crate::{Error, Result};

/// Summands below this end the tail sum.
pub const TAIL_CUTOFF: f64 = 1e-15;

/// `T(p) = Σ_{q>p} (4q+1)(2q+1) e^{2q} / b_q` for each requested `p`,
/// truncated once a summand drops below [`TAIL_CUTOFF`].
pub fn tail_bounds(params: &ShiftParameters, ps: &[u32]) -> Vec<f64> {
    let Some(&top) = ps.iter().max() else {
        return Vec::new();
    };
    let mut far = CompensatedSum::default();
    let mut q = top + 1;
    loop {
        let s = params.condition_summand(q);
        if s < TAIL_CUTOFF || q == u32::MAX {
            break;
        }
        far.add(s);
        q += 1;
    }
    let lo = ps.iter().copied().min().unwrap_or(top);
    // T(p) = T(top) + Σ_{p < q ≤ top}
    let mut partial = vec![0.0; (top - lo + 1) as usize];
    let mut acc = far;
    for p in (lo..top).rev() {
        acc.add(params.condition_summand(p + 1));
        partial[(p - lo) as usize] = acc.value();
    }
    partial[(top - lo) as usize] = far.value();
    ps.iter().map(|&p| partial[(p - lo) as usize]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpDecayRow {
    pub p: u32,
    pub tail_bound: f64,
    /// `#{n ≤ horizon : P(n) > p}`.
    pub members: u64,
    /// `min` of the `A(r)` ratio of `G_p = {P > p}` over the evaluation points.
    pub empirical_proxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpDecayReport {
    pub r: f64,
    pub horizon: u64,
    /// `⌊(1-ε) a^{u+1}⌋ ≤ horizon`, `u ≥ 1`.
    pub evaluation_points: Vec<u64>,
    pub rows: Vec<FpDecayRow>,
    /// `T(p)` strictly decreasing along the sorted `p` list.
    pub tail_decreasing: bool,
    /// Empirical proxy non-increasing along the sorted `p` list.
    pub proxy_decreasing: bool,
}

pub fn fp_decay_report(
    profile: &ShiftProfile,
    r: f64,
    ps: &[u32],
    horizon: u64,
) -> Result<FpDecayReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
    }
    let mut ps = ps.to_vec();
    ps.sort_unstable();
    ps.dedup();
    if ps.is_empty() || ps[0] == 0 || ps.len() > 64 {
        return Err(Error::Domain(
            "p list must hold 1 to 64 positive values".into(),
        ));
    }
    let params = profile.params();
    let (c, d) = params.eps_parts();
    let evaluation_points: Vec<u64> = (2u32..)
        .map_while(|e| params.a_pow(e).map(|ae| ((d - c) * ae / d) as u64))
        .take_while(|&n| n <= horizon)
        .filter(|&n| n >= 1)
        .collect();
    if evaluation_points.is_empty() {
        return Err(Error::precondition(format!(
            "horizon {horizon} is below (1 - eps) a^2"
        )));
    }
    let bounds = tail_bounds(params, &ps);

    // bit i of mask(n) says P(n) > ps[i]
    let masks: Vec<u64> = (1..=horizon)
        .into_par_iter()
        .map(|n| {
            let v = profile.log2_product(n);
            ps.iter().enumerate().fold(0u64, |m, (i, &p)| {
                if v > Ratio::from_integer(p as i128) {
                    m | 1 << i
                } else {
                    m
                }
            })
        })
        .collect();
    let family = WeightFamily::exponential(r)?;
    let mut rows = Vec::with_capacity(ps.len());
    for (i, &p) in ps.iter().enumerate() {
        let members: Vec<u64> = masks
            .iter()
            .enumerate()
            .filter(|(_, &m)| m >> i & 1 == 1)
            .map(|(j, _)| j as u64 + 1)
            .collect();
        let count = members.len() as u64;
        let ratios = direct_ratios_at(&IntegerSet::Sorted(members), &family, &evaluation_points)?;
        let proxy = ratios.into_iter().fold(f64::INFINITY, f64::min);
        rows.push(FpDecayRow {
            p,
            tail_bound: bounds[i],
            members: count,
            empirical_proxy: proxy,
        });
    }
    let tail_decreasing = rows.windows(2).all(|w| w[1].tail_bound < w[0].tail_bound);
    let proxy_decreasing = rows
        .windows(2)
        .all(|w| w[1].empirical_proxy <= w[0].empirical_proxy);
    Ok(FpDecayReport {
        r,
        horizon,
        evaluation_points,
        rows,
        tail_decreasing,
        proxy_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_matches_direct_sum() {
        let params = ShiftParameters {
            b_exponent: 8,
            ..ShiftParameters::default()
        };
        let t = tail_bounds(&params, &[1, 3]);
        let direct = |p: u32| {
            (p + 1..20_000)
                .map(|q| params.condition_summand(q))
                .sum::<f64>()
        };
        assert!((t[0] - direct(1)).abs() < 1e-12);
        assert!((t[1] - direct(3)).abs() < 1e-12);
    }

    #[test]
    fn default_tail_values() {
        let t = tail_bounds(&ShiftParameters::default(), &[1, 3]);
        assert!(t[0] > t[1]);
        assert!((5.0..6.5).contains(&t[0]), "T(1) = {}", t[0]);
    }

    #[test]
    fn small_report() {
        let profile = ShiftProfile::new(ShiftParameters::default()).unwrap();
        let rep = fp_decay_report(&profile, 0.5, &[3, 1], 100_000).unwrap();
        assert_eq!(rep.evaluation_points, vec![136, 1641, 19699]);
        assert_eq!(rep.rows[0].p, 1);
        assert!(rep.rows[1].empirical_proxy < rep.rows[0].empirical_proxy);
        assert!(fp_decay_report(&profile, 1.0, &[1], 1000).is_err());
    }
}
