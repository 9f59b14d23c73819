use serde::Serialize;

use super::family::WeightFamily;
use super::logsum::{CompensatedSum, LogSumExp, RatioAccumulator};
use crate::{Error, Result};

/// Number of geometrically spaced rows whose sums are checked.
const SAMPLED_ROWS: usize = 32;

/// The three Toeplitz conditions of `m_{n,k} = α_k / φ(n)`, evaluated at a
/// finite row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub family: String,
    pub horizon: u64,
    /// `max_{k ≤ n} α_k / φ(n)` at `n = horizon`.
    pub max_entry_last_row: f64,
    /// `α_1 / φ(n)` at `n = horizon`; tends to 0 for every regular matrix.
    pub first_column_entry: f64,
    /// `|Σ_k m_{n,k} - 1|` at `n = horizon`.
    pub row_sum_defect: f64,
    /// `max` over the sampled rows of `Σ_k |m_{n,k}|`.
    pub sup_abs_row_sum: f64,
    pub sampled_rows: Vec<u64>,
    /// `1/n` for Cesàro; otherwise `ENTRY_BOUND_SLACK · max_k α_k / φ̃(n)`
    /// with `φ̃` the asymptotic form, when it is defined at `n`.
    pub max_entry_bound: Option<f64>,
}

impl RegularityReport {
    /// Row sum within [`ROW_SUM_TOL`] of 1 and the largest entry under its bound.
    pub fn within_bounds(&self) -> bool {
        self.row_sum_defect <= ROW_SUM_TOL
            && self
                .max_entry_bound
                .is_none_or(|b| self.max_entry_last_row <= b)
    }
}

pub const ROW_SUM_TOL: f64 = 1e-12;
pub const ENTRY_BOUND_SLACK: f64 = 1.1;

/// Roughly geometric rows in `[1, horizon]`, always including `horizon`.
pub(crate) fn geometric_points(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    if hi <= lo || count <= 1 {
        return vec![hi];
    }
    let (l, h) = ((lo.max(1)) as f64, hi as f64);
    let mut pts: Vec<u64> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (l * (h / l).powf(t)).round() as u64
        })
        .map(|p| p.clamp(lo, hi))
        .collect();
    pts.push(hi);
    pts.sort_unstable();
    pts.dedup();
    pts
}

fn collect_log_weights(family: &WeightFamily, horizon: u64) -> Result<Vec<f64>> {
    (1..=horizon)
        .map(|k| family.checked_log_weight(k))
        .collect()
}

pub fn regularity_report(family: &WeightFamily, horizon: u64) -> Result<RegularityReport> {
    if horizon < 2 {
        return Err(Error::Domain(format!(
            "regularity needs horizon >= 2, got {horizon}"
        )));
    }
    family.validate()?;
    let lws = collect_log_weights(family, horizon)?;
    let rows = geometric_points(1, horizon, SAMPLED_ROWS);

    let mut acc = RatioAccumulator::default();
    let mut sup_abs_row_sum = 0.0f64;
    let mut next_row = rows.iter().peekable();
    let mut last = RatioAccumulator::default();
    for (i, &lw) in lws.iter().enumerate() {
        let n = i as u64 + 1;
        acc.push(lw, true);
        if next_row.peek() == Some(&&n) {
            next_row.next();
            if acc.ln_total() == f64::NEG_INFINITY {
                return Err(Error::precondition_at(
                    "all weights up to this row are zero",
                    n,
                ));
            }
            let row_sum: CompensatedSum = lws[..=i].iter().map(|&l| acc.entry(l)).collect();
            sup_abs_row_sum = sup_abs_row_sum.max(row_sum.value().abs());
            if n == horizon {
                last = acc;
            }
        }
    }

    let max_entry_bound = match family {
        WeightFamily::Cesaro => Some(1.0 / horizon as f64),
        _ => family.phi_asymptotic_ln(horizon).map(|asym| {
            let max_lw = lws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ENTRY_BOUND_SLACK * (max_lw - asym).exp()
        }),
    };
    let mut max_entry = 0.0f64;
    let mut row_sum = CompensatedSum::default();
    for &lw in &lws {
        let e = last.entry(lw);
        max_entry = max_entry.max(e);
        row_sum.add(e);
    }
    Ok(RegularityReport {
        family: family.name(),
        horizon,
        max_entry_last_row: max_entry,
        first_column_entry: last.entry(lws[0]),
        row_sum_defect: (row_sum.value() - 1.0).abs(),
        sup_abs_row_sum,
        sampled_rows: rows,
        max_entry_bound,
    })
}

/// `ln φ(n) = ln Σ_{k ≤ n} α_k`.
pub fn summatory_log(family: &WeightFamily, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("summatory function needs n >= 1".into()));
    }
    let mut lse = LogSumExp::default();
    for k in 1..=n {
        lse.push(family.checked_log_weight(k)?);
    }
    Ok(lse.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummatoryReport {
    pub family: String,
    pub n: u64,
    pub ln_phi: f64,
    pub ln_phi_asymptotic: Option<f64>,
    /// `φ_computed / φ_asymptotic`.
    pub asymptotic_ratio: Option<f64>,
}

pub fn summatory_report(family: &WeightFamily, n: u64) -> Result<SummatoryReport> {
    let ln_phi = summatory_log(family, n)?;
    let asym = family.phi_asymptotic_ln(n);
    Ok(SummatoryReport {
        family: family.name(),
        n,
        ln_phi,
        ln_phi_asymptotic: asym,
        asymptotic_ratio: asym.map(|a| (ln_phi - a).exp()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cesaro_is_exact() {
        let r = regularity_report(&WeightFamily::Cesaro, 100_000).unwrap();
        assert_eq!(r.max_entry_last_row, 1e-5);
        assert_eq!(r.max_entry_bound, Some(1e-5));
        assert!(r.within_bounds());
        assert!(r.row_sum_defect <= 1e-15);
        assert!((r.sup_abs_row_sum - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn harmonic_first_entry() {
        let n = 100_000u64;
        let r = regularity_report(&WeightFamily::C(-1.0), n).unwrap();
        // oracle: harmonic number by plain backward summation
        let h: f64 = (1..=n).rev().map(|k| 1.0 / k as f64).sum();
        assert!((r.max_entry_last_row - 1.0 / h).abs() < 1e-12);
        assert!(r.row_sum_defect <= 1e-12);
    }

    #[test]
    fn geometric_weights() {
        let r = regularity_report(&WeightFamily::A(1.0), 200).unwrap();
        let oracle = (1.0 - (-1.0f64).exp()) / (1.0 - (-200.0f64).exp());
        assert!((r.max_entry_last_row - oracle).abs() < 1e-12);
        assert!(r.first_column_entry < 1e-80);
    }

    #[test]
    fn summatory_values() {
        let ln = summatory_log(&WeightFamily::Cesaro, 1000).unwrap();
        assert!((ln - 1000f64.ln()).abs() < 1e-14);
        let rep = summatory_report(&WeightFamily::C(2.0), 10_000).unwrap();
        // oracle: n(n+1)(2n+1)/6
        let n = 10_000f64;
        assert!((rep.ln_phi - (n * (n + 1.0) * (2.0 * n + 1.0) / 6.0).ln()).abs() < 1e-13);
        let ratio = rep.asymptotic_ratio.unwrap();
        assert!((0.99..=1.01).contains(&ratio));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(regularity_report(&WeightFamily::Cesaro, 1).is_err());
        let nan = WeightFamily::custom("nan", |k| if k > 5 { f64::NAN } else { 0.0 });
        assert!(matches!(
            regularity_report(&nan, 10),
            Err(Error::FamilyDomain { k: 6, .. })
        ));
        let zero = WeightFamily::custom("zero", |_| f64::NEG_INFINITY);
        assert!(regularity_report(&zero, 10).is_err());
    }

    #[test]
    fn geometric_points_cover_ends() {
        let p = geometric_points(1, 1000, 16);
        assert_eq!(p.first(), Some(&1));
        assert_eq!(p.last(), Some(&1000));
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }
}
