use rayon::prelude::*;
use serde::Serialize;

use super::profile::delta;
use super::sequence::{nk_closed_general, nk_closed_identity, nk_recursive, ConstructedSequence};
use super::step::StepFunction;
use crate::weights::{self, IntegerSet, SubsequenceRatios, WeightFamily};
use crate::{Error, Result};

/// Which closed form a verification scan compares against the recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedFormRoute {
    /// `4k - 2 Σ L_i(q_i + 1) - δ_k` (identity step function only).
    Identity,
    /// Power formulas plus the multi-block sum.
    General(StepFunction),
}

impl ClosedFormRoute {
    pub fn step_function(&self) -> StepFunction {
        match self {
            ClosedFormRoute::Identity => StepFunction::Identity,
            ClosedFormRoute::General(f) => f.clone(),
        }
    }

    fn eval(&self, k: u64) -> Result<u128> {
        match self {
            ClosedFormRoute::Identity => nk_closed_identity(k),
            ClosedFormRoute::General(f) => nk_closed_general(f, k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub k: u64,
    pub recursive: u128,
    pub closed: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosedFormScan {
    pub checked: u64,
    pub mismatches: Vec<Mismatch>,
}

/// Compares the closed form with the recursion for every `k ≤ kmax`.
pub fn verify_closed_form(route: &ClosedFormRoute, kmax: u64) -> Result<ClosedFormScan> {
    if kmax == 0 {
        return Err(Error::Domain("closed-form scan needs kmax >= 1".into()));
    }
    let oracle = nk_recursive(&route.step_function(), kmax);
    let mismatches = (1..=kmax)
        .into_par_iter()
        .map(|k| {
            let recursive = oracle[(k - 1) as usize];
            route.eval(k).map(|closed| {
                (closed != recursive).then_some(Mismatch {
                    k,
                    recursive,
                    closed,
                })
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(ClosedFormScan {
        checked: kmax,
        mismatches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeparationWitness {
    pub i: u64,
    pub j: u64,
    pub gap: u128,
    pub required: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub count: u64,
    pub pairs_checked: u64,
    pub holds: bool,
    /// First pair (in `(i, j)` order) with `n_j - n_i < f(δ_i) + f(δ_j)`.
    pub witness: Option<SeparationWitness>,
    /// First `k` with `n_k < f(δ_k)`.
    pub floor_witness: Option<u64>,
}

fn separation_terms(f: &StepFunction, count: u64) -> Result<(Vec<u128>, Vec<u128>)> {
    if count < 2 {
        return Err(Error::Domain(format!(
            "separation check needs K >= 2, got {count}"
        )));
    }
    let (n, fd) = ConstructedSequence::new(f.clone())
        .take(count as usize)
        .map(|t| (t.n, f.eval(t.delta as u64) as u128))
        .unzip();
    Ok((n, fd))
}

fn floor_witness(n: &[u128], fd: &[u128]) -> Option<u64> {
    n.iter()
        .zip(fd)
        .position(|(n, f)| n < f)
        .map(|i| i as u64 + 1)
}

/// Separation over all pairs, using that the adjacent gaps telescope with
/// non-negative middle terms: only adjacent pairs need checking.
pub fn separation_check(f: &StepFunction, count: u64) -> Result<SeparationReport> {
    let (n, fd) = separation_terms(f, count)?;
    let witness = (1..n.len()).find_map(|i| {
        let gap = n[i] - n[i - 1];
        let required = fd[i - 1] + fd[i];
        (gap < required).then_some(SeparationWitness {
            i: i as u64,
            j: i as u64 + 1,
            gap,
            required,
        })
    });
    let floor = floor_witness(&n, &fd);
    Ok(SeparationReport {
        count,
        pairs_checked: count - 1,
        holds: witness.is_none() && floor.is_none(),
        witness,
        floor_witness: floor,
    })
}

/// Separation over every pair `i < j ≤ K` by brute force.
pub fn separation_check_exhaustive(f: &StepFunction, count: u64) -> Result<SeparationReport> {
    let (n, fd) = separation_terms(f, count)?;
    let witness = (0..n.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..n.len()).find_map(|j| {
                let gap = n[j] - n[i];
                let required = fd[i] + fd[j];
                (gap < required).then_some(SeparationWitness {
                    i: i as u64 + 1,
                    j: j as u64 + 1,
                    gap,
                    required,
                })
            })
        })
        .find_first(Option::is_some)
        .flatten();
    let floor = floor_witness(&n, &fd);
    Ok(SeparationReport {
        count,
        pairs_checked: count * (count - 1) / 2,
        holds: witness.is_none() && floor.is_none(),
        witness,
        floor_witness: floor,
    })
}

/// Indices `k ≤ K` in `I(l, ν)`.
pub fn partition_indices(l: u32, nu: u32, count: u64) -> Result<Vec<u64>> {
    if l == 0 || nu == 0 {
        return Err(Error::Domain(format!(
            "I(l, nu) needs l, nu >= 1, got ({l}, {nu})"
        )));
    }
    if l - 1 + nu >= 64 {
        return Ok(Vec::new());
    }
    // k ∈ I(l,ν) iff k mod 2^{l+ν} = (2^ν - 1) 2^{l-1}
    let period = 1u128 << (l + nu);
    let base = ((1u128 << nu) - 1) << (l - 1);
    Ok((0..)
        .map(|j: u128| base + j * period)
        .take_while(|&k| k <= count as u128)
        .map(|k| k as u64)
        .collect())
}

/// `{n_k : k ∈ I(l, ν), k ≤ K}`.
pub fn partition_set(f: &StepFunction, l: u32, nu: u32, count: u64) -> Result<IntegerSet> {
    let indices = partition_indices(l, nu, count)?;
    let Some(&last) = indices.last() else {
        return Ok(IntegerSet::Sorted(Vec::new()));
    };
    let n = nk_recursive(f, last);
    let values = indices
        .iter()
        .map(|&k| {
            u64::try_from(n[(k - 1) as usize])
                .map_err(|_| Error::Domain(format!("n_{k} exceeds u64")))
        })
        .collect::<Result<Vec<_>>>()?;
    IntegerSet::from_sorted(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichRow {
    pub k: u64,
    pub n_k: u128,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

fn outward(x: f64, up: bool) -> f64 {
    let slack = 1e-12 * x.abs().max(1.0);
    if up {
        (x + slack).ceil()
    } else {
        (x - slack).floor()
    }
}

/// Lower and upper bounds on `n_k`: the sharp identity bounds
/// `4k - 2(log₂k + 2)² - log₂k - 1 ≤ n_k ≤ 4k - 2 log₂k - 1` for the identity,
/// the `2kD`-bounds with `D = Σ_l 2^{1-a_l}` otherwise.
pub fn sandwich_bounds(f: &StepFunction, k: u64) -> (f64, f64) {
    let x = k as f64;
    let lg = x.log2();
    match f {
        StepFunction::Identity => (
            4.0 * x - 2.0 * (lg + 2.0).powi(2) - lg - 1.0,
            4.0 * x - 2.0 * lg - 1.0,
        ),
        _ => {
            let top = 2.0 * x * f.dyadic_mass();
            let fl = f.eval(k.ilog2() as u64) as f64;
            (top - 2.0 * lg * fl - 14.0 * lg - 8.0 * fl, top)
        }
    }
}

pub fn sandwich_check(f: &StepFunction, samples: &[u64]) -> Result<Vec<SandwichRow>> {
    samples
        .iter()
        .map(|&k| {
            if k < 2 {
                return Err(Error::Domain(format!(
                    "sandwich bounds need k >= 2, got {k}"
                )));
            }
            let n_k = nk_closed_general(f, k)?;
            let (lo, hi) = sandwich_bounds(f, k);
            let (lower, upper) = (outward(lo, false), outward(hi, true));
            let v = n_k as f64;
            Ok(SandwichRow {
                k,
                n_k,
                lower: lo,
                upper: hi,
                holds: lower <= v && v <= upper,
            })
        })
        .collect()
}

/// `λ_j = Σ_{l=0}^{j} 4^l`.
pub fn lambda_index(j: u32) -> u64 {
    (0..=j).map(|l| 4u64.pow(l)).sum()
}

/// `n_{λ_j} - (4λ_j - 2j² - 4j - 3)`, zero for every `j`.
pub fn lambda_identity_residual(j: u32) -> Result<i128> {
    let lam = lambda_index(j);
    let n = nk_closed_identity(lam)? as i128;
    let j = j as i128;
    Ok(n - (4 * lam as i128 - 2 * j * j - 4 * j - 3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaRatio {
    /// `j` with `λ = 2^{j+1} - 1`.
    pub j: u32,
    pub lambda: u64,
    /// `N = n_{λ+1} - 1`, the end of the gap after `n_λ`.
    pub gap_end: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRatioReport {
    pub step_function: String,
    pub subsequence: SubsequenceRatios,
    /// `min ρ_k` over `k ∈ [⌈K/10⌉, K]`.
    pub tail_min: f64,
    pub lambda_ratios: Vec<LambdaRatio>,
    pub lambda_decreasing: bool,
}

impl LimitRatioReport {
    pub fn lambda_ratio(&self, j: u32) -> Option<f64> {
        self.lambda_ratios
            .iter()
            .find(|r| r.j == j)
            .map(|r| r.ratio)
    }
}

/// Subsequence ratios of `(n_k(f))` under `family`, plus the direct ratio at
/// the ends of the long gaps following `λ = 2^{j+1} - 1`.
pub fn limit_ratio_report(
    f: &StepFunction,
    family: &WeightFamily,
    count: u64,
) -> Result<LimitRatioReport> {
    if count < 16 {
        return Err(Error::Domain(format!(
            "limit ratio report needs K >= 16, got {count}"
        )));
    }
    family.validate()?;
    let elements = nk_recursive(f, count)
        .into_iter()
        .map(|n| u64::try_from(n).map_err(|_| Error::Domain("n_k exceeds u64".into())))
        .collect::<Result<Vec<u64>>>()?;
    let mut lambdas = Vec::new();
    for j in 1u32..63 {
        let lambda = (1u64 << (j + 1)) - 1;
        if lambda + 1 > count {
            break;
        }
        debug_assert_eq!(delta(lambda), j + 1);
        lambdas.push((j, lambda, elements[lambda as usize] - 1));
    }
    let set = IntegerSet::Sorted(elements.clone());
    let points: Vec<u64> = lambdas.iter().map(|l| l.2).collect();
    let ratios = weights::direct_ratios_at(&set, family, &points)?;
    let lambda_ratios: Vec<LambdaRatio> = lambdas
        .iter()
        .zip(ratios)
        .map(|(&(j, lambda, gap_end), ratio)| LambdaRatio {
            j,
            lambda,
            gap_end,
            ratio,
        })
        .collect();
    let lambda_decreasing = lambda_ratios.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let subsequence = weights::subsequence_from_elements(elements, family)?;
    let from = (count as usize).div_ceil(10);
    let tail_min = subsequence
        .min_over(from, count as usize)
        .unwrap_or(f64::NAN);
    Ok(LimitRatioReport {
        step_function: f.to_string(),
        subsequence,
        tail_min,
        lambda_ratios,
        lambda_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicProfile;

    #[test]
    fn closed_form_scans_agree() {
        let s = verify_closed_form(&ClosedFormRoute::Identity, 1 << 12).unwrap();
        assert_eq!((s.checked, s.mismatches.len()), (4096, 0));
        for f in [
            StepFunction::Identity,
            StepFunction::Tower(1),
            StepFunction::Tower(2),
        ] {
            let s = verify_closed_form(&ClosedFormRoute::General(f), 1 << 12).unwrap();
            assert!(s.mismatches.is_empty());
        }
    }

    #[test]
    fn separation_hand_pair() {
        // n_3 = 6, n_4 = 9, δ_3 = 2, δ_4 = 1
        let n = nk_recursive(&StepFunction::Identity, 4);
        assert_eq!(n[3] - n[2], (delta(3) + delta(4)) as u128);
        let rep = separation_check(&StepFunction::Identity, 1 << 10).unwrap();
        assert!(rep.holds);
        let ex = separation_check_exhaustive(&StepFunction::Tower(1), 1 << 9).unwrap();
        assert!(ex.holds);
        assert_eq!(ex.pairs_checked, 512 * 511 / 2);
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition_indices(1, 1, 8).unwrap(), vec![1, 5]);
        assert_eq!(partition_indices(1, 2, 8).unwrap(), vec![3]);
        let a = partition_set(&StepFunction::Identity, 1, 1, 8).unwrap();
        assert_eq!(a.elements_up_to(100).unwrap(), vec![1, 11]);
        let b = partition_set(&StepFunction::Identity, 1, 2, 8).unwrap();
        assert_eq!(b.elements_up_to(100).unwrap(), vec![6]);
        assert!(partition_indices(0, 1, 8).is_err());
    }

    #[test]
    fn classes_partition_indices() {
        let k = 1u64 << 10;
        let mut all: Vec<u64> = (1..=11)
            .flat_map(|l| (1..=11).map(move |nu| (l, nu)))
            .flat_map(|(l, nu)| partition_indices(l, nu, k).unwrap())
            .collect();
        all.sort_unstable();
        assert_eq!(all, (1..=k).collect::<Vec<_>>());
    }

    #[test]
    fn partition_indices_match_profiles() {
        for (l, nu) in [(1, 1), (2, 3), (3, 1), (4, 2)] {
            let direct: Vec<u64> = (1..=4096)
                .filter(|&k| DyadicProfile::new(k).unwrap().in_class(l, nu))
                .collect();
            assert_eq!(partition_indices(l, nu, 4096).unwrap(), direct);
        }
    }

    #[test]
    fn sandwich_examples() {
        let rows = sandwich_check(&StepFunction::Identity, &[1 << 10, 1365]).unwrap();
        assert_eq!(rows[0].n_k, 4073);
        assert_eq!(rows[0].lower, 4096.0 - 288.0 - 11.0);
        assert_eq!(rows[0].upper, 4075.0);
        assert_eq!(rows[1].n_k, 5387);
        assert!(rows.iter().all(|r| r.holds));
        let rows = sandwich_check(&StepFunction::Tower(1), &[1 << 12]).unwrap();
        assert!(rows[0].holds);
        assert!(sandwich_check(&StepFunction::Identity, &[1]).is_err());
    }

    #[test]
    fn lambda_identity() {
        assert_eq!(lambda_index(2), 21);
        assert_eq!(lambda_index(9), 349_525);
        for j in 0..=9 {
            assert_eq!(lambda_identity_residual(j).unwrap(), 0);
        }
    }

    #[test]
    fn cesaro_limit_ratio() {
        let rep =
            limit_ratio_report(&StepFunction::Identity, &WeightFamily::Cesaro, 1 << 12).unwrap();
        // k / n_k > 1/4 since n_k ≤ 4k - 2 log₂k - 1
        assert!(
            rep.tail_min > 0.25 && rep.tail_min < 0.2505,
            "{}",
            rep.tail_min
        );
        assert_eq!(rep.lambda_ratios.len(), 11);
        assert_eq!(rep.lambda_ratios[0].lambda, 3);
        // n_4 - 1 = 8, and n_1..n_3 = 1, 3, 6 lie below it
        assert_eq!(rep.lambda_ratios[0].gap_end, 8);
        assert_eq!(rep.lambda_ratios[0].ratio, 3.0 / 8.0);
    }
}
