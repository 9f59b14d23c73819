use super::params::Rational;
use super::profile::ShiftProfile;
use crate::weights::IntegerSet;
use crate::{Error, Result};

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `{n ≤ N : ‖B_w^n x - e_0‖_∞ ≤ radius}` for a finitely supported `x`
/// given as `(index, value)` pairs, where
/// `(B_w^n x)_j = w_{j+1} ⋯ w_{j+n} x_{j+n} = 2^{P(j+n+1) - P(j+1)} x_{j+n}`.
pub fn orbit_hit_set(
    profile: &ShiftProfile,
    x: &[(u64, f64)],
    radius: f64,
    n_max: u64,
) -> Result<IntegerSet> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let mut support: Vec<(u64, f64)> = x.iter().copied().filter(|&(_, v)| v != 0.0).collect();
    support.sort_by_key(|&(s, _)| s);
    if let Some(w) = support.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Domain(format!(
            "index {} appears twice in x",
            w[0].0
        )));
    }
    if let Some(&(s, v)) = support.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Domain(format!("x_{s} = {v} is not finite")));
    }
    let top: Vec<Rational> = support
        .iter()
        .map(|&(s, _)| profile.log2_product(s + 1))
        .collect();
    let mut hits = Vec::new();
    for n in 1..=n_max {
        let from = support.partition_point(|&(s, _)| s < n);
        let mut head = 0.0;
        let mut dist = 0.0f64;
        for (i, &(s, v)) in support.iter().enumerate().skip(from) {
            let j = s - n;
            let y = (to_f64(&(top[i] - profile.log2_product(j + 1)))).exp2() * v;
            if j == 0 {
                head = y;
            } else {
                dist = dist.max(y.abs());
            }
        }
        dist = dist.max((head - 1.0).abs());
        if dist <= radius {
            hits.push(n);
        }
    }
    Ok(IntegerSet::Sorted(hits))
}

/// `x = e_{n₀} / (w_1 ⋯ w_{n₀})`, whose `n₀`-th iterate is exactly `e_0`.
pub fn preimage_of_e0(profile: &ShiftProfile, n0: u64) -> Vec<(u64, f64)> {
    let log2 = profile.log2_product(n0 + 1) - profile.log2_product(1);
    vec![(n0, (-to_f64(&log2)).exp2())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shiftlab::ShiftParameters;

    fn profile() -> ShiftProfile {
        ShiftProfile::new(ShiftParameters::default()).unwrap()
    }

    #[test]
    fn basis_vector_never_returns() {
        let hits = orbit_hit_set(&profile(), &[(0, 1.0)], 0.5, 1000).unwrap();
        assert!(hits.elements_up_to(1000).unwrap().is_empty());
        let hits = orbit_hit_set(&profile(), &[], 0.5, 1000).unwrap();
        assert!(hits.elements_up_to(1000).unwrap().is_empty());
    }

    #[test]
    fn preimage_hits_at_plateau() {
        let pr = profile();
        // 130 sits on the (2, 1) plateau
        let x = preimage_of_e0(&pr, 130);
        let hits = orbit_hit_set(&pr, &x, 0.5, 200)
            .unwrap()
            .elements_up_to(200)
            .unwrap();
        assert!(hits.contains(&130));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(orbit_hit_set(&profile(), &[(1, 1.0)], 0.0, 10).is_err());
        assert!(orbit_hit_set(&profile(), &[(1, 1.0), (1, 2.0)], 0.5, 10).is_err());
    }
}
