use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// A set of positive integers, enumerated in increasing order.
#[derive(Clone)]
pub enum IntegerSet {
    /// All of `ℕ = {1, 2, ...}`.
    Naturals,
    /// `{n >= 1 : n mod modulus ∈ residues}`.
    Residues { modulus: u64, residues: Vec<u64> },
    /// An explicit strictly increasing list.
    Sorted(Vec<u64>),
    /// `k ↦ n_k` for `k = 1, 2, ...`; must be strictly increasing.
    Sequence(Arc<dyn Fn(u64) -> u64 + Send + Sync>),
    /// Membership predicate on `n >= 1`.
    Predicate(Arc<dyn Fn(u64) -> bool + Send + Sync>),
}

impl fmt::Debug for IntegerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegerSet::Naturals => write!(f, "Naturals"),
            IntegerSet::Residues { modulus, residues } => f
                .debug_struct("Residues")
                .field("modulus", modulus)
                .field("residues", residues)
                .finish(),
            IntegerSet::Sorted(v) => write!(f, "Sorted({} elements)", v.len()),
            IntegerSet::Sequence(_) => write!(f, "Sequence(..)"),
            IntegerSet::Predicate(_) => write!(f, "Predicate(..)"),
        }
    }
}

/// Checks that `values` is strictly increasing and starts at 1 or above.
pub fn check_increasing(values: &[u64]) -> Result<()> {
    if values.first() == Some(&0) {
        return Err(Error::Domain(
            "integer sets contain only positive integers, found 0".into(),
        ));
    }
    for (i, w) in values.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::NotIncreasing {
                position: i + 1,
                previous: w[0],
                next: w[1],
            });
        }
    }
    Ok(())
}

impl IntegerSet {
    pub fn naturals() -> Self {
        IntegerSet::Naturals
    }

    /// `mℕ = {m, 2m, ...}`.
    pub fn multiples(m: u64) -> Result<Self> {
        IntegerSet::residues(m, vec![0])
    }

    pub fn residues(modulus: u64, mut residues: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Domain("residue modulus must be positive".into()));
        }
        if let Some(r) = residues.iter().find(|&&r| r >= modulus) {
            return Err(Error::Domain(format!(
                "residue {r} is not below modulus {modulus}"
            )));
        }
        residues.sort_unstable();
        residues.dedup();
        Ok(IntegerSet::Residues { modulus, residues })
    }

    pub fn from_sorted(values: Vec<u64>) -> Result<Self> {
        check_increasing(&values)?;
        Ok(IntegerSet::Sorted(values))
    }

    pub fn sequence<F: Fn(u64) -> u64 + Send + Sync + 'static>(f: F) -> Self {
        IntegerSet::Sequence(Arc::new(f))
    }

    pub fn predicate<F: Fn(u64) -> bool + Send + Sync + 'static>(f: F) -> Self {
        IntegerSet::Predicate(Arc::new(f))
    }

    /// All elements in `[1, horizon]`, increasing.
    pub fn elements_up_to(&self, horizon: u64) -> Result<Vec<u64>> {
        match self {
            IntegerSet::Naturals => Ok((1..=horizon).collect()),
            IntegerSet::Residues { modulus, residues } => {
                let m = *modulus;
                let mut out = Vec::new();
                let mut base = 0u64;
                'outer: loop {
                    for &r in residues {
                        let n = base + r;
                        if n == 0 {
                            continue;
                        }
                        if n > horizon {
                            break 'outer;
                        }
                        out.push(n);
                    }
                    base = match base.checked_add(m) {
                        Some(b) if b <= horizon => b,
                        _ => break,
                    };
                }
                Ok(out)
            }
            IntegerSet::Sorted(v) => {
                check_increasing(v)?;
                let end = v.partition_point(|&n| n <= horizon);
                Ok(v[..end].to_vec())
            }
            IntegerSet::Sequence(f) => {
                let mut out: Vec<u64> = Vec::new();
                for k in 1.. {
                    let n = f(k);
                    if n == 0 {
                        return Err(Error::Domain(format!("sequence term {k} is 0")));
                    }
                    if let Some(&prev) = out.last() {
                        if n <= prev {
                            return Err(Error::NotIncreasing {
                                position: out.len(),
                                previous: prev,
                                next: n,
                            });
                        }
                    }
                    if n > horizon {
                        break;
                    }
                    out.push(n);
                }
                Ok(out)
            }
            IntegerSet::Predicate(p) => Ok((1..=horizon).filter(|&n| p(n)).collect()),
        }
    }

    /// The first `count` elements; errors if the set is exhausted before
    /// `search_limit`.
    pub fn first(&self, count: usize, search_limit: u64) -> Result<Vec<u64>> {
        let short = |found: usize| {
            Error::precondition(format!(
                "set has only {found} elements up to {search_limit}, need {count}"
            ))
        };
        match self {
            IntegerSet::Sequence(f) => {
                let mut out: Vec<u64> = Vec::with_capacity(count);
                for k in 1..=count as u64 {
                    let n = f(k);
                    if n == 0 {
                        return Err(Error::Domain(format!("sequence term {k} is 0")));
                    }
                    if let Some(&prev) = out.last() {
                        if n <= prev {
                            return Err(Error::NotIncreasing {
                                position: out.len(),
                                previous: prev,
                                next: n,
                            });
                        }
                    }
                    out.push(n);
                }
                Ok(out)
            }
            IntegerSet::Sorted(v) => {
                check_increasing(v)?;
                if v.len() < count {
                    return Err(short(v.len()));
                }
                Ok(v[..count].to_vec())
            }
            IntegerSet::Predicate(p) => {
                let mut out = Vec::with_capacity(count);
                let mut n = 1u64;
                while out.len() < count {
                    if n > search_limit {
                        return Err(short(out.len()));
                    }
                    if p(n) {
                        out.push(n);
                    }
                    n += 1;
                }
                Ok(out)
            }
            IntegerSet::Naturals => Ok((1..=count as u64).collect()),
            IntegerSet::Residues { modulus, residues } => {
                if residues.is_empty() && count > 0 {
                    return Err(short(0));
                }
                // a non-empty residue class has `count` elements below (count + 1) * modulus
                let mut v = self.elements_up_to(modulus.saturating_mul(count as u64 + 1))?;
                v.truncate(count);
                Ok(v)
            }
        }
    }

    /// Elements of `ℕ \ self` in `[1, horizon]`.
    pub fn complement_up_to(&self, horizon: u64) -> Result<Vec<u64>> {
        let members = self.elements_up_to(horizon)?;
        Ok(complement_of(&members, horizon))
    }
}

pub(crate) fn complement_of(members: &[u64], horizon: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity((horizon as usize).saturating_sub(members.len()));
    let mut it = members.iter().peekable();
    for n in 1..=horizon {
        if it.peek() == Some(&&n) {
            it.next();
        } else {
            out.push(n);
        }
    }
    out
}
