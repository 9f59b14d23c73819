use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// `a_m` for a step function: either an exact value or `2^2^…^top` with
/// `height` twos when it does not fit in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ATerm {
    Exact(u64),
    Tower { height: u32, top: u64 },
}

impl ATerm {
    pub fn exact(self) -> Option<u64> {
        match self {
            ATerm::Exact(v) => Some(v),
            ATerm::Tower { .. } => None,
        }
    }
}

impl fmt::Display for ATerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ATerm::Exact(v) => write!(f, "{v}"),
            ATerm::Tower { height, top } => {
                for _ in 0..*height {
                    write!(f, "2^")?;
                }
                write!(f, "{top}")
            }
        }
    }
}

/// `f(j) = m` for `j ∈ [a_m, a_{m+1})`, from an increasing sequence with
/// `a_1 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepFunction {
    /// `a_m = m`, so `f(j) = j`.
    Identity,
    /// `a_1 = 1`, `a_m = 2^2^…^m` (`s` twos) for `m >= 2`.
    Tower(u32),
    /// Explicit finite prefix `a_1 = 1 < a_2 < …`; `f` is constant past the last entry.
    Custom(Vec<u64>),
}

impl StepFunction {
    pub fn tower(s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::Domain("tower step functions need s >= 1".into()));
        }
        Ok(StepFunction::Tower(s))
    }

    pub fn custom(a: Vec<u64>) -> Result<Self> {
        if a.first() != Some(&1) {
            return Err(Error::Domain(
                "custom step sequences must start with a_1 = 1".into(),
            ));
        }
        if let Some(i) = a.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NotIncreasing {
                position: i + 1,
                previous: a[i],
                next: a[i + 1],
            });
        }
        Ok(StepFunction::Custom(a))
    }

    /// `a_m` for `m >= 1`.
    pub fn a(&self, m: u64) -> Option<ATerm> {
        if m == 0 {
            return None;
        }
        match self {
            StepFunction::Identity => Some(ATerm::Exact(m)),
            StepFunction::Tower(_) if m == 1 => Some(ATerm::Exact(1)),
            StepFunction::Tower(s) => {
                let mut v = m;
                for done in 0..*s {
                    if v >= 64 {
                        return Some(ATerm::Tower {
                            height: s - done,
                            top: v,
                        });
                    }
                    v = 1u64 << v;
                }
                Some(ATerm::Exact(v))
            }
            StepFunction::Custom(a) => a.get(m as usize - 1).map(|&v| ATerm::Exact(v)),
        }
    }

    /// `a_m` when it is a `u64`.
    pub fn a_exact(&self, m: u64) -> Option<u64> {
        self.a(m).and_then(ATerm::exact)
    }

    /// `f(j)`, with `f(0) = 0`.
    pub fn eval(&self, j: u64) -> u64 {
        if j == 0 {
            return 0;
        }
        match self {
            StepFunction::Identity => j,
            StepFunction::Tower(s) => {
                // towers are exact powers of two, so floor logs compare exactly
                let mut x = j;
                for _ in 0..*s {
                    if x == 0 {
                        break;
                    }
                    x = x.ilog2() as u64;
                }
                x.max(1)
            }
            StepFunction::Custom(a) => a.partition_point(|&v| v <= j) as u64,
        }
    }

    /// `Σ_{j=1}^{l} f(j)`.
    pub fn prefix_sum(&self, l: u64) -> u128 {
        if let StepFunction::Identity = self {
            let l = l as u128;
            return l * (l + 1) / 2;
        }
        let mut total = 0u128;
        let mut m = 1u64;
        while let Some(start) = self.a_exact(m) {
            if start > l {
                break;
            }
            let end = match self.a_exact(m + 1) {
                Some(next) if next <= l => next - 1,
                _ => l,
            };
            total += (end - start + 1) as u128 * m as u128;
            if end == l {
                break;
            }
            m += 1;
        }
        total
    }

    /// `a_1, a_2, …` up to and including values `<= t`.
    pub fn breakpoints_up_to(&self, t: u64) -> impl Iterator<Item = u64> + '_ {
        (1u64..).map_while(move |m| self.a_exact(m).filter(|&v| v <= t))
    }

    /// `Σ_{l >= 1} 2^{1 - a_l}`, dropping terms below `2^-64`.
    pub fn dyadic_mass(&self) -> f64 {
        match self {
            StepFunction::Identity => 2.0,
            _ => self
                .breakpoints_up_to(64)
                .map(|a| 2f64.powi(1 - a as i32))
                .sum(),
        }
    }
}

impl fmt::Display for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepFunction::Identity => write!(f, "identity"),
            StepFunction::Tower(s) => write!(f, "tower:{s}"),
            StepFunction::Custom(a) => {
                let parts: Vec<String> = a.iter().map(u64::to_string).collect();
                write!(f, "custom:{}", parts.join(","))
            }
        }
    }
}

/// `identity`, `tower:s` or `custom:1,3,7,…`.
impl FromStr for StepFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "identity" || t == "id" {
            return Ok(StepFunction::Identity);
        }
        if let Some(rest) = t.strip_prefix("tower:").or_else(|| t.strip_prefix("tower")) {
            let s: u32 = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad tower height in {s:?}")))?;
            return StepFunction::tower(s);
        }
        if let Some(rest) = t.strip_prefix("custom:") {
            let a = rest
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::Parse(format!("bad entry {v:?} in {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return StepFunction::custom(a);
        }
        Err(Error::Parse(format!("unknown step function {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_terms() {
        let t1 = StepFunction::Tower(1);
        assert_eq!(
            (1..=5).map(|m| t1.a_exact(m).unwrap()).collect::<Vec<_>>(),
            vec![1, 4, 8, 16, 32]
        );
        let t2 = StepFunction::Tower(2);
        assert_eq!(t2.a_exact(2), Some(16));
        assert_eq!(t2.a_exact(3), Some(256));
        assert_eq!(t2.a_exact(4), Some(65536));
        assert_eq!(t2.a_exact(5), Some(1 << 32));
        assert_eq!(t2.a(6), Some(ATerm::Tower { height: 1, top: 64 }));
        assert_eq!(t2.a(6).unwrap().to_string(), "2^64");
    }

    #[test]
    fn eval_hits_breakpoints() {
        for f in [
            StepFunction::Identity,
            StepFunction::Tower(1),
            StepFunction::Tower(2),
            StepFunction::Tower(3),
        ] {
            for m in 1..8 {
                if let Some(a) = f.a_exact(m) {
                    assert_eq!(f.eval(a), m, "{f} at a_{m}");
                    if m > 1 {
                        assert_eq!(f.eval(a - 1), m - 1, "{f} below a_{m}");
                    }
                }
            }
        }
        assert_eq!(StepFunction::Tower(1).eval(3), 1);
        assert_eq!(StepFunction::Tower(2).eval(u64::MAX), 5);
    }

    #[test]
    fn prefix_sums_match_direct() {
        let custom = StepFunction::custom(vec![1, 3, 4, 10]).unwrap();
        for f in [
            StepFunction::Identity,
            StepFunction::Tower(1),
            StepFunction::Tower(2),
            custom,
        ] {
            let mut direct = 0u128;
            for l in 1..=3000u64 {
                direct += f.eval(l) as u128;
                assert_eq!(f.prefix_sum(l), direct, "{f} at {l}");
            }
            assert_eq!(f.prefix_sum(0), 0);
        }
    }

    #[test]
    fn parses() {
        assert_eq!(
            "identity".parse::<StepFunction>().unwrap(),
            StepFunction::Identity
        );
        assert_eq!(
            "tower:2".parse::<StepFunction>().unwrap(),
            StepFunction::Tower(2)
        );
        assert!("tower:0".parse::<StepFunction>().is_err());
        assert!("custom:2,3".parse::<StepFunction>().is_err());
        assert!("custom:1,3,3".parse::<StepFunction>().is_err());
        assert_eq!(
            "custom:1,5".parse::<StepFunction>().unwrap().to_string(),
            "custom:1,5"
        );
    }

    #[test]
    fn dyadic_mass() {
        assert_eq!(StepFunction::Identity.dyadic_mass(), 2.0);
        // 2^0 + 2^-3 + 2^-7 + 2^-15 + 2^-31 + 2^-63
        let m = StepFunction::Tower(1).dyadic_mass();
        assert!(
            (m - (1.0 + 0.125 + 2f64.powi(-7) + 2f64.powi(-15) + 2f64.powi(-31) + 2f64.powi(-63)))
                .abs()
                < 1e-16
        );
    }
}
