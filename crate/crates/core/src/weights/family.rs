use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;

use crate::{Error, Result};

/// `Btilde(s)` with its threshold `k*_s` cached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IteratedLog {
    s: u32,
    threshold: Option<u64>,
}

impl IteratedLog {
    pub fn new(s: u32) -> Result<Self> {
        if s < 2 {
            return Err(Error::Domain(format!("Btilde(s) needs s >= 2, got {s}")));
        }
        Ok(IteratedLog {
            s,
            threshold: h_threshold(s),
        })
    }

    pub fn depth(&self) -> u32 {
        self.s
    }

    /// Smallest `k` with `h_s(k) >= 1`, or `None` when no `u64` reaches it.
    pub fn threshold(&self) -> Option<u64> {
        self.threshold
    }

    fn active(&self, k: u64) -> bool {
        self.threshold.is_some_and(|t| k >= t)
    }
}

/// `h_s(x) = ln x · ln^{(s)} x`, defined when every intermediate log is positive.
pub fn h_s(s: u32, x: f64) -> Option<f64> {
    let ln = x.ln();
    let mut it = x;
    for _ in 0..s {
        if it <= 0.0 {
            return None;
        }
        it = it.ln();
    }
    Some(ln * it)
}

fn h_at_least_one(s: u32, k: u64) -> bool {
    h_s(s, k as f64).is_some_and(|h| h >= 1.0)
}

fn h_threshold(s: u32) -> Option<u64> {
    let mut hi = 2u64;
    while !h_at_least_one(s, hi) {
        hi = hi.checked_mul(2)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if h_at_least_one(s, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(if h_at_least_one(s, lo) { lo } else { hi })
}

/// A user-supplied weight sequence given by `k ↦ ln α_k`.
#[derive(Clone)]
pub struct CustomFamily {
    name: String,
    log_weight: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// Weight sequence `α_k` of an admissible matrix `m_{n,k} = α_k / φ(n)`.
#[derive(Debug, Clone)]
pub enum WeightFamily {
    /// `α_k = 1`.
    Cesaro,
    /// `α_k = k^r`, `r >= -1`.
    C(f64),
    /// `α_k = e^{k^r}`, `0 <= r <= 1`.
    A(f64),
    /// `α_1 = 1`, `α_k = e^{k / ln^r k}`, `r >= 0`.
    B(f64),
    /// `α_k = e^{k / h_s(k)}` above the threshold, `1` below.
    BTilde(IteratedLog),
    Custom(CustomFamily),
}

impl WeightFamily {
    pub fn polynomial(r: f64) -> Result<Self> {
        let fam = WeightFamily::C(r);
        fam.validate()?;
        Ok(fam)
    }

    pub fn exponential(r: f64) -> Result<Self> {
        let fam = WeightFamily::A(r);
        fam.validate()?;
        Ok(fam)
    }

    pub fn subexponential(r: f64) -> Result<Self> {
        let fam = WeightFamily::B(r);
        fam.validate()?;
        Ok(fam)
    }

    pub fn iterated_log(s: u32) -> Result<Self> {
        Ok(WeightFamily::BTilde(IteratedLog::new(s)?))
    }

    pub fn custom<F>(name: impl Into<String>, log_weight: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        WeightFamily::Custom(CustomFamily {
            name: name.into(),
            log_weight: Arc::new(log_weight),
        })
    }

    /// Checks the parameter range of a named family.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        match *self {
            WeightFamily::C(r) if !(r.is_finite() && r >= -1.0) => {
                bad(format!("C(r) needs r >= -1, got {r}"))
            }
            WeightFamily::A(r) if !(0.0..=1.0).contains(&r) => {
                bad(format!("A(r) needs 0 <= r <= 1, got {r}"))
            }
            WeightFamily::B(r) if !(r.is_finite() && r >= 0.0) => {
                bad(format!("B(r) needs r >= 0, got {r}"))
            }
            WeightFamily::BTilde(it) if it.s < 2 => {
                bad(format!("Btilde(s) needs s >= 2, got {}", it.s))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn is_custom(&self) -> bool {
        matches!(self, WeightFamily::Custom(_))
    }

    /// `ln α_k` for `k >= 1`.
    pub fn log_weight(&self, k: u64) -> f64 {
        let x = k as f64;
        match self {
            WeightFamily::Cesaro => 0.0,
            WeightFamily::C(r) => r * x.ln(),
            WeightFamily::A(r) => x.powf(*r),
            WeightFamily::B(r) => {
                if k == 1 {
                    0.0
                } else if *r == 0.0 {
                    x
                } else {
                    x / x.ln().powf(*r)
                }
            }
            WeightFamily::BTilde(it) => {
                if it.active(k) {
                    // active() guarantees h_s is defined and >= 1
                    x / h_s(it.s, x).unwrap_or(1.0)
                } else {
                    0.0
                }
            }
            WeightFamily::Custom(c) => (c.log_weight)(k),
        }
    }

    /// `α_k` as an exact rational, when it is one and fits.
    pub fn exact_weight(&self, k: u64) -> Option<Ratio<u128>> {
        let one = Some(Ratio::from_integer(1));
        match self {
            WeightFamily::Cesaro => one,
            WeightFamily::C(r) if r.fract() == 0.0 && r.abs() < 128.0 => {
                let p = (k as u128).checked_pow(r.abs() as u32)?;
                if *r >= 0.0 {
                    Some(Ratio::from_integer(p))
                } else {
                    Some(Ratio::new(1, p))
                }
            }
            WeightFamily::B(_) if k == 1 => one,
            WeightFamily::BTilde(it) if !it.active(k) => one,
            _ => None,
        }
    }

    /// Leading asymptotic form of `ln φ(n)`; `None` for custom families and
    /// where the form is undefined (e.g. `ln ln n` at `n = 1`).
    pub fn phi_asymptotic_ln(&self, n: u64) -> Option<f64> {
        let x = n as f64;
        let ln = x.ln();
        let geometric = x + (std::f64::consts::E / (std::f64::consts::E - 1.0)).ln();
        let v = match self {
            WeightFamily::Cesaro => ln,
            WeightFamily::C(r) if *r == -1.0 => ln.ln(),
            WeightFamily::C(r) => (r + 1.0) * ln - (r + 1.0).ln(),
            WeightFamily::A(r) if *r == 0.0 => 1.0 + ln,
            WeightFamily::A(r) if *r == 1.0 => geometric,
            WeightFamily::A(r) => (1.0 - r) * ln - r.ln() + x.powf(*r),
            WeightFamily::B(r) if *r == 0.0 => geometric,
            WeightFamily::B(r) => r * ln.ln() + x / ln.powf(*r),
            WeightFamily::BTilde(it) => {
                if !it.active(n) {
                    return None;
                }
                let h = h_s(it.s, x)?;
                h.ln() + x / h
            }
            WeightFamily::Custom(_) => return None,
        };
        v.is_finite().then_some(v)
    }

    pub(crate) fn checked_log_weight(&self, k: u64) -> Result<f64> {
        let lw = self.log_weight(k);
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::FamilyDomain {
                family: self.name(),
                k,
                value: lw,
            });
        }
        Ok(lw)
    }
}

fn fmt_real(r: f64) -> String {
    format!("{r}")
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Cesaro => write!(f, "Cesaro"),
            WeightFamily::C(r) => write!(f, "C({})", fmt_real(*r)),
            WeightFamily::A(r) => write!(f, "A({})", fmt_real(*r)),
            WeightFamily::B(r) => write!(f, "B({})", fmt_real(*r)),
            WeightFamily::BTilde(it) => write!(f, "Btilde({})", it.s),
            WeightFamily::Custom(c) => write!(f, "{}", c.name),
        }
    }
}

fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let err = || Error::Parse(format!("not a number: {s:?}"));
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| err())?;
            let d: f64 = d.trim().parse().map_err(|_| err())?;
            n / d
        }
        None => s.parse().map_err(|_| err())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err())
    }
}

/// Accepts `cesaro`, `C:r`, `A:r`, `B:r`, `Btilde:s` (case-insensitive), with
/// the colon optional (`B2`, `C-1`) and `r` allowed as a fraction (`A:1/2`).
impl FromStr for WeightFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if lower == "cesaro" || lower == "c0" || lower == "c:0" {
            return Ok(WeightFamily::Cesaro);
        }
        let (head, rest) = if let Some(rest) = lower.strip_prefix("btilde") {
            ("btilde", rest)
        } else if let Some(rest) = lower.strip_prefix(['a', 'b', 'c']) {
            (&lower[..1], rest)
        } else {
            return Err(Error::Parse(format!("unknown weight family {t:?}")));
        };
        let arg = rest.strip_prefix(':').unwrap_or(rest);
        let arg = arg
            .strip_prefix('(')
            .and_then(|a| a.strip_suffix(')'))
            .unwrap_or(arg);
        if arg.is_empty() {
            return Err(Error::Parse(format!(
                "weight family {t:?} is missing its parameter"
            )));
        }
        match head {
            "btilde" => {
                let s: u32 = arg.parse().map_err(|_| {
                    Error::Parse(format!("Btilde needs an integer depth, got {arg:?}"))
                })?;
                WeightFamily::iterated_log(s)
            }
            "a" => WeightFamily::exponential(parse_real(arg)?),
            "b" => WeightFamily::subexponential(parse_real(arg)?),
            _ => WeightFamily::polynomial(parse_real(arg)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names() {
        assert!(matches!(
            "cesaro".parse::<WeightFamily>(),
            Ok(WeightFamily::Cesaro)
        ));
        assert!(matches!("B2".parse::<WeightFamily>(), Ok(WeightFamily::B(r)) if r == 2.0));
        assert!(matches!("B:0.5".parse::<WeightFamily>(), Ok(WeightFamily::B(r)) if r == 0.5));
        assert!(matches!("C:-1".parse::<WeightFamily>(), Ok(WeightFamily::C(r)) if r == -1.0));
        assert!(matches!("A:1/2".parse::<WeightFamily>(), Ok(WeightFamily::A(r)) if r == 0.5));
        assert!(
            matches!("Btilde:3".parse::<WeightFamily>(), Ok(WeightFamily::BTilde(it)) if it.depth() == 3)
        );
        assert!("C:-2".parse::<WeightFamily>().is_err());
        assert!("A:2".parse::<WeightFamily>().is_err());
        assert!("Btilde:1".parse::<WeightFamily>().is_err());
        assert!("Z:1".parse::<WeightFamily>().is_err());
        assert!("B".parse::<WeightFamily>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for name in ["Cesaro", "C(-1)", "C(2)", "A(0.5)", "B(2)", "Btilde(2)"] {
            let fam: WeightFamily = name.parse().unwrap();
            assert_eq!(fam.to_string(), name);
        }
    }

    #[test]
    fn b_special_cases_first_weight() {
        let b = WeightFamily::B(2.0);
        assert_eq!(b.log_weight(1), 0.0);
        let k = 1000f64;
        assert!((b.log_weight(1000) - k / k.ln().powi(2)).abs() < 1e-12);
        assert_eq!(b.exact_weight(1), Some(Ratio::from_integer(1)));
        assert_eq!(b.exact_weight(2), None);
    }

    #[test]
    fn btilde_thresholds() {
        // h_2(5) = ln 5 · ln ln 5 ≈ 0.763, h_2(6) ≈ 1.04
        let t2 = IteratedLog::new(2).unwrap();
        assert_eq!(t2.threshold(), Some(6));
        let t3 = IteratedLog::new(3).unwrap().threshold().unwrap();
        assert!(h_s(3, t3 as f64).unwrap() >= 1.0);
        assert!(h_s(3, (t3 - 1) as f64).is_none_or(|h| h < 1.0));
        assert_eq!(IteratedLog::new(5).unwrap().threshold(), None);
        let fam = WeightFamily::iterated_log(2).unwrap();
        assert_eq!(fam.log_weight(5), 0.0);
        assert!(fam.log_weight(6) > 0.0);
    }

    #[test]
    fn exact_weights_match_logs() {
        let c2 = WeightFamily::C(2.0);
        assert_eq!(c2.exact_weight(7), Some(Ratio::from_integer(49)));
        let cm1 = WeightFamily::C(-1.0);
        assert_eq!(cm1.exact_weight(4), Some(Ratio::new(1, 4)));
        assert!((cm1.log_weight(4) - 0.25f64.ln()).abs() < 1e-15);
        assert_eq!(WeightFamily::A(0.5).exact_weight(3), None);
    }

    #[test]
    fn custom_family_non_finite_is_reported() {
        let fam = WeightFamily::custom("bad", |k| if k == 3 { f64::NAN } else { 0.0 });
        assert!(fam.checked_log_weight(2).is_ok());
        assert!(matches!(
            fam.checked_log_weight(3),
            Err(Error::FamilyDomain { k: 3, .. })
        ));
    }
}
