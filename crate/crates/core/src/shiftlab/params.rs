use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Rational = Ratio<i128>;

/// Syndetic partition of `ℕ` into the classes `A_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Partition {
    /// `u ∈ A_p` iff `v₂(u) = p - 1`; consecutive members of `A_p` differ by `2^p`.
    #[default]
    TwoAdic,
}

impl Partition {
    pub fn class_of(self, u: u64) -> u32 {
        match self {
            Partition::TwoAdic => 1 + u.trailing_zeros(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Partition::TwoAdic => "2adic",
        }
    }
}

/// Parameters `(a, ε, b, partition)` of the weighted-shift construction, with
/// `b_p = max(8p, ⌈e^{2p} p^K⌉)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftParameters {
    pub a: u64,
    pub eps: Rational,
    /// `K` in `b_p`.
    pub b_exponent: u32,
    pub partition: Partition,
}

impl Default for ShiftParameters {
    fn default() -> Self {
        ShiftParameters {
            a: 12,
            eps: Ratio::new(1, 20),
            b_exponent: 4,
            partition: Partition::TwoAdic,
        }
    }
}

impl fmt::Display for ShiftParameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a = {}, eps = {}, {}, partition {}",
            self.a,
            self.eps,
            self.b_formula(),
            self.partition.name()
        )
    }
}

impl ShiftParameters {
    pub fn new(a: u64, eps: Rational, b_exponent: u32) -> Result<Self> {
        let p = ShiftParameters {
            a,
            eps,
            b_exponent,
            partition: Partition::TwoAdic,
        };
        p.check_range()?;
        Ok(p)
    }

    pub(crate) fn check_range(&self) -> Result<()> {
        if self.a < 2 {
            return Err(Error::InvalidParameters(format!(
                "a must be >= 2, got {}",
                self.a
            )));
        }
        if !self.eps.is_positive() || self.eps >= Ratio::new(1, 8) {
            return Err(Error::InvalidParameters(format!(
                "eps must lie in (0, 1/8), got {}",
                self.eps
            )));
        }
        Ok(())
    }

    pub fn b_formula(&self) -> String {
        format!("max(8p, ceil(e^{{2p}} p^{}))", self.b_exponent)
    }

    /// `ln b_p`.
    pub fn ln_b(&self, p: u32) -> f64 {
        let p = p as f64;
        (8.0 * p)
            .ln()
            .max(2.0 * p + self.b_exponent as f64 * p.ln())
    }

    /// `b_p`, when it fits comfortably in a `u128`.
    pub fn b(&self, p: u32) -> Option<u128> {
        if p == 0 || self.ln_b(p) > 120.0 * std::f64::consts::LN_2 {
            return None;
        }
        let x = (2.0 * p as f64).exp() * (p as f64).powi(self.b_exponent as i32);
        Some((8 * p as u128).max(x.ceil() as u128))
    }

    /// `b_p` as `u64`, or `None` beyond `2^62`.
    pub fn b_u64(&self, p: u32) -> Option<u64> {
        self.b(p).filter(|&b| b <= 1 << 62).map(|b| b as u64)
    }

    pub fn partition_of(&self, u: u64) -> u32 {
        self.partition.class_of(u)
    }

    /// `M(p) = ⌊2^{p/2}⌋`, for `p < 128`.
    pub fn m_bound(p: u32) -> u64 {
        (1u128 << p).isqrt() as u64
    }

    /// `ε = c / d` in lowest terms, as `(c, d)`.
    pub fn eps_parts(&self) -> (i128, i128) {
        (*self.eps.numer(), *self.eps.denom())
    }

    /// `a^u` when it fits.
    pub fn a_pow(&self, u: u32) -> Option<i128> {
        (self.a as i128).checked_pow(u)
    }

    /// `I_u^{λε} = [(1 - λε) a^u, (1 + λε) a^u]`.
    pub fn interval(&self, u: u32, lambda: i128) -> Option<(Rational, Rational)> {
        let au = Ratio::from_integer(self.a_pow(u)?);
        let w = self.eps * lambda;
        Some(((Rational::one() - w) * au, (Rational::one() + w) * au))
    }

    /// `(4q+1)(2q+1) e^{2q} / b_q`.
    pub fn condition_summand(&self, q: u32) -> f64 {
        let poly = (4.0 * q as f64 + 1.0) * (2.0 * q as f64 + 1.0);
        match self.b(q) {
            Some(b) if q <= 30 => poly * (2.0 * q as f64).exp() / b as f64,
            // e^{2q} q^K dwarfs both 8q and the rounding up
            _ => poly / (q as f64).powi(self.b_exponent as i32),
        }
    }
}

/// Decimal string to an exact rational (`"0.05"` → `1/20`).
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    let err = || Error::Parse(format!("not a decimal number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| err())?;
        let d: i128 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(Ratio::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    if frac.len() > 30 {
        return Err(err());
    }
    let digits = format!("{int}{frac}");
    let numer: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| err())?
    };
    let r = Ratio::new(numer, 10i128.pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}

/// Exact decimal expansion of a rational when it terminates.
pub fn format_rational(r: &Rational) -> String {
    let (n, d) = (*r.numer(), *r.denom());
    let mut rest = d;
    let mut digits = 0u32;
    for base in [2, 5] {
        while rest % base == 0 {
            rest /= base;
        }
    }
    if rest != 1 {
        return format!("{n}/{d}");
    }
    while 10i128.pow(digits) % d != 0 {
        digits += 1;
    }
    if digits == 0 {
        return n.to_string();
    }
    let scaled = n * (10i128.pow(digits) / d);
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.abs();
    let pow = 10i128.pow(digits);
    format!(
        "{sign}{}.{:0width$}",
        abs / pow,
        abs % pow,
        width = digits as usize
    )
}

/// On-disk parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamFile {
    pub a: u64,
    /// Kept as the literal decimal so `0.05` is read as exactly `1/20`.
    #[serde(with = "decimal")]
    pub eps: Rational,
    pub b_formula: String,
    pub partition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

mod decimal {
    use super::{format_rational, parse_decimal, Rational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        let text = format_rational(r);
        match text.parse::<f64>() {
            Ok(v) if !text.contains('/') => s.serialize_f64(v),
            _ => s.serialize_str(&text),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            // shortest round-trip form, so 0.05 comes back as "0.05"
            Raw::Num(v) => format!("{v}"),
            Raw::Text(t) => t,
        };
        parse_decimal(&text).map_err(de::Error::custom)
    }
}

fn parse_b_exponent(formula: &str) -> Result<u32> {
    let compact: String = formula.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix("max(8p,ceil(e^{2p}p^")
        .and_then(|r| r.strip_suffix("))"))
        .ok_or_else(|| Error::Parse(format!("unsupported b_formula {formula:?}")))?;
    let inner = inner
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .unwrap_or(inner);
    inner
        .parse()
        .map_err(|_| Error::Parse(format!("unsupported b_formula exponent in {formula:?}")))
}

impl ParamFile {
    pub fn from_params(p: &ShiftParameters, horizon: Option<u64>) -> Self {
        ParamFile {
            a: p.a,
            eps: p.eps,
            b_formula: p.b_formula(),
            partition: p.partition.name().to_string(),
            horizon,
        }
    }

    pub fn to_params(&self) -> Result<ShiftParameters> {
        if !self.partition.trim().eq_ignore_ascii_case("2adic") {
            return Err(Error::Parse(format!(
                "unsupported partition {:?}",
                self.partition
            )));
        }
        ShiftParameters::new(self.a, self.eps, parse_b_exponent(&self.b_formula)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter files always serialize")
    }
}

/// One audited property of a parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParameterAudit {
    pub checks: Vec<ParamCheck>,
}

impl ParameterAudit {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&ParamCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Largest `u` used by the exact interval checks.
pub const AUDIT_U_MAX: u32 = 12;
const SUMMAND_Q_MAX: u32 = 1000;
const PARTITION_CHECK_U: u64 = 1 << 14;

/// Audits every structural requirement on the parameters up to `u_max`.
pub fn audit_parameters(params: &ShiftParameters, u_max: u32) -> ParameterAudit {
    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String| {
        checks.push(ParamCheck {
            name,
            passed,
            detail,
        })
    };

    let range = params.check_range();
    push(
        "range",
        range.is_ok(),
        range
            .err()
            .map_or_else(|| "a >= 2 and 0 < eps < 1/8".into(), |e| e.to_string()),
    );
    let (c, d) = params.eps_parts();
    let a = params.a as i128;

    let growth = (d - c) * a > d + c;
    push(
        "growth",
        growth,
        format!(
            "(1 - eps) a / (1 + eps) = {:.6}",
            ((d - c) * a) as f64 / (d + c) as f64
        ),
    );

    let inclusion = 2 * c * a >= d + 2 * c;
    push(
        "difference inclusion",
        inclusion,
        format!(
            "2 eps a = {} vs 1 + 2 eps = {}",
            format_rational(&(params.eps * 2 * a)),
            format_rational(&(params.eps * 2 + 1))
        ),
    );

    push_interval_checks(params, u_max, &mut push);
    push_union_density(params, u_max, &mut push);

    let mut b_ok = true;
    let mut b_detail = format!("b_1 = {:?}, b_2 = {:?}", params.b(1), params.b(2));
    let mut prev = 0u128;
    for p in 1..=40 {
        match params.b(p) {
            Some(b) if b >= 8 * p as u128 && b > prev => prev = b,
            Some(b) => {
                b_ok = false;
                b_detail = format!("b_{p} = {b} is below 8p or not increasing");
                break;
            }
            None => break,
        }
    }
    push("b_p >= 8p", b_ok, b_detail);

    let bad_q =
        (1..=SUMMAND_Q_MAX).find(|&q| params.condition_summand(q) > 15.0 / (q as f64 * q as f64));
    push(
        "summable tail",
        bad_q.is_none(),
        match bad_q {
            None => format!("(4q+1)(2q+1)e^(2q)/b_q <= 15/q^2 for q <= {SUMMAND_Q_MAX}"),
            Some(q) => format!(
                "summand at q = {q} is {:.3e} > 15/q^2",
                params.condition_summand(q)
            ),
        },
    );

    let mut last = [0u64; 8];
    let mut part_ok = true;
    for u in 1..=PARTITION_CHECK_U {
        let p = params.partition_of(u) as usize;
        if p < last.len() {
            if last[p] != 0 && u - last[p] != 1 << p {
                part_ok = false;
            }
            last[p] = u;
        }
    }
    push(
        "syndetic partition",
        part_ok,
        format!("gaps within A_p equal 2^p for p <= 7, u <= {PARTITION_CHECK_U}"),
    );

    ParameterAudit { checks }
}

fn push_interval_checks(
    params: &ShiftParameters,
    u_max: u32,
    push: &mut impl FnMut(&'static str, bool, String),
) {
    let mut failure = None;
    'outer: for u in 2..=u_max {
        for v in 1..u {
            let (Some((lu2, hu2)), Some((lv2, hv2)), Some((lu4, hu4))) = (
                params.interval(u, 2),
                params.interval(v, 2),
                params.interval(u, 4),
            ) else {
                failure = Some(format!("a^{u} overflows"));
                break 'outer;
            };
            if hv2 >= lu2 {
                failure = Some(format!("I_{u}^(2eps) meets I_{v}^(2eps)"));
                break 'outer;
            }
            if lu2 - hv2 < lu4 || hu2 - lv2 > hu4 {
                failure = Some(format!(
                    "I_{u}^(2eps) - I_{v}^(2eps) is not inside I_{u}^(4eps)"
                ));
                break 'outer;
            }
        }
    }
    push(
        "interval lemma",
        failure.is_none(),
        failure.unwrap_or_else(|| format!("exact check for v < u <= {u_max}")),
    );
}

/// Share of `[0, (1+4ε)a^u]` covered by `∪_{w ≤ u} I_w^{4ε}`, maximised over `u`.
pub fn union_density_proxy(params: &ShiftParameters, u_max: u32) -> Option<Rational> {
    let mut covered = Rational::zero();
    let mut worst = Rational::zero();
    for u in 1..=u_max {
        let (lo, hi) = params.interval(u, 4)?;
        covered += hi - lo;
        worst = worst.max(covered / hi);
    }
    Some(worst)
}

fn push_union_density(
    params: &ShiftParameters,
    u_max: u32,
    push: &mut impl FnMut(&'static str, bool, String),
) {
    match union_density_proxy(params, u_max) {
        Some(r) => push(
            "union upper density",
            r < Rational::one(),
            format!("proxy {:.6}", ratio_f64(&r)),
        ),
        None => push("union upper density", false, format!("a^{u_max} overflows")),
    }
}

pub(crate) fn ratio_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Candidate space for [`derive_parameters`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBounds {
    /// Tried before the grid.
    pub preferred: Option<ShiftParameters>,
    pub a_min: u64,
    pub a_max: u64,
    pub eps: Vec<Rational>,
    pub b_exponent: u32,
    pub u_max: u32,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            preferred: Some(ShiftParameters::default()),
            a_min: 2,
            a_max: 64,
            eps: [(1, 20), (1, 16), (1, 10), (1, 40), (1, 100)]
                .iter()
                .map(|&(n, d)| Ratio::new(n, d))
                .collect(),
            b_exponent: 4,
            u_max: AUDIT_U_MAX,
        }
    }
}

/// The first candidate passing every audit check.
pub fn derive_parameters(bounds: &SearchBounds) -> Result<ShiftParameters> {
    let grid = bounds.eps.iter().flat_map(|&eps| {
        (bounds.a_min..=bounds.a_max).map(move |a| ShiftParameters {
            a,
            eps,
            b_exponent: bounds.b_exponent,
            partition: Partition::TwoAdic,
        })
    });
    let mut first_failure = None;
    for cand in bounds.preferred.clone().into_iter().chain(grid) {
        let audit = audit_parameters(&cand, bounds.u_max);
        match audit.first_failure() {
            None => return Ok(cand),
            Some(f) => {
                first_failure
                    .get_or_insert_with(|| format!("{cand}: {} failed ({})", f.name, f.detail));
            }
        }
    }
    Err(Error::InvalidParameters(
        first_failure.unwrap_or_else(|| "no candidates in search bounds".into()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_values() {
        let p = ShiftParameters::default();
        assert_eq!(p.b(1), Some(8));
        assert_eq!(p.b(2), Some(874));
        assert_eq!(p.b(3), Some(32678));
        assert_eq!(ShiftParameters::m_bound(1), 1);
        assert_eq!(ShiftParameters::m_bound(2), 2);
        assert_eq!(ShiftParameters::m_bound(3), 2);
        assert_eq!(ShiftParameters::m_bound(5), 5);
    }

    #[test]
    fn defaults_pass_audit() {
        let audit = audit_parameters(&ShiftParameters::default(), AUDIT_U_MAX);
        assert!(audit.passed(), "{:?}", audit.first_failure());
        assert_eq!(
            derive_parameters(&SearchBounds::default()).unwrap(),
            ShiftParameters::default()
        );
    }

    #[test]
    fn narrow_eps_is_rejected() {
        let p = ShiftParameters {
            a: 20,
            eps: Ratio::new(1, 100),
            ..ShiftParameters::default()
        };
        let audit = audit_parameters(&p, AUDIT_U_MAX);
        assert_eq!(audit.first_failure().unwrap().name, "difference inclusion");
        let bounds = SearchBounds {
            preferred: None,
            a_min: 20,
            a_max: 20,
            eps: vec![Ratio::new(1, 100)],
            ..SearchBounds::default()
        };
        let err = derive_parameters(&bounds).unwrap_err();
        assert!(err.to_string().contains("difference inclusion"), "{err}");
    }

    #[test]
    fn weak_b_is_rejected() {
        let p = ShiftParameters {
            b_exponent: 3,
            ..ShiftParameters::default()
        };
        assert_eq!(
            audit_parameters(&p, AUDIT_U_MAX)
                .first_failure()
                .unwrap()
                .name,
            "summable tail"
        );
    }

    #[test]
    fn decimals_round_trip() {
        assert_eq!(parse_decimal("0.05").unwrap(), Ratio::new(1, 20));
        assert_eq!(parse_decimal("1/16").unwrap(), Ratio::new(1, 16));
        assert_eq!(parse_decimal("-2.5").unwrap(), Ratio::new(-5, 2));
        assert!(parse_decimal("1e-3").is_err());
        assert_eq!(format_rational(&Ratio::new(1, 20)), "0.05");
        assert_eq!(format_rational(&Ratio::new(-7, 4)), "-1.75");
        assert_eq!(format_rational(&Ratio::new(1, 3)), "1/3");
        assert_eq!(format_rational(&Ratio::from_integer(3)), "3");
    }

    #[test]
    fn param_file_round_trip() {
        let text = r#"{"a": 12, "eps": 0.05, "b_formula": "max(8p, ceil(e^{2p} p^4))", "partition": "2adic", "horizon": 10000000}"#;
        let file = ParamFile::from_json(text).unwrap();
        assert_eq!(file.to_params().unwrap(), ShiftParameters::default());
        assert_eq!(file.horizon, Some(10_000_000));
        let again = ParamFile::from_json(&file.to_json()).unwrap();
        assert_eq!(again, file);
        let bad = text.replace("2adic", "3adic");
        assert!(ParamFile::from_json(&bad).unwrap().to_params().is_err());
        let k5 = text.replace("p^4", "p^5");
        assert_eq!(
            ParamFile::from_json(&k5)
                .unwrap()
                .to_params()
                .unwrap()
                .b_exponent,
            5
        );
    }
}
