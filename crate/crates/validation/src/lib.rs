//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

use std::fmt::Display;
use std::io::Write;

/// Writes `criterion <id>: PASS|FAIL <detail>` straight to stderr, so the
/// line shows up even when the test harness captures output.
pub fn report(id: &str, pass: bool, detail: impl Display) -> bool {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id}: {status} {detail}");
    pass
}

/// `count` roughly geometric integers in `[lo, hi]`, deduplicated.
pub fn geometric_samples(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let (l, h) = (lo as f64, hi as f64);
    let mut v: Vec<u64> = (0..count)
        .map(|i| (l * (h / l).powf(i as f64 / (count - 1) as f64)).round() as u64)
        .map(|x| x.clamp(lo, hi))
        .collect();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_span_the_range() {
        let s = geometric_samples(64, 1_000_000, 64);
        assert_eq!(s.len(), 64);
        assert_eq!((s[0], s[63]), (64, 1_000_000));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }
}
