//! Self-documenting check records shared by every report in the toolkit.
//!
//! Each numeric claim carries its observed value, its expected value and the
//! tolerance it was held to, so a report can be audited without re-running
//! anything.

use serde::{Deserialize, Serialize};

/// One verified claim: `pass` holds iff `|value - expected| <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Builds a check comparing `value` against `expected` within `tolerance`.
    pub fn within(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let diff = (value - expected).abs();
        Check {
            name: name.into(),
            value,
            expected,
            tolerance,
            pass: diff <= tolerance && diff.is_finite(),
        }
    }

    /// Builds a check for an exact boolean condition, encoded as 1.0 / 0.0.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            expected: 1.0,
            tolerance: 0.0,
            pass: ok,
        }
    }
}

/// True iff every check in the slice passed.
pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn within_respects_tolerance() {
        assert!(Check::within("x", 1.0 + 5e-11, 1.0, 1e-10).pass);
        assert!(!Check::within("x", 1.0 + 2e-10, 1.0, 1e-10).pass);
        assert!(!Check::within("x", f64::NAN, 1.0, 1e-10).pass);
    }

    #[test]
    fn flag_encodes_booleans() {
        assert!(Check::flag("ok", true).pass);
        let failed = Check::flag("bad", false);
        assert!(!failed.pass);
        assert_eq!(failed.value, 0.0);
    }
}
