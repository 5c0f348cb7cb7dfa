//! Byte-stable formatting for CSV artifacts.

use crate::error::CoreError;

/// Shortest round-trip decimal representation (≤ 17 significant digits),
/// in exponent form so every magnitude formats the same way. Identical
/// config + identical build must produce byte-identical artifacts, so all
/// float output funnels through here.
pub fn fmt_f64(x: f64) -> Result<String, CoreError> {
    if !x.is_finite() {
        return Err(CoreError::NonFinite { stage: "csv-format".into() });
    }
    Ok(format!("{x:e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for &x in &[0.0, 1.0, -3.5e-12, 6.3369e13, std::f64::consts::PI, f64::MIN_POSITIVE] {
            let s = fmt_f64(x).unwrap();
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(fmt_f64(f64::NAN).is_err());
        assert!(fmt_f64(f64::INFINITY).is_err());
    }
}
