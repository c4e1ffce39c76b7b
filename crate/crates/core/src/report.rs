//! Shared helpers for serialized reports.

use serde::Serializer;

/// Rounds to 9 decimal places, the precision used in every report.
pub fn round9(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    // Avoid printing "-0".
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// `serialize_with` adapter writing an `f64` rounded to 9 decimals.
pub fn r9<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round9(*x))
}

/// `serialize_with` adapter for a sequence of `f64`.
pub fn r9_seq<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| round9(x)))
}
