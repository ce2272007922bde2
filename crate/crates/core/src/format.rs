//! Number formatting for printed results: 12 significant digits.

/// Rounds to 12 significant digits; `-0.0` becomes `0.0`.
pub fn round_sig12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// [`round_sig12`] rendered the way JSON output renders numbers.
pub fn sig12(v: f64) -> String {
    let r = round_sig12(v);
    if r.is_finite() {
        serde_json::to_string(&r).expect("finite float serializes")
    } else {
        r.to_string()
    }
}
