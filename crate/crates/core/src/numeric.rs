//! Small floating-point helpers shared across modules.

/// Values this close to an integer are treated as that integer before
/// flooring or rounding, so `0.7 * 1080.0` floors to 756 and not 755.
const SNAP_TOLERANCE: f64 = 1e-9;

pub(crate) fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOLERANCE * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

pub(crate) fn snapped_floor(x: f64) -> f64 {
    snap(x).floor()
}

pub(crate) fn snapped_round(x: f64) -> f64 {
    snap(x).round()
}

/// Number of pairs among `m` items.
pub(crate) fn choose2(m: u64) -> u64 {
    if m < 2 {
        0
    } else {
        m * (m - 1) / 2
    }
}

/// Formats a real with 12 significant digits, using the shortest decimal
/// representation of the rounded value and always keeping a fractional part.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let mut s = format!("{rounded}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Rounds a real to 12 significant digits (the CSV precision).
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}
