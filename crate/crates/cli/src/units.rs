// SPDX-License-Identifier: Apache-2.0

//! Human-readable frequencies for reports.

/// Formats `hz` with the largest of GHz, MHz, kHz, Hz that keeps the
/// mantissa at or above 1, with at most six significant decimals and no
/// trailing zeros: `20000.0` becomes `"20 kHz"`.
pub fn format_frequency(hz: f64) -> String {
    if !hz.is_finite() {
        return format!("{hz} Hz");
    }
    let (scale, unit) = [(1e9, "GHz"), (1e6, "MHz"), (1e3, "kHz")]
        .into_iter()
        .find(|(s, _)| hz.abs() >= *s)
        .unwrap_or((1.0, "Hz"));
    format!("{} {unit}", trim(hz / scale))
}

/// Formats a time in seconds as s, ms, us or ns.
pub fn format_duration(seconds: f64) -> String {
    if !seconds.is_finite() {
        return format!("{seconds} s");
    }
    let (scale, unit) = [(1.0, "s"), (1e-3, "ms"), (1e-6, "us")]
        .into_iter()
        .find(|(s, _)| seconds.abs() >= *s)
        .unwrap_or((1e-9, "ns"));
    format!("{} {unit}", trim(seconds / scale))
}

fn trim(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
