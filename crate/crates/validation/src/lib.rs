// SPDX-License-Identifier: Apache-2.0

//! Diagnostics over recorded observable traces, shared by the acceptance
//! suite in `tests/acceptance.rs`.

/// Abscissa of the steepest rise of `values(times)`, by central
/// differences on the recorded grid.
pub fn steepest_rise(times: &[f64], values: &[f64]) -> Option<f64> {
    if times.len() < 3 || times.len() != values.len() {
        return None;
    }
    let mut best = (f64::NEG_INFINITY, times[1]);
    for i in 1..times.len() - 1 {
        let slope = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
        if slope > best.0 {
            best = (slope, times[i]);
        }
    }
    Some(best.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailStats {
    /// `max - min` over the window.
    pub range: f64,
    /// Difference between the means of the window's second and first halves.
    pub mean_shift: f64,
    pub samples: usize,
}

/// Statistics of `values` over the last `fraction` of the time span.
pub fn tail_stats(times: &[f64], values: &[f64], fraction: f64) -> Option<TailStats> {
    let (&t0, &t1) = (times.first()?, times.last()?);
    let cut = t1 - fraction * (t1 - t0);
    let tail: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= cut)
        .map(|(_, v)| *v)
        .collect();
    if tail.len() < 2 {
        return None;
    }
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (first, second) = tail.split_at(tail.len() / 2);
    Some(TailStats {
        range: hi - lo,
        mean_shift: mean(second) - mean(first),
        samples: tail.len(),
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
