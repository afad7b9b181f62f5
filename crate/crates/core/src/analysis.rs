//! Scaling observables extracted from time series: relaxation times,
//! log-log and Gaussian fits, revival periods and window averages.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Range of the untransformed abscissa actually used.
    pub window: (f64, f64),
}

impl FitResult {
    /// `τ = -1/slope` of a `ln T_r` vs `ln Δ` fit.
    pub fn tau(&self) -> f64 {
        -1.0 / self.slope
    }

    /// `δ = -slope` of a `ln value` vs `T_r²` fit.
    pub fn delta(&self) -> f64 {
        -self.slope
    }
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64], window: (f64, f64)) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: n });
    }
    for (&a, &b) in x.iter().zip(y) {
        ensure_finite("x", a)?;
        ensure_finite("y", b)?;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= f64::EPSILON * nf * mx.abs().max(1.0) {
        return Err(invalid("x", "abscissa has no spread"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(FitResult {
        slope,
        intercept,
        r_squared: r_squared.clamp(0.0, 1.0),
        n_points: n,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationTime {
    pub index: usize,
    pub t_r: f64,
    /// Unsmoothed series value at `t_r`.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationPoint {
    /// Gap variable `Δ = |J_e - J_o|`.
    pub delta: f64,
    pub t_r: f64,
    pub value_at_tr: f64,
}

impl RelaxationPoint {
    pub fn new(delta: f64, relaxation: &RelaxationTime) -> Self {
        Self {
            delta,
            t_r: relaxation.t_r,
            value_at_tr: relaxation.value,
        }
    }
}

fn check_series(times: &[f64], values: &[f64], needed: usize) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: values.len(),
        });
    }
    if times.len() < needed {
        return Err(Error::InsufficientPoints {
            needed,
            got: times.len(),
        });
    }
    for (&t, &v) in times.iter().zip(values) {
        ensure_finite("t", t)?;
        ensure_finite("value", v)?;
    }
    Ok(())
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if dt <= 0.0 {
        return Err(invalid("times", "must be strictly increasing"));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(invalid("times", format!("grid is not uniform at index {i}")));
        }
    }
    Ok(dt)
}

/// Centered moving average; windows are truncated at the edges.
pub fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return values.to_vec();
    }
    let (before, after) = ((width - 1) / 2, width / 2);
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after).min(values.len() - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Index of the first strict local minimum (a plateau counts at its first
/// sample) after the first sample.
fn first_local_minimum(s: &[f64]) -> Option<usize> {
    let n = s.len();
    let mut i = 1;
    while i + 1 < n {
        if s[i] < s[i - 1] {
            let mut j = i;
            while j + 1 < n && s[j + 1] == s[i] {
                j += 1;
            }
            if j + 1 < n && s[j + 1] > s[i] {
                return Some(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    None
}

/// Time of the first local minimum after `t = 0`.
///
/// `smoothing` is the moving-average width applied before the search
/// (1 = none).
pub fn find_relaxation_time(times: &[f64], values: &[f64], smoothing: usize) -> Result<RelaxationTime> {
    check_series(times, values, 5)?;
    check_uniform(times)?;
    let smoothed = moving_average(values, smoothing.max(1));
    let index = first_local_minimum(&smoothed).ok_or(Error::NoMinimumFound)?;
    Ok(RelaxationTime {
        index,
        t_r: times[index],
        value: values[index],
    })
}

fn in_window(x: f64, window: Option<(f64, f64)>) -> bool {
    window.map_or(true, |(lo, hi)| x >= lo - 1e-12 && x <= hi + 1e-12)
}

/// Fit of `ln T_r` against `ln Δ`, optionally restricted to `Δ` in `window`.
pub fn fit_power_law(points: &[RelaxationPoint], window: Option<(f64, f64)>) -> Result<FitResult> {
    let mut selected: Vec<&RelaxationPoint> = points.iter().filter(|p| in_window(p.delta, window)).collect();
    selected.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    for p in &selected {
        if !(p.delta > 0.0 && p.t_r > 0.0) {
            return Err(invalid("points", format!("need Δ > 0 and T_r > 0, got ({}, {})", p.delta, p.t_r)));
        }
    }
    let x: Vec<f64> = selected.iter().map(|p| p.delta.ln()).collect();
    let y: Vec<f64> = selected.iter().map(|p| p.t_r.ln()).collect();
    let range = bounds(selected.iter().map(|p| p.delta));
    linear_fit(&x, &y, range)
}

/// Fit of `ln value` against `T_r²`, optionally restricted to `T_r` in `window`.
pub fn fit_gaussian_decay(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<FitResult> {
    let selected: Vec<(f64, f64)> = points.iter().copied().filter(|p| in_window(p.0, window)).collect();
    for &(t, v) in &selected {
        if !(v > 0.0 && v <= 1.0 + 1e-12) {
            return Err(invalid("points", format!("value must lie in (0, 1], got {v} at T_r = {t}")));
        }
    }
    let x: Vec<f64> = selected.iter().map(|p| p.0 * p.0).collect();
    let y: Vec<f64> = selected.iter().map(|p| p.1.ln()).collect();
    let range = bounds(selected.iter().map(|p| p.0));
    linear_fit(&x, &y, range)
}

fn bounds(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

const ZERO_PAD: usize = 16;

/// Dominant period of the segment with `t >= tail_start`.
///
/// The mean-subtracted, Hann-windowed tail is zero padded and transformed;
/// the period comes from the highest spectral peak refined by a parabola
/// through the log magnitudes of the three surrounding bins. Peaks slower
/// than two cycles per tail are ignored.
pub fn revival_period(times: &[f64], values: &[f64], tail_start: f64) -> Result<f64> {
    check_series(times, values, 5)?;
    let dt = check_uniform(times)?;
    let start = times.iter().position(|&t| t >= tail_start - 1e-9 * dt).unwrap_or(times.len());
    let tail = &values[start..];
    if tail.len() < 8 {
        return Err(Error::InsufficientPoints {
            needed: 8,
            got: tail.len(),
        });
    }
    let n = tail.len();
    let mean = tail.iter().sum::<f64>() / n as f64;
    let variance = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if variance < 1e-12 {
        return Err(Error::NoOscillation { variance });
    }

    let len = n * ZERO_PAD;
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); len];
    for (i, v) in tail.iter().enumerate() {
        let hann = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
        buf[i] = Complex::new((v - mean) * hann, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    let mags: Vec<f64> = buf[..len / 2].iter().map(|z| z.norm()).collect();
    let first = (2 * ZERO_PAD).min(mags.len().saturating_sub(2)).max(1);
    let peak = (first..mags.len() - 1)
        .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
        .ok_or(Error::NoOscillation { variance })?;
    let (a, b, c) = (mags[peak - 1].ln(), mags[peak].ln(), mags[peak + 1].ln());
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 0.0 && denom.is_finite() {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let freq = (peak as f64 + shift) / (len as f64 * dt);
    Ok(1.0 / freq)
}

/// Mean of the samples with `t_min <= t <= t_max`.
pub fn window_average(times: &[f64], values: &[f64], t_min: f64, t_max: f64) -> Result<f64> {
    check_series(times, values, 1)?;
    ensure_finite("t_min", t_min)?;
    ensure_finite("t_max", t_max)?;
    if t_min > t_max {
        return Err(invalid("window", format!("t_min {t_min} exceeds t_max {t_max}")));
    }
    let eps = 1e-9 * (t_max - t_min).abs().max(1.0);
    let picked: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= t_min - eps && t <= t_max + eps)
        .map(|(_, &v)| v)
        .collect();
    if picked.is_empty() {
        return Err(Error::EmptyWindow { t_min, t_max });
    }
    Ok(picked.iter().sum::<f64>() / picked.len() as f64)
}

/// Uniform grid `t_min, t_min + dt, ...` up to `t_max` inclusive (within
/// half a step).
pub fn time_grid(t_min: f64, t_max: f64, dt: f64) -> Result<Vec<f64>> {
    ensure_finite("t_min", t_min)?;
    ensure_finite("t_max", t_max)?;
    ensure_finite("dt", dt)?;
    if dt <= 0.0 || t_max < t_min {
        return Err(invalid("time grid", format!("need dt > 0 and t_max >= t_min, got [{t_min}, {t_max}] step {dt}")));
    }
    let steps = ((t_max - t_min) / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| t_min + i as f64 * dt).collect())
}
