//! Small FFT-based helpers shared by the modulators and the channel model.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward FFT, unscaled.
pub fn fft(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// In-place inverse FFT scaled by `1/N`.
pub fn ifft(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Signed frequency of FFT bin `k` for an `n`-point transform at `fs`.
pub fn bin_freq(k: usize, n: usize, fs: f64) -> f64 {
    let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    k * fs / n as f64
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Scales `x` to unit mean power.
pub fn normalize_power(x: &mut [Complex64]) -> Result<()> {
    let p = mean_power(x);
    if p <= 0.0 || !p.is_finite() {
        return Err(Error::ZeroPower);
    }
    let g = 1.0 / p.sqrt();
    for v in x.iter_mut() {
        *v *= g;
    }
    Ok(())
}

/// Gain of a band-pass mask with raised-cosine skirts of width `taper` that
/// reach full gain at `lo + taper` and `hi - taper` and zero at `lo`, `hi`.
pub(crate) fn band_gain(f: f64, lo: f64, hi: f64, taper: f64) -> f64 {
    if f <= lo || f >= hi {
        0.0
    } else if taper > 0.0 && f < lo + taper {
        0.5 - 0.5 * (std::f64::consts::PI * (f - lo) / taper).cos()
    } else if taper > 0.0 && f > hi - taper {
        0.5 - 0.5 * (std::f64::consts::PI * (hi - f) / taper).cos()
    } else {
        1.0
    }
}

/// Zero-phase band-pass of a real signal; the pass band is `[lo_hz, hi_hz]` on
/// the absolute frequency axis. A `lo_hz` below zero keeps DC.
pub fn band_limit(x: &[f64], lo_hz: f64, hi_hz: f64, taper_hz: f64, fs: f64) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = bin_freq(k, n, fs).abs();
        *v *= band_gain(f, lo_hz, hi_hz, taper_hz);
    }
    ifft(&mut buf);
    buf.into_iter().map(|v| v.re).collect()
}

/// Zero-phase low-pass of a real signal: unity gain up to
/// `cutoff_hz - taper_hz`, raised-cosine roll-off to zero at `cutoff_hz`.
pub fn low_pass(x: &[f64], cutoff_hz: f64, taper_hz: f64, fs: f64) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = bin_freq(k, n, fs).abs();
        let knee = cutoff_hz - taper_hz;
        *v *= if f <= knee {
            1.0
        } else if f >= cutoff_hz {
            0.0
        } else {
            0.5 + 0.5 * (std::f64::consts::PI * (f - knee) / taper_hz).cos()
        };
    }
    ifft(&mut buf);
    buf.into_iter().map(|v| v.re).collect()
}

pub fn peak_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
