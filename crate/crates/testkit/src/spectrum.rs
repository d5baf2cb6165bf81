use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::FS;

/// Analysis length used for every spectral assertion.
pub const NFFT: usize = 1 << 15;

/// Power spectrum at `NFFT` points in natural FFT order. Longer inputs are
/// split into non-overlapping Hann-windowed segments and averaged; shorter
/// ones are Hann-windowed and zero padded.
pub fn power_spectrum(x: &[Complex64]) -> Vec<f64> {
    power_spectrum_n(x, NFFT)
}

pub fn power_spectrum_n(x: &[Complex64], nfft: usize) -> Vec<f64> {
    assert!(!x.is_empty());
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let seg = x.len().min(nfft);
    let n_seg = (x.len() / seg).max(1);
    let hann: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * (i as f64 + 0.5) / seg as f64).cos())
        .collect();
    let mut acc = vec![0.0; nfft];
    for s in 0..n_seg {
        let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
        for i in 0..seg {
            buf[i] = x[s * seg + i] * hann[i];
        }
        fft.process(&mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v.norm_sqr();
        }
    }
    acc
}

/// Signed frequency of bin `k` of an `n`-point FFT at [`FS`].
pub fn bin_freq(k: usize, n: usize) -> f64 {
    let k = if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    };
    k * FS / n as f64
}

pub fn bin_width(n: usize) -> f64 {
    FS / n as f64
}

/// Frequency of the strongest bin.
pub fn peak_freq(spec: &[f64]) -> f64 {
    let k = spec
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap();
    bin_freq(k, spec.len())
}

/// (frequency, power) pairs sorted by frequency from -fs/2 upwards.
pub fn sorted_bins(spec: &[f64]) -> Vec<(f64, f64)> {
    let n = spec.len();
    let mut v: Vec<(f64, f64)> = spec.iter().enumerate().map(|(k, &p)| (bin_freq(k, n), p)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Width between the frequencies below and above which `(1 - fraction)/2`
/// of the power lies each.
pub fn occupied_bandwidth(spec: &[f64], fraction: f64) -> f64 {
    let bins = sorted_bins(spec);
    let total: f64 = bins.iter().map(|b| b.1).sum();
    let tail = total * (1.0 - fraction) / 2.0;
    let mut acc = 0.0;
    let mut lo = bins[0].0;
    for &(f, p) in &bins {
        acc += p;
        if acc >= tail {
            lo = f;
            break;
        }
    }
    acc = 0.0;
    let mut hi = bins[bins.len() - 1].0;
    for &(f, p) in bins.iter().rev() {
        acc += p;
        if acc >= tail {
            hi = f;
            break;
        }
    }
    hi - lo + bin_width(spec.len())
}

/// Power in `[lo_hz, hi_hz]`.
pub fn band_power(spec: &[f64], lo_hz: f64, hi_hz: f64) -> f64 {
    let n = spec.len();
    spec.iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = bin_freq(*k, n);
            f >= lo_hz && f <= hi_hz
        })
        .map(|(_, p)| p)
        .sum()
}

/// Spectrum of a real signal (as complex with zero imaginary part).
pub fn real_power_spectrum(x: &[f64]) -> Vec<f64> {
    let c: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    power_spectrum(&c)
}

/// Local maxima that exceed `rel_threshold` times the global maximum.
pub fn peaks(spec: &[f64], rel_threshold: f64) -> Vec<f64> {
    let n = spec.len();
    let max = spec.iter().cloned().fold(0.0, f64::max);
    (0..n)
        .filter(|&k| {
            let p = spec[k];
            p >= rel_threshold * max && p >= spec[(k + n - 1) % n] && p > spec[(k + 1) % n]
        })
        .map(|k| bin_freq(k, n))
        .collect()
}
