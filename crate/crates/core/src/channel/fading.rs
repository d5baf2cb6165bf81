use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::dsp::{fft, ifft};
use crate::{seed, Error, Result, SAMPLE_RATE_HZ};

/// Above this many non-zero spectral lines the process is synthesized with
/// an FFT instead of a direct sum.
const DIRECT_SUM_MAX_LINES: usize = 96;

/// Complex Gaussian tap gain with a Gaussian Doppler spectrum whose two-sigma
/// width is `spread_hz`, unit mean power in expectation.
///
/// The spectrum is sampled on a grid at least four times finer than sigma,
/// so slow fading is represented even when `length` is short. Spread 0 gives
/// a constant unit-magnitude gain with a seeded phase.
pub fn fading_process(spread_hz: f64, length: usize, seed: u64) -> Result<Vec<Complex64>> {
    if !(spread_hz >= 0.0) || !spread_hz.is_finite() {
        return Err(Error::param(
            "spread_hz",
            format!("{spread_hz} must be finite and non-negative"),
        ));
    }
    if length == 0 {
        return Err(Error::param("length", "must be positive"));
    }
    let mut rng = seed::rng(seed);
    if spread_hz == 0.0 {
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        return Ok(vec![Complex64::from_polar(1.0, phase); length]);
    }
    let sigma = spread_hz / 2.0;
    let fs = SAMPLE_RATE_HZ;
    let n_fine = (4.0 * fs / sigma).ceil() as usize;
    let n = length.max(n_fine);
    let df = fs / n as f64;
    // Lines within ±5 sigma, clipped to the Nyquist band.
    let half = ((5.0 * sigma / df).ceil() as usize).min((n - 1) / 2);
    let lines: Vec<i64> = (-(half as i64)..=half as i64).collect();
    let weights: Vec<f64> = lines
        .iter()
        .map(|&k| {
            let f = k as f64 * df;
            (-0.5 * (f / sigma).powi(2)).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let amps: Vec<Complex64> = weights
        .iter()
        .map(|&w| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * (w / total / 2.0).sqrt()
        })
        .collect();

    if lines.len() <= DIRECT_SUM_MAX_LINES {
        let mut g = vec![Complex64::new(0.0, 0.0); length];
        const RESYNC: usize = 4096;
        for (&k, &a) in lines.iter().zip(&amps) {
            let w = std::f64::consts::TAU * k as f64 / n as f64;
            let rot = Complex64::from_polar(1.0, w);
            for (block, chunk) in g.chunks_mut(RESYNC).enumerate() {
                let mut z = a * Complex64::from_polar(1.0, w * (block * RESYNC) as f64);
                for v in chunk {
                    *v += z;
                    z *= rot;
                }
            }
        }
        Ok(g)
    } else {
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        for (&k, &a) in lines.iter().zip(&amps) {
            spec[k.rem_euclid(n as i64) as usize] = a * n as f64;
        }
        ifft(&mut spec);
        spec.truncate(length);
        Ok(spec)
    }
}

/// Periodogram-based two-sigma spread estimate of a gain sequence: twice the
/// RMS frequency of its power spectrum.
pub fn measured_spread_hz(g: &[Complex64]) -> f64 {
    let n = g.len();
    let mut spec = g.to_vec();
    fft(&mut spec);
    let mut p_sum = 0.0;
    let mut m2 = 0.0;
    for (k, v) in spec.iter().enumerate() {
        let f = crate::dsp::bin_freq(k, n, SAMPLE_RATE_HZ);
        let p = v.norm_sqr();
        p_sum += p;
        m2 += p * f * f;
    }
    2.0 * (m2 / p_sum).sqrt()
}
