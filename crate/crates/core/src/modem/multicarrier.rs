//! Parallel DBPSK carriers (MT63).

use num_complex::Complex64;
use rand::Rng as _;

use super::{symbol_starts, IqWaveform};
use crate::{seed, Error, Result, SAMPLE_RATE_HZ};

/// `bits` are spread row by row over the carriers, one row per symbol; a one
/// bit reverses the carrier phase. The last row is zero padded. Each carrier
/// starts at a phase drawn from `seed`.
pub fn multicarrier_mod(bits: &[u8], carriers: usize, baud: f64, bandwidth_hz: f64, seed: u64) -> Result<IqWaveform> {
    if bits.is_empty() {
        return Err(Error::param("bits", "empty"));
    }
    if carriers == 0 || !(baud > 0.0) || !(bandwidth_hz > 0.0) {
        return Err(Error::param("carriers", "need carriers, positive baud and bandwidth"));
    }
    let spacing = bandwidth_hz / carriers as f64;
    let mut rng = seed::rng(seed);
    let phase0: Vec<f64> = (0..carriers)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let step: Vec<Complex64> = (0..carriers)
        .map(|c| {
            let f = (c as f64 - (carriers as f64 - 1.0) / 2.0) * spacing;
            Complex64::from_polar(1.0, std::f64::consts::TAU * f / SAMPLE_RATE_HZ)
        })
        .collect();

    let n_sym = bits.len().div_ceil(carriers);
    let starts = symbol_starts(n_sym, baud);
    let mut samples = vec![Complex64::new(0.0, 0.0); *starts.last().unwrap()];
    let mut sign = vec![1.0f64; carriers];
    let scale = 1.0 / (carriers as f64).sqrt();
    for c in 0..carriers {
        let mut osc = Complex64::from_polar(scale, phase0[c]);
        for k in 0..n_sym {
            let bit = bits.get(k * carriers + c).copied().unwrap_or(0);
            let prev = sign[c];
            if bit == 1 {
                sign[c] = -prev;
            }
            let next = sign[c];
            let len = starts[k + 1] - starts[k];
            for i in 0..len {
                let w = 0.5 - 0.5 * (std::f64::consts::PI * (i + 1) as f64 / len as f64).cos();
                let a = prev * (1.0 - w) + next * w;
                samples[starts[k] + i] += osc * a;
                osc *= step[c];
            }
            // Keep the recursive oscillator on the circle.
            osc *= scale / osc.norm();
        }
    }
    Ok(IqWaveform::new(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_and_power() {
        let bits: Vec<u8> = (0..64 * 10).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let w = multicarrier_mod(&bits, 64, 10.0, 1000.0, 4).unwrap();
        assert_eq!(w.len(), 10 * 600);
        let p = crate::dsp::mean_power(&w.samples);
        assert!(p > 0.3 && p < 2.0, "{p}");
    }

    #[test]
    fn seed_changes_phases() {
        let bits = vec![0u8; 64];
        let a = multicarrier_mod(&bits, 64, 10.0, 1000.0, 1).unwrap();
        let b = multicarrier_mod(&bits, 64, 10.0, 1000.0, 2).unwrap();
        assert_ne!(a.samples, b.samples);
    }
}
