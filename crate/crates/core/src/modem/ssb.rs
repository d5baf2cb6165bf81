//! Single sideband from real audio via an FFT analytic-signal filter.

use num_complex::Complex64;

use super::IqWaveform;
use crate::dsp::{band_gain, fft, ifft};
use crate::{Error, Result, SAMPLE_RATE_HZ};

pub const SSB_LOW_HZ: f64 = 300.0;
pub const SSB_HIGH_HZ: f64 = 2700.0;
const SSB_TAPER_HZ: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sideband {
    Upper,
    Lower,
}

/// Keeps the 300-2700 Hz positive-frequency part of `audio` (doubled, so a
/// tone of amplitude `a` becomes a phasor of magnitude `a`). The lower
/// sideband is the complex conjugate of the upper.
pub fn ssb_mod(audio: &[f64], sideband: Sideband) -> Result<IqWaveform> {
    if audio.is_empty() || audio.iter().all(|&a| a == 0.0) {
        return Err(Error::ZeroPower);
    }
    if audio.iter().any(|a| !a.is_finite()) {
        return Err(Error::param("audio", "non-finite sample"));
    }
    let n = audio.len();
    let mut buf: Vec<Complex64> = audio.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    fft(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = k as f64 * SAMPLE_RATE_HZ / n as f64;
        let g = if 2 * k < n {
            2.0 * band_gain(f, SSB_LOW_HZ, SSB_HIGH_HZ, SSB_TAPER_HZ)
        } else {
            0.0
        };
        *v *= g;
    }
    ifft(&mut buf);
    if buf.iter().all(|s| s.norm_sqr() == 0.0) {
        return Err(Error::ZeroPower);
    }
    if sideband == Sideband::Lower {
        buf.iter_mut().for_each(|s| *s = s.conj());
    }
    Ok(IqWaveform::new(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_is_conjugate_of_upper() {
        let a: Vec<f64> = (0..1000)
            .map(|i| (i as f64 * 0.9).sin() + (i as f64 * 0.31).cos())
            .collect();
        let u = ssb_mod(&a, Sideband::Upper).unwrap();
        let l = ssb_mod(&a, Sideband::Lower).unwrap();
        assert!(u
            .samples
            .iter()
            .zip(&l.samples)
            .all(|(u, l)| (u.conj() - l).norm() < 1e-12));
    }

    #[test]
    fn silence_rejected() {
        assert!(matches!(ssb_mod(&[0.0; 100], Sideband::Upper), Err(Error::ZeroPower)));
    }
}
