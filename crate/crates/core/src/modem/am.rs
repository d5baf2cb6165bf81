//! Double-sideband full-carrier AM.

use num_complex::Complex64;

use super::IqWaveform;
use crate::{Error, Result};

pub const AM_DEPTH_RANGE: (f64, f64) = (0.3, 0.9);
/// Audio bandwidth applied to AM sources before modulation. Both sidebands
/// together then stay inside 3 kHz.
pub const AM_AUDIO_HIGH_HZ: f64 = 1500.0;
/// Width of the raised-cosine roll-off below [`AM_AUDIO_HIGH_HZ`].
pub const AM_AUDIO_ROLLOFF_HZ: f64 = 500.0;

/// `x[n] = 1 + depth * audio[n]`; `audio` must have peak magnitude ≤ 1.
pub fn am_mod(audio: &[f64], depth: f64) -> Result<IqWaveform> {
    let (lo, hi) = AM_DEPTH_RANGE;
    if !(lo..=hi).contains(&depth) {
        return Err(Error::param("depth", format!("{depth} outside [{lo}, {hi}]")));
    }
    if audio.is_empty() {
        return Err(Error::param("audio", "empty"));
    }
    if audio.iter().any(|a| !a.is_finite() || a.abs() > 1.0 + 1e-9) {
        return Err(Error::param("audio", "must be finite with peak magnitude at most 1"));
    }
    Ok(IqWaveform::new(
        audio.iter().map(|&a| Complex64::new(1.0 + depth * a, 0.0)).collect(),
    ))
}
