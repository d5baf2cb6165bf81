//! Radiofax: FM line scan of a black-and-white image.

use super::image::BinaryImage;
use super::{CpfskSynth, IqWaveform};
use crate::{Error, Result, SAMPLE_RATE_HZ};

/// Baseband deviation: black at `-FAX_DEVIATION_HZ`, white at `+`.
pub const FAX_DEVIATION_HZ: f64 = 400.0;
pub const FAX_LPM: f64 = 120.0;
/// Length of the Hann smoothing applied to the frequency track. Without it
/// the pixel-rate keying spreads the spectrum past 3 kHz.
pub const FAX_VIDEO_TAPS: usize = 13;

pub fn samples_per_line(lpm: f64) -> usize {
    (SAMPLE_RATE_HZ * 60.0 / lpm).round() as usize
}

/// Scans rows top to bottom, left to right, one line every `60/lpm` seconds.
pub fn fax_mod(image: &BinaryImage, lpm: f64) -> Result<IqWaveform> {
    if !(lpm > 0.0) {
        return Err(Error::param("lpm", "must be positive"));
    }
    let spl = samples_per_line(lpm);
    if spl == 0 {
        return Err(Error::param("lpm", "line shorter than one sample"));
    }
    let w = image.width();
    let mut track = Vec::with_capacity(spl * image.height());
    for y in 0..image.height() {
        let row = image.row(y);
        track.extend((0..spl).map(|i| {
            if row[i * w / spl] {
                FAX_DEVIATION_HZ
            } else {
                -FAX_DEVIATION_HZ
            }
        }));
    }
    let taps: Vec<f64> = (0..FAX_VIDEO_TAPS)
        .map(|k| 0.5 - 0.5 * (std::f64::consts::TAU * (k + 1) as f64 / (FAX_VIDEO_TAPS + 1) as f64).cos())
        .collect();
    let norm: f64 = taps.iter().sum();
    let half = FAX_VIDEO_TAPS / 2;
    let last = track.len().saturating_sub(1);
    let mut synth = CpfskSynth::new();
    let samples = (0..track.len())
        .map(|n| {
            let f: f64 = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * track[(n + k).saturating_sub(half).min(last)])
                .sum();
            synth.next(f / norm)
        })
        .collect();
    Ok(IqWaveform::new(samples))
}
