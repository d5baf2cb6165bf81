//! Audio sources for the analog modes: synthetic speech-like and music-like
//! signals, and loading of user-supplied PCM/WAV files.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::dsp::{band_limit, fft, ifft, peak_abs};
use crate::{seed, Error, Result, SAMPLE_RATE_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AudioKind {
    Speech,
    Music,
}

/// Upper edge of synthetic audio content.
pub const AUDIO_HIGH_HZ: f64 = 2700.0;
const AUDIO_TAPER_HZ: f64 = 100.0;

/// Two-pole resonator.
struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn step(&mut self, x: f64, freq: f64, bw: f64) -> f64 {
        let r = (-std::f64::consts::PI * bw / SAMPLE_RATE_HZ).exp();
        let theta = std::f64::consts::TAU * freq / SAMPLE_RATE_HZ;
        // Unity gain at the resonance peak, roughly.
        let g = 1.0 - r;
        let y = g * x + 2.0 * r * theta.cos() * self.y1 - r * r * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Deterministic synthetic audio, band-limited below 2.7 kHz and scaled to
/// peak magnitude 1. Length is `round(duration * 6000)` samples.
pub fn synth_audio(kind: AudioKind, duration: f64, seed: u64) -> Result<Vec<f64>> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::param("duration", format!("{duration} must be positive")));
    }
    let n = ((duration * SAMPLE_RATE_HZ).round() as usize).max(1);
    let mut rng = seed::rng(seed);
    let raw = match kind {
        AudioKind::Speech => speech(&mut rng, n),
        AudioKind::Music => music(&mut rng, n),
    };
    let lo = if kind == AudioKind::Speech { 100.0 } else { 50.0 };
    let mut out = band_limit(&raw, lo, AUDIO_HIGH_HZ - AUDIO_TAPER_HZ, AUDIO_TAPER_HZ, SAMPLE_RATE_HZ);
    let peak = peak_abs(&out);
    if peak > 0.0 {
        out.iter_mut().for_each(|x| *x /= peak);
    }
    Ok(out)
}

/// Phrases of 2-6 voiced or fricative syllables separated by pauses of
/// 150-450 ms. A phrase lasts at most 1.8 s, so every 3 s stretch holds a
/// whole pause.
fn speech(rng: &mut seed::Rng, n: usize) -> Vec<f64> {
    let fs = SAMPLE_RATE_HZ;
    let mut out = vec![0.0; n];
    let f0_base = rng.random_range(85.0..230.0);
    let mut res = [
        Resonator { y1: 0.0, y2: 0.0 },
        Resonator { y1: 0.0, y2: 0.0 },
        Resonator { y1: 0.0, y2: 0.0 },
    ];
    let bws = [90.0, 120.0, 170.0];
    let mut formants = [500.0, 1500.0, 2400.0];
    let mut i = 0usize;
    let mut pitch_phase = 0.0;
    let mut t = 0.0f64;
    // Optionally start mid-pause so pauses do not always follow the start.
    if rng.random_bool(0.5) {
        i = (rng.random_range(0.0..0.3) * fs) as usize;
    }
    while i < n {
        let syllables = rng.random_range(2..=6);
        for _ in 0..syllables {
            let len = (rng.random_range(0.12..0.3) * fs) as usize;
            let voiced = rng.random_bool(0.85);
            let target = [
                rng.random_range(300.0..850.0),
                rng.random_range(850.0..2200.0),
                rng.random_range(2200.0..2600.0),
            ];
            let start = formants;
            let loudness = rng.random_range(0.4..1.0);
            let vib_rate = rng.random_range(2.0..6.0);
            for j in 0..len {
                if i + j >= n {
                    break;
                }
                let u = j as f64 / len as f64;
                let glide = (u / 0.3).min(1.0);
                for k in 0..3 {
                    formants[k] = start[k] + (target[k] - start[k]) * glide;
                }
                let env = loudness * (std::f64::consts::PI * u).sin().powf(0.6);
                let excitation = if voiced {
                    let f0 = f0_base * (1.0 + 0.12 * (std::f64::consts::TAU * vib_rate * t).sin() - 0.1 * u);
                    pitch_phase += f0 / fs;
                    if pitch_phase >= 1.0 {
                        pitch_phase -= 1.0;
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let g: f64 = StandardNormal.sample(rng);
                    0.15 * g
                };
                let mut y = excitation * env * 20.0;
                for k in 0..3 {
                    y = res[k].step(y, formants[k], bws[k]);
                }
                out[i + j] = y;
                t += 1.0 / fs;
            }
            i += len;
        }
        let pause = (rng.random_range(0.15..0.45) * fs) as usize;
        // Let the filters ring out inside the pause, then silence.
        for j in 0..pause.min(n.saturating_sub(i)) {
            let mut y = 0.0;
            for k in 0..3 {
                y = res[k].step(y, formants[k], bws[k]);
            }
            out[i + j] = y;
        }
        i += pause;
        t += pause as f64 / fs;
    }
    out
}

/// Notes of a pentatonic scale with decaying harmonic spectra, slow tremolo,
/// and low-passed noise bursts on note onsets.
fn music(rng: &mut seed::Rng, n: usize) -> Vec<f64> {
    let fs = SAMPLE_RATE_HZ;
    let mut out = vec![0.0; n];
    let root = rng.random_range(98.0..262.0);
    let scale = [0.0, 2.0, 4.0, 7.0, 9.0, 12.0, 14.0, 16.0, 19.0];
    let tempo = rng.random_range(0.15..0.6);
    let rolloff = rng.random_range(0.9..1.8);
    let decay = rng.random_range(0.2..1.0);
    let trem_rate = rng.random_range(0.3..3.0);
    let noise_level = rng.random_range(0.02..0.15);
    let mut onset = 0usize;
    while onset < n {
        let len = (tempo * fs * rng.random_range(0.5..2.0)) as usize + 1;
        let voices = rng.random_range(1..=3);
        for _ in 0..voices {
            let semis = scale[rng.random_range(0..scale.len())];
            let f = root * 2f64.powf(semis / 12.0);
            let harmonics: Vec<(f64, f64, f64)> = (1..=12)
                .map(|h| {
                    (
                        f * h as f64,
                        rng.random_range(0.3..1.0) / (h as f64).powf(rolloff),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    )
                })
                .filter(|&(fh, _, _)| fh < AUDIO_HIGH_HZ)
                .collect();
            let ring = (len as f64 * 1.5) as usize;
            for j in 0..ring.min(n - onset) {
                let tt = j as f64 / fs;
                let env = (tt / 0.01).min(1.0) * (-tt / decay).exp();
                let s: f64 = harmonics
                    .iter()
                    .map(|&(fh, a, ph)| a * (std::f64::consts::TAU * fh * tt + ph).sin())
                    .sum();
                out[onset + j] += env * s;
            }
        }
        // Percussive noise burst.
        let mut lp = 0.0;
        let alpha = rng.random_range(0.1..0.6);
        for j in 0..((0.08 * fs) as usize).min(n - onset) {
            let g: f64 = StandardNormal.sample(rng);
            lp += alpha * (g - lp);
            out[onset + j] += noise_level * lp * (-(j as f64) / (0.02 * fs)).exp();
        }
        onset += len;
    }
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    for (j, x) in out.iter_mut().enumerate() {
        *x *= 1.0 + 0.3 * (std::f64::consts::TAU * trem_rate * j as f64 / fs + phase).sin();
    }
    out
}

/// Band-limited resampling by zero-padding or truncating the spectrum.
pub fn resample(x: &[f64], from_hz: f64, to_hz: f64) -> Result<Vec<f64>> {
    if !(from_hz > 0.0) || !(to_hz > 0.0) {
        return Err(Error::param("sample_rate", "must be positive"));
    }
    if x.is_empty() || from_hz == to_hz {
        return Ok(x.to_vec());
    }
    let n = x.len();
    let m = ((n as f64 * to_hz / from_hz).round() as usize).max(1);
    let mut spec: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut spec);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let half = n.min(m) / 2;
    for k in 0..half {
        out[k] = spec[k];
        if k > 0 {
            out[m - k] = spec[n - k];
        }
    }
    ifft(&mut out);
    let scale = m as f64 / n as f64;
    Ok(out.iter().map(|c| c.re * scale).collect())
}

/// Loads mono 16-bit PCM audio. `.wav` files are parsed for their sample
/// rate; anything else is raw little-endian samples at 6 kHz. Output is
/// resampled to 6 kHz and scaled to peak magnitude 1.
pub fn load_audio(path: &Path) -> Result<Vec<f64>> {
    let data = std::fs::read(path).map_err(|e| Error::file(path, e))?;
    let is_wav = path.extension().map(|e| e.eq_ignore_ascii_case("wav")).unwrap_or(false);
    let (samples, rate) = if is_wav {
        parse_wav(&data)?
    } else {
        (parse_pcm16(&data, 0)?, SAMPLE_RATE_HZ)
    };
    let mut out = resample(&samples, rate, SAMPLE_RATE_HZ)?;
    let peak = peak_abs(&out);
    if peak == 0.0 {
        return Err(Error::ZeroPower);
    }
    out.iter_mut().for_each(|x| *x /= peak);
    Ok(out)
}

fn parse_pcm16(data: &[u8], base: usize) -> Result<Vec<f64>> {
    if data.len() % 2 != 0 {
        return Err(Error::format(
            (base + data.len()) as u64,
            "odd byte count in 16-bit PCM",
        ));
    }
    Ok(data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
        .collect())
}

/// Minimal RIFF/WAVE reader for mono 16-bit PCM.
pub fn parse_wav(data: &[u8]) -> Result<(Vec<f64>, f64)> {
    if data.len() < 12 || &data[0..4] != b"RIFF" || &data[8..12] != b"WAVE" {
        return Err(Error::format(0, "not a RIFF/WAVE file"));
    }
    let mut pos = 12usize;
    let mut rate = None;
    while pos + 8 <= data.len() {
        let id = &data[pos..pos + 4];
        let len = u32::from_le_bytes(data[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body = pos + 8;
        if body + len > data.len() {
            return Err(Error::format(pos as u64, "chunk runs past end of file"));
        }
        match id {
            b"fmt " => {
                if len < 16 {
                    return Err(Error::format(pos as u64, "short fmt chunk"));
                }
                let f = &data[body..body + 16];
                let format = u16::from_le_bytes([f[0], f[1]]);
                let channels = u16::from_le_bytes([f[2], f[3]]);
                let sr = u32::from_le_bytes([f[4], f[5], f[6], f[7]]);
                let bits = u16::from_le_bytes([f[14], f[15]]);
                if format != 1 || channels != 1 || bits != 16 {
                    return Err(Error::format(
                        body as u64,
                        format!("need mono 16-bit PCM, got format {format}, {channels} channels, {bits} bits"),
                    ));
                }
                rate = Some(sr as f64);
            }
            b"data" => {
                let rate = rate.ok_or_else(|| Error::format(pos as u64, "data chunk before fmt chunk"))?;
                return Ok((parse_pcm16(&data[body..body + len], body)?, rate));
            }
            _ => {}
        }
        pos = body + len + (len & 1);
    }
    Err(Error::format(pos as u64, "no data chunk"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_normalized() {
        for kind in [AudioKind::Speech, AudioKind::Music] {
            let a = synth_audio(kind, 1.0, 3).unwrap();
            assert_eq!(a, synth_audio(kind, 1.0, 3).unwrap());
            assert_ne!(a, synth_audio(kind, 1.0, 4).unwrap());
            assert_eq!(a.len(), 6000);
            assert!((peak_abs(&a) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_preserves_tone() {
        let x: Vec<f64> = (0..8000)
            .map(|i| (std::f64::consts::TAU * 500.0 * i as f64 / 8000.0).sin())
            .collect();
        let y = resample(&x, 8000.0, 6000.0).unwrap();
        assert_eq!(y.len(), 6000);
        for (i, v) in y.iter().enumerate().step_by(97) {
            let want = (std::f64::consts::TAU * 500.0 * i as f64 / 6000.0).sin();
            assert!((v - want).abs() < 1e-9);
        }
    }

    #[test]
    fn wav_round_trip() {
        let samples: Vec<i16> = vec![0, 1000, -1000, 32767];
        let mut data = b"RIFF\0\0\0\0WAVEfmt ".to_vec();
        data.extend(16u32.to_le_bytes());
        data.extend(1u16.to_le_bytes());
        data.extend(1u16.to_le_bytes());
        data.extend(6000u32.to_le_bytes());
        data.extend(12000u32.to_le_bytes());
        data.extend(2u16.to_le_bytes());
        data.extend(16u16.to_le_bytes());
        data.extend(b"data");
        data.extend(8u32.to_le_bytes());
        for s in &samples {
            data.extend(s.to_le_bytes());
        }
        let (x, rate) = parse_wav(&data).unwrap();
        assert_eq!(rate, 6000.0);
        assert_eq!(x.len(), 4);
        assert!((x[3] - 32767.0 / 32768.0).abs() < 1e-12);
        assert!(matches!(parse_wav(&data[..40]), Err(Error::Format { .. })));
    }
}
