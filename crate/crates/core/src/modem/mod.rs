//! Complex-baseband synthesis of the 18 transmission modes at 6 kHz. Every
//! mode is centred on 0 Hz; carrier displacement belongs to the channel.

mod am;
mod audio;
mod fax;
mod fsk;
mod image;
mod mfsk;
mod mode;
mod multicarrier;
mod ook;
mod psk;
mod ssb;

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng as _;

pub use am::{am_mod, AM_AUDIO_HIGH_HZ, AM_AUDIO_ROLLOFF_HZ, AM_DEPTH_RANGE};
pub use audio::{load_audio, parse_wav, resample, synth_audio, AudioKind, AUDIO_HIGH_HZ};
pub use fax::{fax_mod, samples_per_line, FAX_DEVIATION_HZ, FAX_LPM};
pub use fsk::{frame_async, frame_sync, fsk_mod, KeyedBit};
pub use image::{load_pbm, parse_pbm, procedural_chart, BinaryImage, ChartKind, CHART_PAGE_ROWS, FAX_LINE_PIXELS};
pub use mfsk::{ifk_tones, mfsk_mod, tone_offset_hz};
pub use mode::{Family, ModeId, ModeSpec, DOMINOEX11_BAUD, MODE_COUNT};
pub use multicarrier::multicarrier_mod;
pub use ook::{ook_envelope, ook_mod, OOK_EDGE_MS};
pub use psk::{
    psk_mod, psk_mod_steps, psk_phase_steps, qpsk31_encode, samples_per_symbol, Constellation, QPSK31_STEP_MAP,
};
pub use ssb::{ssb_mod, Sideband, SSB_HIGH_HZ, SSB_LOW_HZ};

use crate::dsp::{low_pass, normalize_power, peak_abs};
use crate::encoding::{random_payload_from, Payload, PayloadOptions};
use crate::{seed, Error, Result, SAMPLE_RATE_HZ};

/// Complex baseband samples at [`SAMPLE_RATE_HZ`].
#[derive(Debug, Clone, PartialEq)]
pub struct IqWaveform {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl IqWaveform {
    pub fn new(samples: Vec<Complex64>) -> Self {
        IqWaveform {
            samples,
            sample_rate_hz: SAMPLE_RATE_HZ,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn mean_power(&self) -> f64 {
        crate::dsp::mean_power(&self.samples)
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
    }

    /// Scales to unit mean power; fails on silence.
    pub fn normalized(mut self) -> Result<Self> {
        normalize_power(&mut self.samples)?;
        Ok(self)
    }
}

/// Sample index at which each of `n` symbols starts, plus the end of the
/// last one. Symbol `k` starts at `round(k * fs / baud)`, so fractional
/// symbol lengths do not accumulate drift.
pub(crate) fn symbol_starts(n: usize, baud: f64) -> Vec<usize> {
    let sps = SAMPLE_RATE_HZ / baud;
    (0..=n).map(|k| (k as f64 * sps).round() as usize).collect()
}

/// Phase accumulator for continuous-phase FM.
pub(crate) struct CpfskSynth {
    phase: f64,
}

impl CpfskSynth {
    pub(crate) fn new() -> Self {
        CpfskSynth { phase: 0.0 }
    }

    /// Current sample, then advance by `freq_hz` for one sample period.
    pub(crate) fn next(&mut self, freq_hz: f64) -> Complex64 {
        let s = Complex64::from_polar(1.0, self.phase);
        self.phase = (self.phase + std::f64::consts::TAU * freq_hz / SAMPLE_RATE_HZ).rem_euclid(std::f64::consts::TAU);
        s
    }
}

/// Shortest waveform [`Modulator::modulate`] accepts, in seconds.
pub const MIN_DURATION_S: f64 = 0.5;

/// Source material and settings for waveform synthesis.
#[derive(Debug, Clone)]
pub struct Modulator {
    pub payload: PayloadOptions,
    /// Probability that an analog source is speech rather than music.
    pub speech_fraction: f64,
    /// User-supplied audio at 6 kHz, peak 1.
    pub audio_clips: Vec<Arc<Vec<f64>>>,
    /// User-supplied fax images.
    pub fax_images: Vec<Arc<BinaryImage>>,
    /// Probability of drawing a user-supplied source when any are loaded.
    pub ingested_fraction: f64,
    pub am_depth: (f64, f64),
}

impl Default for Modulator {
    fn default() -> Self {
        Modulator {
            payload: PayloadOptions::default(),
            speech_fraction: 0.5,
            audio_clips: Vec::new(),
            fax_images: Vec::new(),
            ingested_fraction: 0.5,
            am_depth: AM_DEPTH_RANGE,
        }
    }
}

/// Synthesizes `duration` seconds of `mode` with default sources.
pub fn modulate(mode: &ModeSpec, duration: f64, seed: u64) -> Result<IqWaveform> {
    Modulator::default().modulate(mode, duration, seed)
}

impl Modulator {
    /// Deterministic in `(mode, duration, seed)` and the loaded sources.
    /// Output has exactly `round(duration * 6000)` samples and unit power.
    pub fn modulate(&self, mode: &ModeSpec, duration: f64, seed: u64) -> Result<IqWaveform> {
        if !(duration >= MIN_DURATION_S) || !duration.is_finite() {
            return Err(Error::param(
                "duration",
                format!("{duration} s is shorter than the {MIN_DURATION_S} s minimum"),
            ));
        }
        let n = (duration * SAMPLE_RATE_HZ).round() as usize;
        let mod_seed = seed::derive(seed, seed::stream::MODULATOR);
        let mut rng = seed::rng(mod_seed);
        let payload = || random_payload_from(&self.payload, mode, duration, seed::derive(seed, seed::stream::PAYLOAD));
        let baud = || mode.baud.expect("digital mode has a baud rate");

        let mut w = match mode.family {
            Family::Ook => match payload()? {
                Payload::Keying { envelope, .. } => ook_mod(&envelope, OOK_EDGE_MS)?,
                _ => unreachable!(),
            },
            Family::Psk | Family::Qpsk => {
                let Payload::Bits(bits) = payload()? else {
                    unreachable!()
                };
                let c = if mode.family == Family::Psk {
                    Constellation::Bpsk
                } else {
                    Constellation::Qpsk
                };
                psk_mod(&bits, baud(), c)?
            }
            Family::Fsk => {
                let Payload::Symbols(codes) = payload()? else {
                    unreachable!()
                };
                let train = if mode.mode_id == ModeId::Navtex {
                    frame_sync(&codes.symbols, 7)
                } else {
                    frame_async(&codes.symbols, 5, 1.5)
                };
                fsk_mod(&train, baud(), mode.shift_hz.expect("FSK shift"))?
            }
            Family::Mfsk => {
                let Payload::Symbols(s) = payload()? else {
                    unreachable!()
                };
                mfsk_mod(
                    &s,
                    baud(),
                    mode.tones.expect("MFSK tones"),
                    mode.tone_spacing_hz.expect("MFSK spacing"),
                    mode.ifk,
                )?
            }
            Family::Multicarrier => {
                let Payload::Bits(bits) = payload()? else {
                    unreachable!()
                };
                let carriers = mode.carriers.expect("carrier count");
                let bw = mode.tone_spacing_hz.expect("carrier spacing") * carriers as f64;
                multicarrier_mod(&bits, carriers, baud(), bw, rng.random())?
            }
            Family::SsbUsb | Family::SsbLsb => {
                let audio = self.audio(&mut rng, n)?;
                let sb = if mode.family == Family::SsbUsb {
                    Sideband::Upper
                } else {
                    Sideband::Lower
                };
                ssb_mod(&audio, sb)?
            }
            Family::Am => {
                let raw = self.audio(&mut rng, n)?;
                let mut audio = low_pass(&raw, AM_AUDIO_HIGH_HZ, AM_AUDIO_ROLLOFF_HZ, SAMPLE_RATE_HZ);
                let peak = peak_abs(&audio);
                if peak > 0.0 {
                    audio.iter_mut().for_each(|x| *x /= peak);
                }
                let (lo, hi) = self.am_depth;
                let depth = if hi > lo { rng.random_range(lo..=hi) } else { lo };
                am_mod(&audio, depth)?
            }
            Family::Fax => self.fax(&mut rng, n)?,
        };
        w.samples.resize(n, Complex64::new(0.0, 0.0));
        w.normalized()
    }

    fn audio(&self, rng: &mut seed::Rng, n: usize) -> Result<Vec<f64>> {
        if !self.audio_clips.is_empty() && rng.random_bool(self.ingested_fraction.clamp(0.0, 1.0)) {
            let clip = &self.audio_clips[rng.random_range(0..self.audio_clips.len())];
            // A few attempts to avoid an all-silent excerpt.
            for _ in 0..8 {
                let start = rng.random_range(0..clip.len());
                let seg: Vec<f64> = (0..n).map(|i| clip[(start + i) % clip.len()]).collect();
                if peak_abs(&seg) > 1e-3 {
                    return Ok(seg);
                }
            }
        }
        let kind = if rng.random_bool(self.speech_fraction.clamp(0.0, 1.0)) {
            AudioKind::Speech
        } else {
            AudioKind::Music
        };
        synth_audio(kind, n as f64 / SAMPLE_RATE_HZ, rng.random())
    }

    fn fax(&self, rng: &mut seed::Rng, n: usize) -> Result<IqWaveform> {
        let spl = samples_per_line(FAX_LPM);
        let offset = rng.random_range(0..spl);
        let rows = (offset + n).div_ceil(spl);
        let image = if !self.fax_images.is_empty() && rng.random_bool(self.ingested_fraction.clamp(0.0, 1.0)) {
            let img = &self.fax_images[rng.random_range(0..self.fax_images.len())];
            img.rows_wrapping(rng.random_range(0..img.height()), rows)
        } else {
            let kind = [ChartKind::Text, ChartKind::Gradient, ChartKind::Weather][rng.random_range(0..3)];
            let first = rng.random_range(0..CHART_PAGE_ROWS);
            procedural_chart(kind, FAX_LINE_PIXELS, first, rows, rng.random())?
        };
        let mut w = fax_mod(&image, FAX_LPM)?;
        w.samples.drain(..offset);
        Ok(w)
    }
}
