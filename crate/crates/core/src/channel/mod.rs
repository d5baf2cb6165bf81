//! HF channel impairments: Watterson tapped-delay-line fading, frequency and
//! phase offsets, and additive white Gaussian noise.

mod fading;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use fading::{fading_process, measured_spread_hz};

use crate::modem::IqWaveform;
use crate::{seed, Error, Result, SAMPLE_RATE_HZ};

/// Largest carrier offset applied by the channel.
pub const MAX_FREQ_OFFSET_HZ: f64 = 250.0;
/// SNR range used for generated data.
pub const SNR_RANGE_DB: (f64, f64) = (-10.0, 25.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    None,
    Good,
    Moderate,
    Bad,
    Flutter,
    Doppler,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::None,
        Scenario::Good,
        Scenario::Moderate,
        Scenario::Bad,
        Scenario::Flutter,
        Scenario::Doppler,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::None => "none",
            Scenario::Good => "good",
            Scenario::Moderate => "moderate",
            Scenario::Bad => "bad",
            Scenario::Flutter => "flutter",
            Scenario::Doppler => "doppler",
        }
    }

    pub fn preset(self) -> ScenarioPreset {
        let two_tap = |delay_ms: f64, spread: f64| ScenarioPreset {
            scenario: self,
            differential_delay_s: delay_ms / 1000.0,
            doppler_spread_hz: spread,
            tap_count: 2,
            extra_freq_drift_hz: 0.0,
        };
        match self {
            Scenario::None => ScenarioPreset {
                scenario: self,
                differential_delay_s: 0.0,
                doppler_spread_hz: 0.0,
                tap_count: 1,
                extra_freq_drift_hz: 0.0,
            },
            Scenario::Good => two_tap(0.5, 0.1),
            Scenario::Moderate => two_tap(1.0, 0.5),
            Scenario::Bad => two_tap(2.0, 1.0),
            Scenario::Flutter => two_tap(0.5, 10.0),
            Scenario::Doppler => ScenarioPreset {
                scenario: self,
                differential_delay_s: 0.0,
                doppler_spread_hz: 2.0,
                tap_count: 1,
                extra_freq_drift_hz: 2.0,
            },
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scenario `{s}`; valid: none, good, moderate, bad, flutter, doppler"
                ))
            })
    }
}

/// Watterson parameters of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPreset {
    pub scenario: Scenario,
    pub differential_delay_s: f64,
    /// Two-sigma width of the Gaussian Doppler spectrum of each tap.
    pub doppler_spread_hz: f64,
    pub tap_count: usize,
    /// Peak of the slow sinusoidal carrier drift (one cycle per waveform).
    pub extra_freq_drift_hz: f64,
}

impl ScenarioPreset {
    /// Differential delay in whole samples.
    pub fn delay_samples(&self) -> usize {
        (self.differential_delay_s * SAMPLE_RATE_HZ).round() as usize
    }
}

/// Full impairment of one waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub scenario: Scenario,
    pub snr_db: f64,
    pub freq_offset_hz: f64,
    pub phase_offset_rad: f64,
    pub seed: u64,
}

impl ChannelConfig {
    /// Checks the ranges used for generated data: SNR in [-10, 25] dB and
    /// offset within ±250 Hz. [`impair`] itself accepts any finite SNR.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = SNR_RANGE_DB;
        if !(lo..=hi).contains(&self.snr_db) {
            return Err(Error::param("snr_db", format!("{} outside [{lo}, {hi}]", self.snr_db)));
        }
        check_offset(self.freq_offset_hz)?;
        if !self.phase_offset_rad.is_finite() {
            return Err(Error::param("phase_offset_rad", "must be finite"));
        }
        Ok(())
    }
}

fn check_offset(f: f64) -> Result<()> {
    if !(f.abs() <= MAX_FREQ_OFFSET_HZ) {
        return Err(Error::param(
            "freq_offset_hz",
            format!("{f} outside ±{MAX_FREQ_OFFSET_HZ}"),
        ));
    }
    Ok(())
}

/// Sum of independently faded, delayed copies with equal average power.
/// Tap `i` is delayed by `i * delay` samples (zeros shifted in). Output power
/// equals input power in expectation. A single tap without spread or drift
/// (scenario `none`) passes the input through unchanged; the channel phase
/// is then set by the offset stage alone.
pub fn watterson_apply(iq: &IqWaveform, preset: &ScenarioPreset, seed: u64) -> Result<IqWaveform> {
    if iq.is_empty() {
        return Err(Error::param("iq", "empty waveform"));
    }
    if preset.tap_count <= 1 && preset.doppler_spread_hz == 0.0 && preset.extra_freq_drift_hz == 0.0 {
        return Ok(iq.clone());
    }
    let n = iq.len();
    let delay = preset.delay_samples();
    let taps = preset.tap_count.max(1);
    let scale = 1.0 / (taps as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for tap in 0..taps {
        let g = fading_process(preset.doppler_spread_hz, n, seed::derive(seed, tap as u64))?;
        let d = tap * delay;
        for i in d..n {
            out[i] += iq.samples[i - d] * g[i] * scale;
        }
    }
    if preset.extra_freq_drift_hz != 0.0 {
        let mut rng = seed::rng(seed::derive(seed, seed::stream::DRIFT));
        let phi0: f64 = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
        let mut phase = 0.0;
        for (i, v) in out.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, phase);
            let f = preset.extra_freq_drift_hz * (std::f64::consts::TAU * i as f64 / n as f64 + phi0).sin();
            phase += std::f64::consts::TAU * f / SAMPLE_RATE_HZ;
        }
    }
    Ok(IqWaveform::new(out))
}

/// Adds complex white Gaussian noise of power `P_signal * 10^(-snr/10)`,
/// with the signal power measured over the whole waveform.
pub fn awgn(iq: &IqWaveform, snr_db: f64, seed: u64) -> Result<IqWaveform> {
    if !snr_db.is_finite() {
        return Err(Error::param("snr_db", "must be finite"));
    }
    let p = iq.mean_power();
    if !(p > 0.0) {
        return Err(Error::ZeroPower);
    }
    let sigma = (p * 10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    let mut rng = seed::rng(seed);
    let samples = iq
        .samples
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex64::new(re, im) * sigma
        })
        .collect();
    Ok(IqWaveform::new(samples))
}

/// `y[n] = x[n] * exp(j(2π Δf n / fs + φ))`.
pub fn apply_offsets(iq: &IqWaveform, freq_offset_hz: f64, phase_offset_rad: f64) -> Result<IqWaveform> {
    check_offset(freq_offset_hz)?;
    let w = std::f64::consts::TAU * freq_offset_hz / SAMPLE_RATE_HZ;
    let samples = iq
        .samples
        .iter()
        .enumerate()
        .map(|(n, &x)| x * Complex64::from_polar(1.0, w * n as f64 + phase_offset_rad))
        .collect();
    Ok(IqWaveform::new(samples))
}

/// Fading, then offsets, then noise. Sub-seeds are split from `config.seed`.
pub fn impair(iq: &IqWaveform, config: &ChannelConfig) -> Result<IqWaveform> {
    let faded = watterson_apply(
        iq,
        &config.scenario.preset(),
        seed::derive(config.seed, seed::stream::FADING),
    )?;
    let shifted = apply_offsets(&faded, config.freq_offset_hz, config.phase_offset_rad)?;
    awgn(&shifted, config.snr_db, seed::derive(config.seed, seed::stream::NOISE))
}
