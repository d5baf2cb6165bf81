//! Statistical calibration of the channel against independent oracles.

use hfclass_core::channel::*;
use hfclass_core::modem::IqWaveform;
use hfclass_core::{seed, Error};
use hfclass_testkit::spectrum::{peak_freq, power_spectrum, power_spectrum_n, sorted_bins, NFFT};
use hfclass_testkit::stats::{complex_correlation, gaussian_fit_sigma, ks_test, normal_cdf, rayleigh_cdf};
use num_complex::Complex64;
use rand::Rng as _;

fn random_unit_signal(n: usize, s: u64) -> IqWaveform {
    let mut rng = seed::rng(s);
    IqWaveform::new(
        (0..n)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
            .collect(),
    )
}

fn tone(f: f64, n: usize) -> IqWaveform {
    IqWaveform::new(
        (0..n)
            .map(|i| Complex64::from_polar(1.0, std::f64::consts::TAU * f * i as f64 / 6000.0))
            .collect(),
    )
}

fn power(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

#[test]
fn awgn_snr_calibration() {
    let x = random_unit_signal(100_000, 1);
    for (i, snr) in [-10.0, 0.0, 10.0, 25.0].into_iter().enumerate() {
        let y = awgn(&x, snr, 40 + i as u64).unwrap();
        let noise: Vec<Complex64> = y.samples.iter().zip(&x.samples).map(|(a, b)| a - b).collect();
        let measured = 10.0 * (power(&x.samples) / power(&noise)).log10();
        assert!(
            (measured - snr).abs() < 0.1,
            "target {snr} dB, measured {measured:.3} dB"
        );
    }
}

#[test]
fn awgn_is_circular_gaussian() {
    let x = random_unit_signal(100_000, 2);
    let y = awgn(&x, 0.0, 3).unwrap();
    let sd = (0.5f64).sqrt();
    let re: Vec<f64> = y.samples.iter().zip(&x.samples).map(|(a, b)| (a - b).re).collect();
    let im: Vec<f64> = y.samples.iter().zip(&x.samples).map(|(a, b)| (a - b).im).collect();
    assert!(ks_test(&re, |v| normal_cdf(v, 0.0, sd)) > 0.01);
    assert!(ks_test(&im, |v| normal_cdf(v, 0.0, sd)) > 0.01);
    let cross = re.iter().zip(&im).map(|(a, b)| a * b).sum::<f64>() / re.len() as f64;
    assert!(cross.abs() < 0.01, "I/Q cross term {cross}");
}

#[test]
fn awgn_high_snr_and_silence() {
    let x = random_unit_signal(10_000, 4);
    let y = awgn(&x, 100.0, 5).unwrap();
    let dev = y
        .samples
        .iter()
        .zip(&x.samples)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(dev < 1e-4, "{dev}");
    let silent = IqWaveform::new(vec![Complex64::new(0.0, 0.0); 100]);
    assert!(matches!(awgn(&silent, 10.0, 0), Err(Error::ZeroPower)));
}

#[test]
fn offsets() {
    let x = random_unit_signal(1000, 6);
    assert_eq!(apply_offsets(&x, 0.0, 0.0).unwrap().samples, x.samples);
    let neg = apply_offsets(&x, 0.0, std::f64::consts::PI).unwrap();
    assert!(neg.samples.iter().zip(&x.samples).all(|(a, b)| (a + b).norm() < 1e-12));
    let shifted = apply_offsets(&tone(0.0, NFFT), 250.0, 0.0).unwrap();
    let f = peak_freq(&power_spectrum(&shifted.samples));
    assert!((f - 250.0).abs() <= 6000.0 / NFFT as f64, "{f}");
    assert!(apply_offsets(&x, 250.5, 0.0).is_err());
}

#[test]
fn scenario_none_passes_through() {
    let x = random_unit_signal(500, 7);
    let y = watterson_apply(&x, &Scenario::None.preset(), 8).unwrap();
    assert_eq!(y.samples, x.samples);
}

/// One sample per independent realization, so the samples are exactly
/// decorrelated. A constant input turns the channel output into the summed
/// tap gains.
#[test]
fn fading_envelope_is_rayleigh() {
    for sc in [Scenario::Moderate, Scenario::Bad, Scenario::Flutter] {
        let preset = sc.preset();
        let x = IqWaveform::new(vec![Complex64::new(1.0, 0.0); 2 * preset.delay_samples() + 8]);
        let env: Vec<f64> = (0..20_000u64)
            .map(|s| watterson_apply(&x, &preset, s).unwrap().samples.last().unwrap().norm())
            .collect();
        let p = ks_test(&env, |r| rayleigh_cdf(r, 1.0));
        assert!(p > 0.01, "{sc}: Rayleigh KS p = {p}");
    }
    let env: Vec<f64> = (0..100_000u64)
        .map(|s| fading_process(1.0, 4, s).unwrap()[3].norm())
        .collect();
    let p = ks_test(&env, |r| rayleigh_cdf(r, 1.0));
    assert!(p > 0.01, "tap gain: Rayleigh KS p = {p}");
}

#[test]
fn fading_unit_power() {
    let g = fading_process(10.0, 1_000_000, 11).unwrap();
    assert!((power(&g) - 1.0).abs() < 0.05);
    let x = tone(0.0, 600_000);
    let y = watterson_apply(&x, &Scenario::Flutter.preset(), 12).unwrap();
    assert!((power(&y.samples) - 1.0).abs() < 0.1, "{}", power(&y.samples));
}

#[test]
fn doppler_spread_matches_preset() {
    let n = 1 << 19;
    for sc in [Scenario::Moderate, Scenario::Bad, Scenario::Flutter] {
        let preset = sc.preset();
        let x = tone(0.0, n);
        let mut acc = vec![0.0; n];
        for s in 0..8u64 {
            let y = watterson_apply(&x, &preset, s).unwrap();
            for (a, p) in acc.iter_mut().zip(power_spectrum_n(&y.samples, n)) {
                *a += p;
            }
        }
        let sigma = gaussian_fit_sigma(&sorted_bins(&acc), 1e-3);
        let spread = 2.0 * sigma;
        let want = preset.doppler_spread_hz;
        assert!(
            (spread / want - 1.0).abs() <= 0.2,
            "{sc}: measured {spread:.3} Hz, preset {want} Hz"
        );
    }
}

/// At 250 Hz a 2 ms delay is half a cycle, so the taps subtract instead of
/// add; the two outputs give back each tap gain separately.
#[test]
fn taps_are_independent() {
    let preset = Scenario::Bad.preset();
    assert_eq!(preset.delay_samples(), 12);
    let n = 600_000;
    let d = preset.delay_samples();
    let sum = watterson_apply(&tone(0.0, n), &preset, 21).unwrap();
    let diff = watterson_apply(&tone(250.0, n), &preset, 21).unwrap();
    let base = tone(250.0, n);
    let mut g1 = Vec::with_capacity(n);
    let mut g2 = Vec::with_capacity(n);
    for i in d..n {
        let a = sum.samples[i];
        let b = diff.samples[i] * base.samples[i].conj();
        g1.push((a + b) / 2f64.sqrt());
        g2.push((a - b) / 2f64.sqrt());
    }
    let r = complex_correlation(&g1, &g2);
    assert!(r < 0.15, "tap correlation {r}");
    let r_self = complex_correlation(&g1, &g1);
    assert!((r_self - 1.0).abs() < 1e-9);
}

#[test]
fn moderate_fades_below_minus_10_db() {
    let n = 30 * 6000;
    let y = watterson_apply(&tone(0.0, n), &Scenario::Moderate.preset(), 31).unwrap();
    let mean = power(&y.samples);
    let deepest = y
        .samples
        .iter()
        .map(|v| v.norm_sqr() / mean)
        .fold(f64::INFINITY, f64::min);
    assert!(
        10.0 * deepest.log10() <= -10.0,
        "deepest fade {:.1} dB",
        10.0 * deepest.log10()
    );
}

#[test]
fn impair_is_deterministic_and_ordered() {
    let x = random_unit_signal(4000, 9);
    let cfg = ChannelConfig {
        scenario: Scenario::Moderate,
        snr_db: 5.0,
        freq_offset_hz: -120.0,
        phase_offset_rad: 1.0,
        seed: 77,
    };
    let a = impair(&x, &cfg).unwrap();
    assert_eq!(a.samples, impair(&x, &cfg).unwrap().samples);
    assert_ne!(
        a.samples,
        impair(&x, &ChannelConfig { seed: 78, ..cfg }).unwrap().samples
    );
    // Without noise the chain reduces to fading then rotation.
    let quiet = ChannelConfig { snr_db: 200.0, ..cfg };
    let got = impair(&x, &quiet).unwrap();
    let faded = watterson_apply(&x, &cfg.scenario.preset(), seed::derive(cfg.seed, seed::stream::FADING)).unwrap();
    let want = apply_offsets(&faded, cfg.freq_offset_hz, cfg.phase_offset_rad).unwrap();
    let err = got
        .samples
        .iter()
        .zip(&want.samples)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn config_validation() {
    let ok = ChannelConfig {
        scenario: Scenario::Good,
        snr_db: 25.0,
        freq_offset_hz: 250.0,
        phase_offset_rad: 0.0,
        seed: 0,
    };
    assert!(ok.validate().is_ok());
    assert!(ChannelConfig { snr_db: 25.1, ..ok }.validate().is_err());
    assert!(ChannelConfig { snr_db: -10.5, ..ok }.validate().is_err());
    assert!(ChannelConfig {
        freq_offset_hz: -251.0,
        ..ok
    }
    .validate()
    .is_err());
    for s in Scenario::ALL {
        assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
    }
}
