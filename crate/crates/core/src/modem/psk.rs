//! Differential PSK with cosine-shaped phase transitions (PSK31 family).

use num_complex::Complex64;

use super::{symbol_starts, IqWaveform};
use crate::{Error, Result, SAMPLE_RATE_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Bpsk,
    Qpsk,
}

impl Constellation {
    pub fn order(self) -> usize {
        match self {
            Constellation::Bpsk => 2,
            Constellation::Qpsk => 4,
        }
    }
}

const QPSK31_POLY_A: u8 = 0x19;
const QPSK31_POLY_B: u8 = 0x17;
/// Phase step (in quarter turns) for each 2-bit encoder output. An all-zero
/// register gives continuous reversals, like BPSK idle.
pub const QPSK31_STEP_MAP: [u8; 4] = [2, 1, 3, 0];

fn parity(x: u8) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Rate-1/2, K=5 convolutional encoder output for each data bit.
pub fn qpsk31_encode(bits: &[u8]) -> Vec<u8> {
    let mut sr = 0u8;
    bits.iter()
        .map(|&b| {
            sr = ((sr << 1) | (b & 1)) & 0x1f;
            (parity(sr & QPSK31_POLY_A) << 1) | parity(sr & QPSK31_POLY_B)
        })
        .collect()
}

/// Phase steps (multiples of 2π/order) carried by each symbol.
pub fn psk_phase_steps(bits: &[u8], constellation: Constellation) -> Vec<u8> {
    match constellation {
        // PSK31: a zero bit is a phase reversal, a one keeps the phase.
        Constellation::Bpsk => bits.iter().map(|&b| if b == 0 { 1 } else { 0 }).collect(),
        Constellation::Qpsk => qpsk31_encode(bits)
            .into_iter()
            .map(|d| QPSK31_STEP_MAP[d as usize])
            .collect(),
    }
}

/// Modulates PSK31-convention data bits at `baud`.
pub fn psk_mod(bits: &[u8], baud: f64, constellation: Constellation) -> Result<IqWaveform> {
    if bits.is_empty() {
        return Err(Error::param("bits", "empty"));
    }
    psk_mod_steps(&psk_phase_steps(bits, constellation), constellation.order(), baud)
}

/// Modulates a stream of differential phase steps. Within a symbol the
/// complex amplitude moves from the previous to the new constellation point
/// along `(1 - cos)/2` weights, so a reversal passes through zero and a zero
/// step leaves the envelope constant.
pub fn psk_mod_steps(steps: &[u8], order: usize, baud: f64) -> Result<IqWaveform> {
    if steps.is_empty() {
        return Err(Error::param("steps", "empty"));
    }
    if !(baud > 0.0) {
        return Err(Error::param("baud", "must be positive"));
    }
    let starts = symbol_starts(steps.len(), baud);
    let mut samples = Vec::with_capacity(*starts.last().unwrap());
    let unit = 2.0 * std::f64::consts::PI / order as f64;
    let mut phase_index = 0usize;
    let mut prev = Complex64::new(1.0, 0.0);
    for (k, &step) in steps.iter().enumerate() {
        phase_index = (phase_index + step as usize) % order;
        let next = Complex64::from_polar(1.0, unit * phase_index as f64);
        let len = starts[k + 1] - starts[k];
        for i in 0..len {
            if step == 0 {
                samples.push(next);
            } else {
                let w = 0.5 - 0.5 * (std::f64::consts::PI * (i + 1) as f64 / len as f64).cos();
                samples.push(prev * (1.0 - w) + next * w);
            }
        }
        prev = next;
    }
    Ok(IqWaveform::new(samples))
}

/// Samples per symbol at `baud` (may be fractional).
pub fn samples_per_symbol(baud: f64) -> f64 {
    SAMPLE_RATE_HZ / baud
}
