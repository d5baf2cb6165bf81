//! Continuous-phase binary FSK (RTTY, NAVTEX).

use super::{CpfskSynth, IqWaveform};
use crate::{Error, Result, SAMPLE_RATE_HZ};

/// One keyed interval: mark or space for `length` bit periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyedBit {
    pub mark: bool,
    pub length: f64,
}

/// Asynchronous teleprinter framing: space start bit, data bits least
/// significant first, mark stop bits.
pub fn frame_async(codes: &[u8], data_bits: u32, stop_bits: f64) -> Vec<KeyedBit> {
    let mut out = Vec::with_capacity(codes.len() * (data_bits as usize + 2));
    for &c in codes {
        out.push(KeyedBit {
            mark: false,
            length: 1.0,
        });
        for i in 0..data_bits {
            out.push(KeyedBit {
                mark: (c >> i) & 1 == 1,
                length: 1.0,
            });
        }
        out.push(KeyedBit {
            mark: true,
            length: stop_bits,
        });
    }
    out
}

/// Synchronous framing, most significant bit first (SITOR-B).
pub fn frame_sync(codes: &[u8], bits: u32) -> Vec<KeyedBit> {
    codes
        .iter()
        .flat_map(|&c| {
            (0..bits).rev().map(move |i| KeyedBit {
                mark: (c >> i) & 1 == 1,
                length: 1.0,
            })
        })
        .collect()
}

/// Mark at `+shift/2`, space at `-shift/2`, phase continuous. Output has
/// unit magnitude.
pub fn fsk_mod(train: &[KeyedBit], baud: f64, shift_hz: f64) -> Result<IqWaveform> {
    if train.is_empty() {
        return Err(Error::param("train", "empty"));
    }
    if !(baud > 0.0) {
        return Err(Error::param("baud", "must be positive"));
    }
    let bit_samples = SAMPLE_RATE_HZ / baud;
    let total_bits: f64 = train.iter().map(|b| b.length).sum();
    let n = (total_bits * bit_samples).round() as usize;
    let mut synth = CpfskSynth::new();
    let mut samples = Vec::with_capacity(n);
    let mut seg = 0usize;
    let mut seg_end = train[0].length;
    for i in 0..n {
        let t_bits = i as f64 / bit_samples;
        while t_bits >= seg_end && seg + 1 < train.len() {
            seg += 1;
            seg_end += train[seg].length;
        }
        let f = if train[seg].mark {
            shift_hz / 2.0
        } else {
            -shift_hz / 2.0
        };
        samples.push(synth.next(f));
    }
    Ok(IqWaveform::new(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn async_frame_layout() {
        let f = frame_async(&[0b00011], 5, 1.5);
        let marks: Vec<bool> = f.iter().map(|b| b.mark).collect();
        assert_eq!(marks, vec![false, true, true, false, false, false, true]);
        assert_eq!(f.last().unwrap().length, 1.5);
        assert_eq!(f.iter().map(|b| b.length).sum::<f64>(), 7.5);
    }

    #[test]
    fn sync_frame_msb_first() {
        let f = frame_sync(&[0b1000111], 7);
        let marks: Vec<u8> = f.iter().map(|b| b.mark as u8).collect();
        assert_eq!(marks, vec![1, 0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn constant_envelope_and_length() {
        let w = fsk_mod(&frame_async(&[3, 25, 14], 5, 1.5), 50.0, 170.0).unwrap();
        assert_eq!(w.len(), (3.0 * 7.5 * 120.0) as usize);
        assert!(w.samples.iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn empty_rejected() {
        assert!(fsk_mod(&[], 45.45, 170.0).is_err());
    }
}
