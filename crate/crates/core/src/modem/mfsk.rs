//! M-ary FSK with phase-continuous tone changes (Olivia, DominoEx).

use super::{symbol_starts, CpfskSynth, IqWaveform};
use crate::encoding::SymbolStream;
use crate::{Error, Result};

/// Offset of tone `i` from the band centre.
pub fn tone_offset_hz(i: usize, tones: usize, spacing_hz: f64) -> f64 {
    (i as f64 - (tones as f64 - 1.0) / 2.0) * spacing_hz
}

/// Incremental frequency keying: each symbol moves the tone index by
/// `symbol + 2` modulo `tones`, starting from tone 0.
pub fn ifk_tones(symbols: &[u8], tones: usize) -> Vec<usize> {
    let mut tone = 0usize;
    symbols
        .iter()
        .map(|&s| {
            tone = (tone + 2 + s as usize) % tones;
            tone
        })
        .collect()
}

pub fn mfsk_mod(symbols: &SymbolStream, baud: f64, tones: usize, spacing_hz: f64, ifk: bool) -> Result<IqWaveform> {
    if symbols.is_empty() {
        return Err(Error::param("symbols", "empty"));
    }
    if tones < 2 || !(baud > 0.0) || !(spacing_hz > 0.0) {
        return Err(Error::param(
            "tones",
            "need at least two tones, positive baud and spacing",
        ));
    }
    if let Some(p) = symbols.symbols.iter().position(|&s| s as usize >= tones) {
        return Err(Error::InvalidCode {
            code: "mfsk",
            position: p,
            reason: format!("symbol {} out of range for {tones} tones", symbols.symbols[p]),
        });
    }
    let tone_seq: Vec<usize> = if ifk {
        ifk_tones(&symbols.symbols, tones)
    } else {
        symbols.symbols.iter().map(|&s| s as usize).collect()
    };
    let starts = symbol_starts(tone_seq.len(), baud);
    let mut synth = CpfskSynth::new();
    let mut samples = Vec::with_capacity(*starts.last().unwrap());
    for (k, &t) in tone_seq.iter().enumerate() {
        let f = tone_offset_hz(t, tones, spacing_hz);
        for _ in starts[k]..starts[k + 1] {
            samples.push(synth.next(f));
        }
    }
    Ok(IqWaveform::new(samples))
}
