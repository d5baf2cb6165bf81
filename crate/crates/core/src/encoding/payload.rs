use std::ops::Range;

use rand::Rng as _;

use super::{
    ccir476, encode_ccir476, encode_ita2, encode_morse, encode_varicode, ita2::ita2_representable,
    morse::morse_representable, sitor_b_interleave, KeyingEnvelope, SymbolStream,
};
use crate::modem::{Family, ModeId, ModeSpec};
use crate::seed;
use crate::{Error, Result};

const BUNDLED_CORPUS: &str = include_str!("../../assets/corpus.txt");

/// A region of plain text that payloads are cut from.
#[derive(Debug, Clone)]
pub struct Corpus {
    text: std::sync::Arc<str>,
    region: Range<usize>,
}

impl Corpus {
    /// The bundled ASCII corpus, whole.
    pub fn bundled() -> Self {
        Corpus {
            text: BUNDLED_CORPUS.into(),
            region: 0..BUNDLED_CORPUS.len(),
        }
    }

    pub fn from_text(text: impl Into<String>) -> Result<Self> {
        let text: String = text.into();
        if !text.is_ascii() || text.is_empty() {
            return Err(Error::param("corpus", "must be non-empty ASCII text"));
        }
        let len = text.len();
        Ok(Corpus {
            text: text.into(),
            region: 0..len,
        })
    }

    /// Restricts to the byte fractions `[lo, hi)` of the full text; used to
    /// keep training and validation payload text disjoint.
    pub fn slice(&self, lo: f64, hi: f64) -> Self {
        let n = self.text.len();
        let a = ((lo.clamp(0.0, 1.0) * n as f64) as usize).min(n);
        let b = ((hi.clamp(0.0, 1.0) * n as f64) as usize).clamp(a + 1, n.max(a + 1));
        Corpus {
            text: self.text.clone(),
            region: a..b.min(n),
        }
    }

    pub fn region_text(&self) -> &str {
        &self.text[self.region.clone()]
    }

    /// `len` characters starting at a random offset, wrapping inside the region.
    fn window(&self, rng: &mut seed::Rng, len: usize) -> String {
        let region = self.region_text().as_bytes();
        let start = rng.random_range(0..region.len());
        (0..len).map(|i| region[(start + i) % region.len()] as char).collect()
    }
}

/// Source material for one digital waveform.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Keying { envelope: KeyingEnvelope, wpm: f64 },
    Bits(Vec<u8>),
    Symbols(SymbolStream),
}

#[derive(Debug, Clone)]
pub struct PayloadOptions {
    pub corpus: Corpus,
    /// Morse speed range in words per minute, drawn uniformly per payload.
    pub morse_wpm: (f64, f64),
    pub rtty_usos: bool,
}

impl Default for PayloadOptions {
    fn default() -> Self {
        PayloadOptions {
            corpus: Corpus::bundled(),
            morse_wpm: (15.0, 30.0),
            rtty_usos: false,
        }
    }
}

fn teleprinter_text(s: &str, keep: impl Fn(char) -> bool) -> String {
    let mut out = String::with_capacity(s.len() + 8);
    for c in s.chars() {
        match c {
            '\n' => out.push_str("\r\n"),
            '\t' => out.push(' '),
            c => {
                let u = c.to_ascii_uppercase();
                if keep(u) {
                    out.push(u);
                }
            }
        }
    }
    out
}

fn text_bits(s: &str) -> impl Iterator<Item = u8> + '_ {
    s.bytes().flat_map(|b| (0..7).rev().map(move |i| (b >> i) & 1))
}

/// Payload for `mode` drawn from the bundled corpus.
pub fn random_payload(mode: &ModeSpec, duration: f64, seed: u64) -> Result<Payload> {
    random_payload_from(&PayloadOptions::default(), mode, duration, seed)
}

/// Deterministic payload for `(mode, duration, seed)` long enough to fill
/// `duration` seconds at the mode's signalling rate.
pub fn random_payload_from(opts: &PayloadOptions, mode: &ModeSpec, duration: f64, seed: u64) -> Result<Payload> {
    if !(duration > 0.0) {
        return Err(Error::param("duration", format!("{duration} must be positive")));
    }
    let mut rng = seed::rng(seed);
    const CHUNK: usize = 48;

    if mode.family == Family::Ook {
        let (lo, hi) = opts.morse_wpm;
        let wpm = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let mut envelope = KeyingEnvelope::new();
        while envelope.total_duration() < duration {
            let text: String = opts
                .corpus
                .window(&mut rng, CHUNK)
                .chars()
                .map(|c| if c.is_whitespace() { ' ' } else { c })
                .filter(|&c| morse_representable(c))
                .collect();
            let piece = encode_morse(&text, wpm)?;
            if piece.is_empty() {
                continue;
            }
            if !envelope.is_empty() {
                envelope.push(false, 7.0 * super::dit_seconds(wpm));
            }
            envelope.extend(&piece);
        }
        return Ok(Payload::Keying { envelope, wpm });
    }

    let baud = mode
        .baud
        .ok_or_else(|| Error::param("mode", format!("{} is analog and has no text payload", mode.mode_id)))?;
    let symbols_needed = (duration * baud).ceil() as usize + 2;

    let payload = match mode.mode_id {
        ModeId::Psk31 | ModeId::Psk63 | ModeId::Qpsk31 => {
            let mut bits = Vec::new();
            while bits.len() < symbols_needed {
                let text: String = opts
                    .corpus
                    .window(&mut rng, CHUNK)
                    .chars()
                    .filter(char::is_ascii)
                    .collect();
                bits.extend(encode_varicode(&text)?);
            }
            Payload::Bits(bits)
        }
        ModeId::Rtty45 | ModeId::Rtty50 | ModeId::Rtty100 => {
            // 1 start + 5 data + 1.5 stop bits per character.
            let codes_needed = (symbols_needed as f64 / 7.5).ceil() as usize + 1;
            let mut codes = Vec::new();
            while codes.len() < codes_needed {
                let text = teleprinter_text(&opts.corpus.window(&mut rng, CHUNK), ita2_representable);
                codes.extend(encode_ita2(&text, opts.rtty_usos)?.symbols);
            }
            Payload::Symbols(SymbolStream::new(codes, 32))
        }
        ModeId::Navtex => {
            let slots_needed = (symbols_needed as f64 / 7.0).ceil() as usize + 1;
            let mut text = String::new();
            while 2 * text.len() < slots_needed {
                text.push_str(&teleprinter_text(
                    &opts.corpus.window(&mut rng, CHUNK),
                    ccir476::ccir476_representable,
                ));
            }
            let codes = encode_ccir476(&text)?;
            Payload::Symbols(SymbolStream::new(sitor_b_interleave(&codes), 128))
        }
        ModeId::Mt63_1000 => {
            let carriers = mode.carriers.unwrap_or(64);
            let needed = symbols_needed * carriers;
            let mut bits = Vec::with_capacity(needed);
            while bits.len() < needed {
                bits.extend(text_bits(&opts.corpus.window(&mut rng, CHUNK)));
            }
            Payload::Bits(bits)
        }
        ModeId::DominoEx11 => {
            let mut nibbles = Vec::with_capacity(symbols_needed + 2);
            while nibbles.len() < symbols_needed {
                for b in opts.corpus.window(&mut rng, CHUNK).bytes() {
                    nibbles.push(b >> 4);
                    nibbles.push(b & 0x0f);
                }
            }
            Payload::Symbols(SymbolStream::new(nibbles, 16))
        }
        _ if mode.family == Family::Mfsk => {
            let tones = mode.tones.expect("MFSK mode has a tone count");
            let width = tones.trailing_zeros() as usize;
            let mut bits = Vec::new();
            while bits.len() < symbols_needed * width {
                bits.extend(text_bits(&opts.corpus.window(&mut rng, CHUNK)));
            }
            let symbols = bits
                .chunks_exact(width)
                .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
                .collect();
            Payload::Symbols(SymbolStream::new(symbols, tones))
        }
        other => unreachable!("no payload rule for {other}"),
    };
    Ok(payload)
}

impl Payload {
    /// Number of code symbols (bits for bit payloads); Morse reports envelope segments.
    pub fn len(&self) -> usize {
        match self {
            Payload::Keying { envelope, .. } => envelope.segments().len(),
            Payload::Bits(b) => b.len(),
            Payload::Symbols(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_large_ascii() {
        assert!(BUNDLED_CORPUS.len() >= 1_000_000);
        assert!(BUNDLED_CORPUS.is_ascii());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        for m in ModeId::ALL.iter().map(|m| m.spec()).filter(|s| s.is_digital()) {
            let a = random_payload(&m, 0.5, 7).unwrap();
            let b = random_payload(&m, 0.5, 7).unwrap();
            let c = random_payload(&m, 0.5, 8).unwrap();
            assert_eq!(a, b, "{}", m.mode_id);
            assert_ne!(a, c, "{}", m.mode_id);
        }
    }

    #[test]
    fn psk31_half_second_has_enough_bits() {
        let p = random_payload(&ModeId::Psk31.spec(), 0.5, 1).unwrap();
        let Payload::Bits(bits) = p else { panic!() };
        assert!(bits.len() >= (31.25f64 * 0.5).floor() as usize);
    }

    #[test]
    fn fills_duration_for_every_mode() {
        for m in ModeId::ALL.iter().map(|m| m.spec()).filter(|s| s.is_digital()) {
            let d = 0.6;
            match random_payload(&m, d, 3).unwrap() {
                Payload::Keying { envelope, wpm } => {
                    assert!(envelope.total_duration() >= d);
                    assert!((15.0..30.0).contains(&wpm));
                }
                Payload::Bits(b) => {
                    let per_symbol = m.carriers.unwrap_or(1);
                    assert!(
                        b.len() as f64 >= d * m.baud.unwrap() * per_symbol as f64,
                        "{}",
                        m.mode_id
                    );
                }
                Payload::Symbols(s) => {
                    let bits_per = match m.mode_id {
                        ModeId::Rtty45 | ModeId::Rtty50 | ModeId::Rtty100 => 7.5,
                        ModeId::Navtex => 7.0,
                        _ => 1.0,
                    };
                    assert!(s.len() as f64 * bits_per >= d * m.baud.unwrap(), "{}", m.mode_id);
                    if let Some(t) = m.tones {
                        assert!(s.symbols.iter().all(|&x| (x as usize) < t));
                    }
                }
            }
        }
    }

    #[test]
    fn analog_modes_have_no_text_payload() {
        assert!(random_payload(&ModeId::Am.spec(), 1.0, 0).is_err());
    }

    #[test]
    fn zero_duration_rejected() {
        assert!(random_payload(&ModeId::Psk31.spec(), 0.0, 0).is_err());
    }

    #[test]
    fn disjoint_regions() {
        let c = Corpus::bundled();
        let train = c.slice(0.0, 0.8);
        let val = c.slice(0.8, 1.0);
        assert_eq!(train.region.end, val.region.start);
        assert_eq!(val.region.end, BUNDLED_CORPUS.len());
    }
}
