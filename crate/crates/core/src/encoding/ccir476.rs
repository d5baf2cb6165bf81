//! CCIR-476 constant-ratio code and SITOR-B (NAVTEX) time diversity.

use std::sync::OnceLock;

use super::tables::{self, ShiftTable};
use super::SymbolStream;
use crate::{Error, Result};

/// Character slots between a character's DX copy and its RX repetition.
pub const SITOR_B_REPEAT_DELAY: usize = 5;

pub(crate) fn table() -> &'static ShiftTable {
    static TABLE: OnceLock<ShiftTable> = OnceLock::new();
    TABLE.get_or_init(|| ShiftTable::build(tables::CCIR476_LETTERS, tables::CCIR476_FIGURES))
}

pub fn ccir476_ltrs() -> u8 {
    table().control("LTRS")
}
pub fn ccir476_figs() -> u8 {
    table().control("FIGS")
}
/// Phasing signal 1, idles DX slots.
pub fn ccir476_alpha() -> u8 {
    table().control("ALPHA")
}
/// Phasing signal 2 (repetition request), idles RX slots.
pub fn ccir476_rq() -> u8 {
    table().control("RQ")
}

pub fn ccir476_representable(c: char) -> bool {
    let t = table();
    t.letters.contains_key(&c) || t.figures.contains_key(&c)
}

/// Encodes text to 7-bit CCIR-476 codes with letters/figures shifting.
pub fn encode_ccir476(text: &str) -> Result<Vec<u8>> {
    let t = table();
    let (ltrs, figs) = (ccir476_ltrs(), ccir476_figs());
    let mut figures = false;
    let mut codes = Vec::with_capacity(text.len());
    for (position, ch) in text.chars().enumerate() {
        let code = match (t.letters.get(&ch), t.figures.get(&ch)) {
            (Some(&l), Some(_)) => l,
            (Some(&l), None) => {
                if figures {
                    codes.push(ltrs);
                    figures = false;
                }
                l
            }
            (None, Some(&f)) => {
                if !figures {
                    codes.push(figs);
                    figures = true;
                }
                f
            }
            (None, None) => {
                return Err(Error::UnsupportedCharacter {
                    code: "CCIR-476",
                    ch,
                    position,
                })
            }
        };
        codes.push(code);
    }
    Ok(codes)
}

/// Interleaves a code sequence into the SITOR-B DX/RX slot schedule.
///
/// Character `i` occupies DX slot `2i` and is repeated in slot
/// `2i + SITOR_B_REPEAT_DELAY`. RX slots with nothing to repeat carry RQ,
/// DX slots after the message carry ALPHA.
pub fn sitor_b_interleave(codes: &[u8]) -> Vec<u8> {
    if codes.is_empty() {
        return Vec::new();
    }
    let n = codes.len();
    let slots = 2 * n + SITOR_B_REPEAT_DELAY - 1;
    let (alpha, rq) = (ccir476_alpha(), ccir476_rq());
    (0..slots)
        .map(|s| {
            if s % 2 == 0 {
                codes.get(s / 2).copied().unwrap_or(alpha)
            } else if s >= SITOR_B_REPEAT_DELAY {
                codes[(s - SITOR_B_REPEAT_DELAY) / 2]
            } else {
                rq
            }
        })
        .collect()
}

/// Recovers the code sequence from an interleaved stream, checking every RX
/// repetition against its DX copy. Trailing ALPHA idles are dropped.
pub fn sitor_b_deinterleave(stream: &[u8]) -> Result<Vec<u8>> {
    let alpha = ccir476_alpha();
    let mut dx: Vec<u8> = stream.iter().step_by(2).copied().collect();
    while dx.last() == Some(&alpha) {
        dx.pop();
    }
    for (i, &c) in dx.iter().enumerate() {
        let rx = 2 * i + SITOR_B_REPEAT_DELAY;
        if let Some(&r) = stream.get(rx) {
            if r != c {
                return Err(Error::InvalidCode {
                    code: "SITOR-B",
                    position: rx,
                    reason: format!("RX copy {r:#09b} differs from DX {c:#09b}"),
                });
            }
        }
    }
    Ok(dx)
}

/// CCIR-476 encoding followed by SITOR-B interleaving; alphabet of 128.
pub fn encode_ccir476_sitorb(text: &str) -> Result<SymbolStream> {
    let codes = encode_ccir476(text)?;
    Ok(SymbolStream::new(sitor_b_interleave(&codes), 128))
}

pub fn decode_ccir476(codes: &[u8]) -> Result<String> {
    let t = table();
    let (ltrs, figs, alpha, rq) = (ccir476_ltrs(), ccir476_figs(), ccir476_alpha(), ccir476_rq());
    let mut figures = false;
    let mut out = String::new();
    for (position, &c) in codes.iter().enumerate() {
        if c == ltrs {
            figures = false;
        } else if c == figs {
            figures = true;
        } else if c == alpha || c == rq {
            continue;
        } else {
            let rev = if figures { &t.figures_rev } else { &t.letters_rev };
            let ch = rev.get(&c).ok_or_else(|| Error::InvalidCode {
                code: "CCIR-476",
                position,
                reason: format!("code {c:#09b} unassigned"),
            })?;
            out.push(*ch);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_is_constant_ratio_and_complete() {
        let t = table();
        let mut all: Vec<u8> = t.letters.values().chain(t.controls.values()).copied().collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 35, "every 4-of-7 word is assigned");
        assert!(all.iter().all(|c| c.count_ones() == 4 && *c < 128));
        for f in t.figures.values() {
            assert!(all.contains(f));
        }
    }

    #[test]
    fn ab_schedule() {
        let t = table();
        let (a, b) = (t.letters[&'A'], t.letters[&'B']);
        let (al, rq) = (ccir476_alpha(), ccir476_rq());
        // slot:        0  1   2  3   4   5  6   7
        let expected = [a, rq, b, rq, al, a, al, b];
        assert_eq!(encode_ccir476_sitorb("AB").unwrap().symbols, expected);
    }

    #[test]
    fn empty() {
        assert!(encode_ccir476_sitorb("").unwrap().symbols.is_empty());
    }

    #[test]
    fn rejects_lowercase() {
        assert!(matches!(
            encode_ccir476("Ab"),
            Err(Error::UnsupportedCharacter {
                ch: 'b',
                position: 1,
                ..
            })
        ));
    }

    #[test]
    fn deinterleave_detects_corrupt_repeat() {
        let mut s = encode_ccir476_sitorb("NAVTEX").unwrap().symbols;
        s[7] = ccir476_alpha();
        assert!(sitor_b_deinterleave(&s).is_err());
    }

    proptest! {
        #[test]
        fn every_word_has_weight_four(s in "[A-Z0-9 .,?:()'=/+\\-]{0,50}") {
            let out = encode_ccir476_sitorb(&s).unwrap();
            prop_assert!(out.symbols.iter().all(|c| c.count_ones() == 4));
            let codes = sitor_b_deinterleave(&out.symbols).unwrap();
            prop_assert_eq!(decode_ccir476(&codes).unwrap(), s);
        }
    }
}
