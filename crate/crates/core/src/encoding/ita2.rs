//! ITA2 (Baudot-Murray) teleprinter code with letters/figures shift state.

use std::sync::OnceLock;

use super::tables::{self, ShiftTable};
use super::SymbolStream;
use crate::{Error, Result};

pub const ITA2_LTRS: u8 = 0b11111;
pub const ITA2_FIGS: u8 = 0b11011;
const ITA2_SPACE: u8 = 0b00100;
const ITA2_NUL: u8 = 0;

pub(crate) fn table() -> &'static ShiftTable {
    static TABLE: OnceLock<ShiftTable> = OnceLock::new();
    TABLE.get_or_init(|| ShiftTable::build(tables::ITA2_LETTERS, tables::ITA2_FIGURES))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shift {
    Letters,
    Figures,
}

pub fn ita2_representable(c: char) -> bool {
    let t = table();
    t.letters.contains_key(&c) || t.figures.contains_key(&c)
}

/// Encodes text as 5-bit ITA2 codes, starting in letters state.
///
/// A shift code is emitted only when the next character needs the other
/// set. With `usos` (unshift on space) the receiver falls back to letters
/// after every space, so a figure following a space gets a fresh FIGS.
pub fn encode_ita2(text: &str, usos: bool) -> Result<SymbolStream> {
    let t = table();
    let mut state = Shift::Letters;
    let mut codes = Vec::with_capacity(text.len() + text.len() / 4);
    for (position, ch) in text.chars().enumerate() {
        let in_l = t.letters.get(&ch).copied();
        let in_f = t.figures.get(&ch).copied();
        let code = match (in_l, in_f) {
            (Some(l), Some(f)) => {
                debug_assert_eq!(l, f);
                l
            }
            (Some(l), None) => {
                if state != Shift::Letters {
                    codes.push(ITA2_LTRS);
                    state = Shift::Letters;
                }
                l
            }
            (None, Some(f)) => {
                if state != Shift::Figures {
                    codes.push(ITA2_FIGS);
                    state = Shift::Figures;
                }
                f
            }
            (None, None) => {
                return Err(Error::UnsupportedCharacter {
                    code: "ITA2",
                    ch,
                    position,
                })
            }
        };
        codes.push(code);
        if usos && code == ITA2_SPACE {
            state = Shift::Letters;
        }
    }
    Ok(SymbolStream::new(codes, 32))
}

/// Decodes ITA2 codes with stateful shift tracking; NUL codes are skipped.
pub fn decode_ita2(codes: &[u8], usos: bool) -> Result<String> {
    let t = table();
    let mut state = Shift::Letters;
    let mut out = String::new();
    for (position, &code) in codes.iter().enumerate() {
        match code {
            ITA2_LTRS => state = Shift::Letters,
            ITA2_FIGS => state = Shift::Figures,
            ITA2_NUL => {}
            _ => {
                let rev = match state {
                    Shift::Letters => &t.letters_rev,
                    Shift::Figures => &t.figures_rev,
                };
                let c = rev.get(&code).ok_or_else(|| Error::InvalidCode {
                    code: "ITA2",
                    position,
                    reason: format!("code {code:#07b} unassigned in {state:?}"),
                })?;
                out.push(*c);
                if usos && code == ITA2_SPACE {
                    state = Shift::Letters;
                }
            }
        }
    }
    Ok(out)
}
