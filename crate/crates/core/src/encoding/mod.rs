//! Character codes and keying streams: Morse timing, PSK31 varicode, ITA2
//! for RTTY and CCIR-476 with SITOR-B repetition for NAVTEX, plus random
//! payload selection from the bundled text corpus.

mod ccir476;
mod ita2;
mod morse;
mod payload;
mod tables;
mod varicode;

pub use ccir476::{
    ccir476_alpha, ccir476_figs, ccir476_ltrs, ccir476_representable, ccir476_rq, decode_ccir476, encode_ccir476,
    encode_ccir476_sitorb, sitor_b_deinterleave, sitor_b_interleave, SITOR_B_REPEAT_DELAY,
};
pub use ita2::{decode_ita2, encode_ita2, ita2_representable, ITA2_FIGS, ITA2_LTRS};
pub use morse::{decode_morse, dit_seconds, encode_morse, morse_representable, KeySegment, KeyingEnvelope};
pub use payload::{random_payload, random_payload_from, Corpus, Payload, PayloadOptions};
pub use varicode::{decode_varicode, encode_varicode, varicode_word};

use crate::{Error, Result};

/// Symbols drawn from `0..alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolStream {
    pub symbols: Vec<u8>,
    pub alphabet_size: usize,
}

impl SymbolStream {
    pub(crate) fn new(symbols: Vec<u8>, alphabet_size: usize) -> Self {
        debug_assert!(symbols.iter().all(|&s| (s as usize) < alphabet_size));
        SymbolStream { symbols, alphabet_size }
    }

    pub fn try_new(symbols: Vec<u8>, alphabet_size: usize) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::param("alphabet_size", "must be at least 2"));
        }
        if let Some(p) = symbols.iter().position(|&s| s as usize >= alphabet_size) {
            return Err(Error::InvalidCode {
                code: "symbol stream",
                position: p,
                reason: format!("symbol {} not below alphabet size {alphabet_size}", symbols[p]),
            });
        }
        Ok(SymbolStream { symbols, alphabet_size })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}
