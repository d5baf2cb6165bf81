//! PSK31 varicode.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::tables::{self, Key};
use crate::{Error, Result};

struct Varicode {
    words: Vec<Vec<u8>>,
    reverse: HashMap<Vec<u8>, char>,
}

fn table() -> &'static Varicode {
    static TABLE: OnceLock<Varicode> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut words = vec![Vec::new(); 128];
        let mut reverse = HashMap::new();
        for e in tables::parse(tables::VARICODE) {
            let Key::Char(c) = e.key else {
                panic!("control entry in varicode table")
            };
            let bits: Vec<u8> = e.pattern.bytes().map(|b| b - b'0').collect();
            reverse.insert(bits.clone(), c);
            words[c as usize] = bits;
        }
        assert!(words.iter().all(|w| !w.is_empty()), "varicode table must cover ASCII");
        Varicode { words, reverse }
    })
}

/// Code word for one character, or `None` outside 7-bit ASCII.
pub fn varicode_word(c: char) -> Option<&'static [u8]> {
    let i = c as usize;
    (i < 128).then(|| table().words[i].as_slice())
}

/// Encodes text to varicode bits; every code word is followed by `00`.
pub fn encode_varicode(text: &str) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(text.len() * 10);
    for (position, ch) in text.chars().enumerate() {
        let word = varicode_word(ch).ok_or(Error::UnsupportedCharacter {
            code: "varicode",
            ch,
            position,
        })?;
        bits.extend_from_slice(word);
        bits.extend_from_slice(&[0, 0]);
    }
    Ok(bits)
}

/// Decodes a clean varicode bit stream. Runs of two or more zeros separate
/// characters; leading and trailing idle zeros are ignored.
pub fn decode_varicode(bits: &[u8]) -> Result<String> {
    let mut out = String::new();
    let mut word: Vec<u8> = Vec::new();
    let mut zeros = 0usize;
    let mut flush = |word: &mut Vec<u8>, position: usize| -> Result<()> {
        if word.is_empty() {
            return Ok(());
        }
        let c = table().reverse.get(word.as_slice()).ok_or_else(|| Error::InvalidCode {
            code: "varicode",
            position,
            reason: format!("unknown code word {word:?}"),
        })?;
        out.push(*c);
        word.clear();
        Ok(())
    };
    for (i, &b) in bits.iter().enumerate() {
        if b == 1 {
            if zeros == 1 {
                word.push(0);
            }
            zeros = 0;
            word.push(1);
        } else {
            zeros += 1;
            if zeros == 2 {
                flush(&mut word, i)?;
            }
        }
    }
    flush(&mut word, bits.len())?;
    Ok(out)
}
