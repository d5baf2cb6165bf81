//! International Morse code keying.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::tables::{self, Key};
use crate::{Error, Result};

/// One constant-level stretch of an on/off keying envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeySegment {
    pub on: bool,
    pub duration: f64,
}

/// Alternating on/off segments. `push` merges equal neighbours, so the
/// alternation invariant holds by construction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyingEnvelope {
    segments: Vec<KeySegment>,
}

impl KeyingEnvelope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, on: bool, duration: f64) {
        if duration <= 0.0 {
            return;
        }
        match self.segments.last_mut() {
            Some(last) if last.on == on => last.duration += duration,
            _ => self.segments.push(KeySegment { on, duration }),
        }
    }

    pub fn segments(&self) -> &[KeySegment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn on_duration(&self) -> f64 {
        self.segments.iter().filter(|s| s.on).map(|s| s.duration).sum()
    }

    pub fn extend(&mut self, other: &KeyingEnvelope) {
        for s in &other.segments {
            self.push(s.on, s.duration);
        }
    }
}

struct MorseTable {
    forward: HashMap<char, &'static str>,
    reverse: HashMap<&'static str, char>,
}

fn table() -> &'static MorseTable {
    static TABLE: OnceLock<MorseTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut forward = HashMap::new();
        let mut reverse = HashMap::new();
        for e in tables::parse(tables::MORSE) {
            let Key::Char(c) = e.key else {
                panic!("control entry in Morse table")
            };
            let pat: &'static str = Box::leak(e.pattern.into_boxed_str());
            forward.insert(c, pat);
            reverse.insert(pat, c);
        }
        MorseTable { forward, reverse }
    })
}

pub fn morse_representable(c: char) -> bool {
    c == ' ' || table().forward.contains_key(&c.to_ascii_uppercase())
}

/// Dit length in seconds at `wpm` words per minute (PARIS standard).
pub fn dit_seconds(wpm: f64) -> f64 {
    1.2 / wpm
}

/// Keys `text` at `wpm`. Letters are case-insensitive; runs of whitespace
/// form a single word gap and leading/trailing whitespace is dropped.
pub fn encode_morse(text: &str, wpm: f64) -> Result<KeyingEnvelope> {
    if !(5.0..=60.0).contains(&wpm) {
        return Err(Error::param("wpm", format!("{wpm} outside [5, 60]")));
    }
    let dit = dit_seconds(wpm);
    let t = table();
    let mut env = KeyingEnvelope::new();
    let mut pending_gap = 0.0;
    let mut position = 0usize;
    for word in text.split(|c: char| c.is_whitespace()) {
        let start = position;
        position += word.chars().count() + 1;
        if word.is_empty() {
            continue;
        }
        if !env.is_empty() {
            pending_gap = 7.0;
        }
        for (k, ch) in word.chars().enumerate() {
            let pattern = t
                .forward
                .get(&ch.to_ascii_uppercase())
                .ok_or(Error::UnsupportedCharacter {
                    code: "Morse",
                    ch,
                    position: start + k,
                })?;
            if k > 0 {
                pending_gap = 3.0;
            }
            for (e, el) in pattern.chars().enumerate() {
                if e > 0 {
                    pending_gap = 1.0;
                }
                env.push(false, pending_gap * dit);
                pending_gap = 0.0;
                env.push(true, if el == '-' { 3.0 } else { 1.0 } * dit);
            }
        }
    }
    Ok(env)
}

/// Decodes an envelope keyed at `wpm` by classifying segment lengths in dit
/// units (on: < 2 dit, else dah; off: < 2 element gap, < 5 letter gap, else
/// word gap).
pub fn decode_morse(env: &KeyingEnvelope, wpm: f64) -> Result<String> {
    let dit = dit_seconds(wpm);
    let t = table();
    let mut out = String::new();
    let mut letter = String::new();
    let flush = |letter: &mut String, out: &mut String, position: usize| -> Result<()> {
        if letter.is_empty() {
            return Ok(());
        }
        let c = t.reverse.get(letter.as_str()).ok_or_else(|| Error::InvalidCode {
            code: "Morse",
            position,
            reason: format!("unknown element group {letter}"),
        })?;
        out.push(*c);
        letter.clear();
        Ok(())
    };
    for (i, s) in env.segments().iter().enumerate() {
        let units = s.duration / dit;
        if s.on {
            letter.push(if units < 2.0 { '.' } else { '-' });
        } else if units >= 2.0 {
            flush(&mut letter, &mut out, i)?;
            if units >= 5.0 && !out.is_empty() {
                out.push(' ');
            }
        }
    }
    flush(&mut letter, &mut out, env.segments().len())?;
    Ok(out)
}
