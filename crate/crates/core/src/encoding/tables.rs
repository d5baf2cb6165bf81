//! Parser for the bundled code-table assets.
//!
//! Each non-comment line is `character<TAB>pattern`. The character field is a
//! literal character, a `\xHH` escape, or a `<NAME>` control code.

use std::collections::HashMap;

pub(crate) const VARICODE: &str = include_str!("../../assets/varicode.tsv");
pub(crate) const ITA2_LETTERS: &str = include_str!("../../assets/ita2_letters.tsv");
pub(crate) const ITA2_FIGURES: &str = include_str!("../../assets/ita2_figures.tsv");
pub(crate) const CCIR476_LETTERS: &str = include_str!("../../assets/ccir476_letters.tsv");
pub(crate) const CCIR476_FIGURES: &str = include_str!("../../assets/ccir476_figures.tsv");
pub(crate) const MORSE: &str = include_str!("../../assets/morse.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Key {
    Char(char),
    Control(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Entry {
    pub key: Key,
    pub pattern: String,
}

pub(crate) fn parse(src: &str) -> Vec<Entry> {
    let mut out = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (field, pattern) = line
            .split_once('\t')
            .unwrap_or_else(|| panic!("code table line {} has no tab", lineno + 1));
        let key = if let Some(hex) = field.strip_prefix("\\x") {
            let v =
                u32::from_str_radix(hex, 16).unwrap_or_else(|_| panic!("bad escape on code table line {}", lineno + 1));
            Key::Char(char::from_u32(v).expect("escape is a valid char"))
        } else if field.len() > 2 && field.starts_with('<') && field.ends_with('>') {
            Key::Control(field[1..field.len() - 1].to_string())
        } else {
            let mut chars = field.chars();
            let c = chars.next().expect("empty character field");
            assert!(
                chars.next().is_none(),
                "code table line {} has a multi-char field",
                lineno + 1
            );
            Key::Char(c)
        };
        out.push(Entry {
            key,
            pattern: pattern.trim().to_string(),
        });
    }
    out
}

pub(crate) fn parse_binary(pattern: &str) -> u8 {
    u8::from_str_radix(pattern, 2).expect("binary pattern")
}

/// Two-shift code table shared by ITA2 and CCIR-476.
#[derive(Debug)]
pub(crate) struct ShiftTable {
    pub letters: HashMap<char, u8>,
    pub figures: HashMap<char, u8>,
    pub letters_rev: HashMap<u8, char>,
    pub figures_rev: HashMap<u8, char>,
    pub controls: HashMap<String, u8>,
}

impl ShiftTable {
    pub fn build(letters_src: &str, figures_src: &str) -> Self {
        let mut t = ShiftTable {
            letters: HashMap::new(),
            figures: HashMap::new(),
            letters_rev: HashMap::new(),
            figures_rev: HashMap::new(),
            controls: HashMap::new(),
        };
        for (src, fwd, rev) in [
            (letters_src, &mut t.letters, &mut t.letters_rev),
            (figures_src, &mut t.figures, &mut t.figures_rev),
        ] {
            for e in parse(src) {
                let code = parse_binary(&e.pattern);
                match e.key {
                    Key::Char(c) => {
                        fwd.insert(c, code);
                        rev.insert(code, c);
                    }
                    Key::Control(name) => {
                        t.controls.insert(name, code);
                    }
                }
            }
        }
        t
    }

    pub fn control(&self, name: &str) -> u8 {
        self.controls[name]
    }
}
