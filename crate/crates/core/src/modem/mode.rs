use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// The 18 transmission modes. Declaration order defines the label index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeId {
    Morse,
    Psk31,
    Psk63,
    Qpsk31,
    Rtty45,
    Rtty50,
    Rtty100,
    #[serde(rename = "olivia8_250")]
    Olivia8_250,
    #[serde(rename = "olivia16_500")]
    Olivia16_500,
    #[serde(rename = "olivia16_1000")]
    Olivia16_1000,
    #[serde(rename = "olivia32_1000")]
    Olivia32_1000,
    #[serde(rename = "dominoex11")]
    DominoEx11,
    #[serde(rename = "mt63_1000")]
    Mt63_1000,
    Navtex,
    Usb,
    Lsb,
    Am,
    Fax,
}

pub const MODE_COUNT: usize = 18;

impl ModeId {
    pub const ALL: [ModeId; MODE_COUNT] = [
        ModeId::Morse,
        ModeId::Psk31,
        ModeId::Psk63,
        ModeId::Qpsk31,
        ModeId::Rtty45,
        ModeId::Rtty50,
        ModeId::Rtty100,
        ModeId::Olivia8_250,
        ModeId::Olivia16_500,
        ModeId::Olivia16_1000,
        ModeId::Olivia32_1000,
        ModeId::DominoEx11,
        ModeId::Mt63_1000,
        ModeId::Navtex,
        ModeId::Usb,
        ModeId::Lsb,
        ModeId::Am,
        ModeId::Fax,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ModeId> {
        Self::ALL.get(i).copied()
    }

    /// Stable identifier used in config files, manifests and CSV headers.
    pub fn name(self) -> &'static str {
        match self {
            ModeId::Morse => "morse",
            ModeId::Psk31 => "psk31",
            ModeId::Psk63 => "psk63",
            ModeId::Qpsk31 => "qpsk31",
            ModeId::Rtty45 => "rtty45",
            ModeId::Rtty50 => "rtty50",
            ModeId::Rtty100 => "rtty100",
            ModeId::Olivia8_250 => "olivia8_250",
            ModeId::Olivia16_500 => "olivia16_500",
            ModeId::Olivia16_1000 => "olivia16_1000",
            ModeId::Olivia32_1000 => "olivia32_1000",
            ModeId::DominoEx11 => "dominoex11",
            ModeId::Mt63_1000 => "mt63_1000",
            ModeId::Navtex => "navtex",
            ModeId::Usb => "usb",
            ModeId::Lsb => "lsb",
            ModeId::Am => "am",
            ModeId::Fax => "fax",
        }
    }

    pub fn spec(self) -> ModeSpec {
        ModeSpec::of(self)
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        ModeId::ALL
            .into_iter()
            .find(|m| m.name().replace('_', "") == norm)
            .ok_or_else(|| {
                let names: Vec<_> = ModeId::ALL.iter().map(|m| m.name()).collect();
                Error::Config(format!("unknown mode `{s}`; valid modes: {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Ook,
    Psk,
    Qpsk,
    Fsk,
    Mfsk,
    Multicarrier,
    SsbUsb,
    SsbLsb,
    Am,
    Fax,
}

/// Synthesis constants of one mode. Frequencies in Hz, rates in baud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub mode_id: ModeId,
    pub family: Family,
    pub baud: Option<f64>,
    pub shift_hz: Option<f64>,
    pub tones: Option<usize>,
    pub tone_spacing_hz: Option<f64>,
    pub carriers: Option<usize>,
    /// Incremental frequency keying (DominoEx).
    pub ifk: bool,
}

/// DominoEx 11 symbol rate: 11025 Hz / 1024.
pub const DOMINOEX11_BAUD: f64 = 11025.0 / 1024.0;

impl ModeSpec {
    const fn base(mode_id: ModeId, family: Family) -> Self {
        ModeSpec {
            mode_id,
            family,
            baud: None,
            shift_hz: None,
            tones: None,
            tone_spacing_hz: None,
            carriers: None,
            ifk: false,
        }
    }

    pub fn of(mode: ModeId) -> Self {
        use Family::*;
        let b = Self::base(mode, Psk);
        let fsk = |baud: f64, shift: f64| ModeSpec {
            family: Fsk,
            baud: Some(baud),
            shift_hz: Some(shift),
            ..b
        };
        let mfsk = |tones: usize, bandwidth: f64| {
            let spacing = bandwidth / tones as f64;
            ModeSpec {
                family: Mfsk,
                baud: Some(spacing),
                tones: Some(tones),
                tone_spacing_hz: Some(spacing),
                ..b
            }
        };
        match mode {
            ModeId::Morse => Self::base(mode, Ook),
            ModeId::Psk31 => ModeSpec { baud: Some(31.25), ..b },
            ModeId::Psk63 => ModeSpec { baud: Some(62.5), ..b },
            ModeId::Qpsk31 => ModeSpec {
                family: Qpsk,
                baud: Some(31.25),
                ..b
            },
            ModeId::Rtty45 => fsk(45.45, 170.0),
            ModeId::Rtty50 => fsk(50.0, 170.0),
            ModeId::Rtty100 => fsk(100.0, 850.0),
            ModeId::Navtex => fsk(100.0, 170.0),
            ModeId::Olivia8_250 => mfsk(8, 250.0),
            ModeId::Olivia16_500 => mfsk(16, 500.0),
            ModeId::Olivia16_1000 => mfsk(16, 1000.0),
            ModeId::Olivia32_1000 => mfsk(32, 1000.0),
            ModeId::DominoEx11 => ModeSpec {
                family: Mfsk,
                baud: Some(DOMINOEX11_BAUD),
                tones: Some(18),
                tone_spacing_hz: Some(DOMINOEX11_BAUD),
                ifk: true,
                ..b
            },
            ModeId::Mt63_1000 => ModeSpec {
                family: Multicarrier,
                baud: Some(10.0),
                carriers: Some(64),
                tone_spacing_hz: Some(1000.0 / 64.0),
                ..b
            },
            ModeId::Usb => Self::base(mode, SsbUsb),
            ModeId::Lsb => Self::base(mode, SsbLsb),
            ModeId::Am => Self::base(mode, Am),
            ModeId::Fax => Self::base(mode, Fax),
        }
    }

    pub fn is_digital(&self) -> bool {
        self.baud.is_some() || self.family == Family::Ook
    }
}
