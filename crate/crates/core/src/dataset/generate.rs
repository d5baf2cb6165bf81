use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::{Complex32, Complex64};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::format::{DatasetWriter, IqVector, FORMAT_VERSION};
use crate::channel::{impair, ChannelConfig, Scenario, MAX_FREQ_OFFSET_HZ, SNR_RANGE_DB};
use crate::encoding::{Corpus, PayloadOptions};
use crate::modem::{load_audio, load_pbm, ModeId, Modulator, MODE_COUNT};
use crate::{seed, Error, Result, SAMPLE_RATE_HZ, VECTOR_LEN};

pub const TRAIN_FILE: &str = "train.hfds";
pub const VAL_FILE: &str = "val.hfds";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Stream constant separating record seeds from other uses of the master seed.
const RECORD_STREAM: u64 = 0x5245_434f_5244;
/// Records generated per parallel chunk before being written in order.
const WRITE_CHUNK: usize = 256;
const WINDOW_RETRIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// Mono 16-bit audio: `.wav`, or raw little-endian PCM at 6 kHz.
    pub audio_files: Vec<PathBuf>,
    /// PBM bitmaps for the fax mode.
    pub fax_images: Vec<PathBuf>,
    pub speech_fraction: f64,
    /// Chance of using a loaded file instead of a synthetic source.
    pub ingested_fraction: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            audio_files: Vec::new(),
            fax_images: Vec::new(),
            speech_fraction: 0.5,
            ingested_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub master_seed: u64,
    /// Vectors per mode across both splits.
    pub per_mode_count: usize,
    /// Per-mode overrides of `per_mode_count`, keyed by mode name.
    pub mode_counts: BTreeMap<String, usize>,
    /// Fraction of each mode's vectors that go to the training split.
    pub split_ratio: f64,
    pub snr_range_db: [f64; 2],
    /// Scenarios drawn uniformly per vector.
    pub scenarios: Vec<Scenario>,
    pub max_freq_offset_hz: f64,
    /// Length of each synthesized waveform before windowing.
    pub waveform_duration_s: f64,
    pub morse_wpm: [f64; 2],
    pub sources: SourceConfig,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            master_seed: 1,
            per_mode_count: 625,
            mode_counts: BTreeMap::new(),
            split_ratio: 0.8,
            snr_range_db: [SNR_RANGE_DB.0, SNR_RANGE_DB.1],
            scenarios: Scenario::ALL.to_vec(),
            max_freq_offset_hz: MAX_FREQ_OFFSET_HZ,
            waveform_duration_s: 0.6,
            morse_wpm: [15.0, 30.0],
            sources: SourceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
}

impl GenerationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: GenerationConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads a config file; relative source paths resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let mut c = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in c.sources.audio_files.iter_mut().chain(c.sources.fax_images.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, why: String| Err(Error::param(name, why));
        let counts = self.mode_totals()?;
        if counts.iter().all(|&c| c == 0) {
            return bad("per_mode_count", "no vectors requested".into());
        }
        if !(self.split_ratio > 0.0 && self.split_ratio <= 1.0) {
            return bad("split_ratio", format!("{} not in (0, 1]", self.split_ratio));
        }
        let [lo, hi] = self.snr_range_db;
        if !(SNR_RANGE_DB.0 <= lo && lo <= hi && hi <= SNR_RANGE_DB.1) {
            return bad(
                "snr_range_db",
                format!(
                    "[{lo}, {hi}] must be ordered and inside [{}, {}]",
                    SNR_RANGE_DB.0, SNR_RANGE_DB.1
                ),
            );
        }
        if self.scenarios.is_empty() {
            return bad("scenarios", "empty".into());
        }
        if !(0.0..=MAX_FREQ_OFFSET_HZ).contains(&self.max_freq_offset_hz) {
            return bad(
                "max_freq_offset_hz",
                format!("{} not in [0, 250]", self.max_freq_offset_hz),
            );
        }
        let min_len = 1.5 * VECTOR_LEN as f64 / SAMPLE_RATE_HZ;
        if !(self.waveform_duration_s >= min_len.max(crate::modem::MIN_DURATION_S)) {
            return bad(
                "waveform_duration_s",
                format!(
                    "{} shorter than 1.5 vector lengths ({min_len:.3} s)",
                    self.waveform_duration_s
                ),
            );
        }
        let [wlo, whi] = self.morse_wpm;
        if !(5.0 <= wlo && wlo <= whi && whi <= 60.0) {
            return bad("morse_wpm", format!("[{wlo}, {whi}] not inside [5, 60]"));
        }
        for (name, v) in [
            ("sources.speech_fraction", self.sources.speech_fraction),
            ("sources.ingested_fraction", self.sources.ingested_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(name, format!("{v} not in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Total vectors per mode, in label order.
    pub fn mode_totals(&self) -> Result<Vec<usize>> {
        let mut totals = vec![self.per_mode_count; MODE_COUNT];
        for (name, &c) in &self.mode_counts {
            let m: ModeId = name.parse()?;
            totals[m.index()] = c;
        }
        Ok(totals)
    }

    /// Per-mode counts of each split.
    pub fn split_counts(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        let totals = self.mode_totals()?;
        let train: Vec<usize> = totals
            .iter()
            .map(|&t| ((t as f64 * self.split_ratio).round() as usize).min(t))
            .collect();
        let val = totals.iter().zip(&train).map(|(t, tr)| t - tr).collect();
        Ok((train, val))
    }
}

/// Labels of one split, interleaved round-robin over modes.
fn interleave(counts: &[usize]) -> Vec<ModeId> {
    let mut left = counts.to_vec();
    let mut out = Vec::with_capacity(counts.iter().sum());
    while left.iter().any(|&c| c > 0) {
        for (i, c) in left.iter_mut().enumerate() {
            if *c > 0 {
                *c -= 1;
                out.push(ModeId::ALL[i]);
            }
        }
    }
    out
}

/// Fixed record order: training records get global indices `0..T`,
/// validation records `T..T+V`.
pub fn record_plan(config: &GenerationConfig) -> Result<Vec<(u64, ModeId, Split)>> {
    let (train, val) = config.split_counts()?;
    let t = interleave(&train);
    let v = interleave(&val);
    let nt = t.len() as u64;
    Ok(t.into_iter()
        .enumerate()
        .map(|(i, m)| (i as u64, m, Split::Train))
        .chain(v.into_iter().enumerate().map(|(i, m)| (nt + i as u64, m, Split::Val)))
        .collect())
}

/// Everything needed to synthesize records for one config.
pub struct Generator {
    config: GenerationConfig,
    train: Modulator,
    val: Modulator,
}

/// Share of the corpus text reserved for validation payloads.
pub const VAL_TEXT_FRACTION: f64 = 0.2;

impl Generator {
    pub fn new(config: GenerationConfig) -> Result<Self> {
        config.validate()?;
        let audio_clips = config
            .sources
            .audio_files
            .iter()
            .map(|p| load_audio(p).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let fax_images = config
            .sources
            .fax_images
            .iter()
            .map(|p| load_pbm(p).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let corpus = Corpus::bundled();
        let make = |c: Corpus| Modulator {
            payload: PayloadOptions {
                corpus: c,
                morse_wpm: (config.morse_wpm[0], config.morse_wpm[1]),
                rtty_usos: false,
            },
            speech_fraction: config.sources.speech_fraction,
            audio_clips: audio_clips.clone(),
            fax_images: fax_images.clone(),
            ingested_fraction: config.sources.ingested_fraction,
            ..Modulator::default()
        };
        Ok(Generator {
            train: make(corpus.slice(0.0, 1.0 - VAL_TEXT_FRACTION)),
            val: make(corpus.slice(1.0 - VAL_TEXT_FRACTION, 1.0)),
            config,
        })
    }

    pub fn config(&self) -> &GenerationConfig {
        &self.config
    }

    pub fn record_seed(&self, index: u64) -> u64 {
        seed::derive(seed::derive(self.config.master_seed, RECORD_STREAM), index)
    }

    /// Record `index` of the plan; depends only on the config and `index`.
    pub fn record(&self, index: u64, mode: ModeId, split: Split) -> Result<IqVector> {
        let rec_seed = self.record_seed(index);
        let c = &self.config;
        let mut rng = seed::rng(seed::derive(rec_seed, seed::stream::SCENARIO));
        let scenario = c.scenarios[rng.random_range(0..c.scenarios.len())];
        let [lo, hi] = c.snr_range_db;
        let snr_db = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let f = c.max_freq_offset_hz;
        let freq_offset_hz = if f > 0.0 { rng.random_range(-f..=f) } else { 0.0 };
        let phase_offset_rad = rng.random_range(0.0..std::f64::consts::TAU);

        let modulator = match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
        };
        let wave = modulator.modulate(&mode.spec(), c.waveform_duration_s, rec_seed)?;
        let channel = ChannelConfig {
            scenario,
            snr_db,
            freq_offset_hz,
            phase_offset_rad,
            seed: seed::derive(rec_seed, seed::stream::CHANNEL),
        };
        let rx = impair(&wave, &channel)?;

        let mut wrng = seed::rng(seed::derive(rec_seed, seed::stream::WINDOW));
        let last = rx.len() - VECTOR_LEN;
        let mut window: Vec<Complex64> = Vec::new();
        for _ in 0..=WINDOW_RETRIES {
            let start = wrng.random_range(0..=last);
            window = rx.samples[start..start + VECTOR_LEN].to_vec();
            if crate::dsp::mean_power(&window) > 0.0 {
                break;
            }
        }
        // A silent window is kept as is.
        let _ = crate::dsp::normalize_power(&mut window);
        Ok(IqVector {
            samples: window
                .iter()
                .map(|s| Complex32::new(s.re as f32, s.im as f32))
                .collect(),
            label: mode.index() as u8,
            scenario: scenario.index() as u8,
            snr_db: snr_db as f32,
            freq_offset_hz: freq_offset_hz as f32,
            seed: rec_seed,
        })
    }

    /// All records of one split, in plan order.
    pub fn split(&self, split: Split) -> Result<Vec<IqVector>> {
        let plan: Vec<_> = record_plan(&self.config)?
            .into_iter()
            .filter(|p| p.2 == split)
            .collect();
        plan.par_iter().map(|&(i, m, s)| self.record(i, m, s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub file: String,
    pub count: u64,
    /// Vectors per mode in label order.
    pub per_mode: Vec<usize>,
}

/// Written next to the data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u16,
    pub sample_rate_hz: u32,
    pub vector_len: u32,
    /// Label `i` is `mode_names[i]`.
    pub mode_names: Vec<String>,
    pub scenario_names: Vec<String>,
    pub config_digest: String,
    pub train: SplitSummary,
    pub val: SplitSummary,
    pub config: GenerationConfig,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::file(path, e))
    }
}

/// Generates both splits into `out_dir`, streaming records to disk in index
/// order. Output bytes do not depend on the number of worker threads.
pub fn generate(config: &GenerationConfig, out_dir: &Path) -> Result<Manifest> {
    generate_with_progress(config, out_dir, |_, _| {})
}

pub fn generate_with_progress(
    config: &GenerationConfig,
    out_dir: &Path,
    mut progress: impl FnMut(usize, usize),
) -> Result<Manifest> {
    let gen = Generator::new(config.clone())?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::file(out_dir, e))?;
    let plan = record_plan(config)?;
    let total = plan.len();
    let (train_counts, val_counts) = config.split_counts()?;
    let mut done = 0;
    let mut summaries = Vec::new();
    for (split, file, per_mode) in [
        (Split::Train, TRAIN_FILE, train_counts),
        (Split::Val, VAL_FILE, val_counts),
    ] {
        let path = out_dir.join(file);
        let mut w = DatasetWriter::create(&path)?;
        let items: Vec<_> = plan.iter().filter(|p| p.2 == split).copied().collect();
        for chunk in items.chunks(WRITE_CHUNK) {
            let recs: Vec<IqVector> = chunk
                .par_iter()
                .map(|&(i, m, s)| gen.record(i, m, s))
                .collect::<Result<_>>()?;
            for r in &recs {
                w.push(r)?;
            }
            done += chunk.len();
            progress(done, total);
        }
        let count = w.finish()?;
        summaries.push(SplitSummary {
            file: file.to_string(),
            count,
            per_mode,
        });
    }
    let val = summaries.pop().unwrap();
    let train = summaries.pop().unwrap();
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        sample_rate_hz: SAMPLE_RATE_HZ as u32,
        vector_len: VECTOR_LEN as u32,
        mode_names: ModeId::ALL.iter().map(|m| m.name().to_string()).collect(),
        scenario_names: Scenario::ALL.iter().map(|s| s.name().to_string()).collect(),
        config_digest: config.digest(),
        train,
        val,
        config: config.clone(),
    };
    manifest.save(&out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}
