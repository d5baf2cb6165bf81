//! Synthesis of HF transmission modes, HF channel impairments and labelled
//! IQ vector corpora.
//!
//! The pipeline for one record is `encoding` (payload text to code stream),
//! `modem` (code stream to complex baseband at 6 kHz), `channel` (fading,
//! frequency/phase offset, noise) and finally `dataset` (2048-sample window,
//! power normalisation, binary storage).

pub mod channel;
pub mod dataset;
pub mod dsp;
pub mod encoding;
mod error;
pub mod modem;
pub mod seed;

pub use error::{Error, Result};

/// Complex baseband sample rate used throughout, in Hz.
pub const SAMPLE_RATE_HZ: f64 = 6000.0;

/// Number of complex samples in one dataset vector.
pub const VECTOR_LEN: usize = 2048;
