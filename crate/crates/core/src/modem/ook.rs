//! On-off keyed carrier with raised-cosine edges (Morse).

use num_complex::Complex64;

use super::IqWaveform;
use crate::encoding::KeyingEnvelope;
use crate::{Error, Result, SAMPLE_RATE_HZ};

/// Default rise and fall time of a keyed element.
pub const OOK_EDGE_MS: f64 = 5.0;

/// Real envelope in `[0, 1]`. Edges lie inside the ON intervals, so keyed
/// elements are never lengthened.
pub fn ook_envelope(envelope: &KeyingEnvelope, edge_ms: f64) -> Result<Vec<f64>> {
    if envelope.is_empty() {
        return Err(Error::param("envelope", "empty"));
    }
    if !(edge_ms >= 0.0) {
        return Err(Error::param("edge_ms", "must be non-negative"));
    }
    let edge = (edge_ms * SAMPLE_RATE_HZ / 1000.0).round() as usize;
    let mut out = Vec::new();
    let mut t = 0.0;
    for seg in envelope.segments() {
        let a = (t * SAMPLE_RATE_HZ).round() as usize;
        t += seg.duration;
        let b = (t * SAMPLE_RATE_HZ).round() as usize;
        let len = b - a;
        if !seg.on {
            out.resize(out.len() + len, 0.0);
            continue;
        }
        let e = edge.min(len / 2);
        for i in 0..len {
            let from_edge = i.min(len - 1 - i);
            let g = if from_edge < e {
                0.5 - 0.5 * (std::f64::consts::PI * (from_edge as f64 + 0.5) / e as f64).cos()
            } else {
                1.0
            };
            out.push(g);
        }
    }
    Ok(out)
}

pub fn ook_mod(envelope: &KeyingEnvelope, edge_ms: f64) -> Result<IqWaveform> {
    let env = ook_envelope(envelope, edge_ms)?;
    Ok(IqWaveform::new(
        env.into_iter().map(|g| Complex64::new(g, 0.0)).collect(),
    ))
}
