//! Matched reference demodulators for clean baseband waveforms at 6 kHz.

use num_complex::Complex64;

use crate::linalg::solve;
use crate::FS;

fn symbol_start(k: usize, baud: f64) -> usize {
    (k as f64 * FS / baud).round() as usize
}

/// Differential phase steps (units of 2π/order) read at the last sample of
/// each symbol. The reference before the first symbol is `x[0]`.
pub fn psk_steps(x: &[Complex64], baud: f64, order: usize) -> Vec<u8> {
    let mut out = Vec::new();
    let mut prev = x[0];
    let unit = std::f64::consts::TAU / order as f64;
    let mut k = 0;
    loop {
        let end = symbol_start(k + 1, baud);
        if end > x.len() {
            break;
        }
        let cur = x[end - 1];
        let d = (cur * prev.conj()).arg();
        out.push(((d / unit).round() as i64).rem_euclid(order as i64) as u8);
        prev = cur;
        k += 1;
    }
    out
}

/// PSK31 bits: a reversal is a zero.
pub fn bpsk_bits(x: &[Complex64], baud: f64) -> Vec<u8> {
    psk_steps(x, baud, 2).into_iter().map(|s| (s == 0) as u8).collect()
}

/// QPSK31 bits: phase step to code pair (standard table), then the K=5
/// rate-1/2 code with generators 0x19/0x17 undone by tracking the register.
pub fn qpsk31_bits(x: &[Complex64], baud: f64) -> Option<Vec<u8>> {
    // Phase step in quarter turns -> encoder output pair.
    const STEP_TO_PAIR: [u8; 4] = [3, 1, 0, 2];
    let parity = |v: u32| (v.count_ones() & 1) as u8;
    let mut sr = 0u32;
    let mut bits = Vec::new();
    for step in psk_steps(x, baud, 4) {
        let pair = STEP_TO_PAIR[step as usize];
        let mut found = None;
        for b in 0..2u32 {
            let next = ((sr << 1) | b) & 0x1f;
            if (parity(next & 0x19) << 1) | parity(next & 0x17) == pair {
                found = Some((b as u8, next));
            }
        }
        let (b, next) = found?;
        bits.push(b);
        sr = next;
    }
    Some(bits)
}

/// Instantaneous frequency between samples `n` and `n+1`.
fn inst_freq(x: &[Complex64], n: usize) -> f64 {
    (x[n + 1] * x[n].conj()).arg() * FS / std::f64::consts::TAU
}

/// Mean discriminator output over the middle half of `[a, b)`.
fn mean_freq(x: &[Complex64], a: f64, b: f64) -> f64 {
    let q = (b - a) / 4.0;
    let lo = (a + q).round() as usize;
    let hi = ((b - q).round() as usize).min(x.len() - 1);
    if hi <= lo {
        return 0.0;
    }
    (lo..hi).map(|n| inst_freq(x, n)).sum::<f64>() / (hi - lo) as f64
}

/// Asynchronous receiver: waits for a mark-to-space edge in the smoothed
/// discriminator, samples `data_bits` data bits at their centres (least
/// significant first) and checks the stop bit.
pub fn fsk_async_codes(x: &[Complex64], baud: f64, data_bits: u32) -> Vec<u8> {
    let bit = FS / baud;
    let w = ((bit / 8.0).round() as usize).max(1);
    if x.len() < w + 2 {
        return Vec::new();
    }
    let f: Vec<f64> = (0..x.len() - 1).map(|n| inst_freq(x, n)).collect();
    // Moving average over `w` samples starting at n.
    let mut smooth = Vec::with_capacity(f.len() - w + 1);
    let mut acc: f64 = f[..w].iter().sum();
    smooth.push(acc / w as f64);
    for n in w..f.len() {
        acc += f[n] - f[n - w];
        smooth.push(acc / w as f64);
    }
    let mut out = Vec::new();
    let mut n = 0usize;
    while n < smooth.len() {
        if smooth[n] >= 0.0 {
            n += 1;
            continue;
        }
        // The window average turns negative about half a window before the edge.
        let start = n as f64 + 0.5 * w as f64;
        let frame_end = start + (data_bits as f64 + 2.0) * bit;
        if frame_end.ceil() as usize >= x.len() {
            break;
        }
        if mean_freq(x, start, start + bit) >= 0.0 {
            n += 1;
            continue;
        }
        let mut code = 0u8;
        for i in 0..data_bits {
            let a = start + (i as f64 + 1.0) * bit;
            if mean_freq(x, a, a + bit) > 0.0 {
                code |= 1 << i;
            }
        }
        let stop_a = start + (data_bits as f64 + 1.0) * bit;
        if mean_freq(x, stop_a, stop_a + bit) <= 0.0 {
            n += 1;
            continue;
        }
        out.push(code);
        n = (stop_a + 0.5 * bit) as usize;
    }
    out
}

/// Synchronous receiver from sample 0, `bits` per code, most significant first.
pub fn fsk_sync_codes(x: &[Complex64], baud: f64, bits: u32) -> Vec<u8> {
    let bit = FS / baud;
    let total = (x.len() as f64 / bit + 1e-9).floor() as usize;
    let decisions: Vec<u8> = (0..total)
        .map(|k| (mean_freq(x, k as f64 * bit, (k + 1) as f64 * bit) > 0.0) as u8)
        .collect();
    decisions
        .chunks_exact(bits as usize)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect()
}

/// Strongest tone in each symbol period; tone `i` sits at
/// `(i - (tones-1)/2) * spacing`.
pub fn mfsk_tones(x: &[Complex64], baud: f64, tones: usize, spacing: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let (a, b) = (symbol_start(k, baud), symbol_start(k + 1, baud));
        if b > x.len() {
            break;
        }
        let best = (0..tones)
            .map(|t| {
                let f = (t as f64 - (tones as f64 - 1.0) / 2.0) * spacing;
                let w = std::f64::consts::TAU * f / FS;
                let c: Complex64 = (a..b).map(|n| x[n] * Complex64::from_polar(1.0, -w * n as f64)).sum();
                (t, c.norm())
            })
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap()
            .0;
        out.push(best);
        k += 1;
    }
    out
}

/// Undoes incremental frequency keying (start tone 0, offset 2).
pub fn ifk_symbols(tones_seq: &[usize], tones: usize) -> Vec<usize> {
    let mut prev = 0;
    tones_seq
        .iter()
        .map(|&t| {
            let s = (t + 2 * tones - prev - 2) % tones;
            prev = t;
            s
        })
        .collect()
}

/// Differential BPSK on `carriers` parallel carriers with cosine symbol
/// transitions. Carrier spacing is narrower than one symbol can resolve, so
/// the whole waveform is fitted at once: each carrier is a sum of tent
/// pulses (rising `w` in symbol k-1, falling `1-w` in symbol k) with one
/// complex amplitude per symbol boundary. A bit is one when consecutive
/// amplitudes have opposite sign. Independent of the initial carrier phases.
pub fn multicarrier_bits(x: &[Complex64], carriers: usize, baud: f64, bandwidth: f64) -> Vec<u8> {
    let spacing = bandwidth / carriers as f64;
    let mut n_sym = 0;
    while symbol_start(n_sym + 1, baud) <= x.len() {
        n_sym += 1;
    }
    if n_sym == 0 {
        return Vec::new();
    }
    let unknowns = carriers * (n_sym + 1);
    let mut gram = vec![Complex64::new(0.0, 0.0); unknowns * unknowns];
    let mut rhs = vec![Complex64::new(0.0, 0.0); unknowns];
    let mut row = vec![Complex64::new(0.0, 0.0); 2 * carriers];
    for k in 0..n_sym {
        let (a, b) = (symbol_start(k, baud), symbol_start(k + 1, baud));
        let len = b - a;
        // Columns of boundary k then boundary k+1.
        let base = k * carriers;
        for i in 0..len {
            let w = 0.5 - 0.5 * (std::f64::consts::PI * (i + 1) as f64 / len as f64).cos();
            let n = (a + i) as f64;
            for c in 0..carriers {
                let f = (c as f64 - (carriers as f64 - 1.0) / 2.0) * spacing;
                let e = Complex64::from_polar(1.0, std::f64::consts::TAU * f * n / FS);
                row[c] = e * (1.0 - w);
                row[carriers + c] = e * w;
            }
            for p in 0..2 * carriers {
                let cp = row[p].conj();
                rhs[base + p] += cp * x[a + i];
                let g = &mut gram[(base + p) * unknowns + base..(base + p) * unknowns + base + 2 * carriers];
                for (gq, rq) in g.iter_mut().zip(&row) {
                    *gq += cp * rq;
                }
            }
        }
    }
    let amp = solve(&mut gram, &mut rhs, unknowns).expect("solvable");
    let mut bits = Vec::with_capacity(n_sym * carriers);
    for k in 0..n_sym {
        for c in 0..carriers {
            let r = amp[(k + 1) * carriers + c] / amp[k * carriers + c];
            bits.push((r.re < 0.0) as u8);
        }
    }
    bits
}

/// Keyed intervals of an OOK waveform as (on, seconds): the envelope is
/// smoothed over 2 ms and split at half its peak.
pub fn ook_segments(x: &[Complex64]) -> Vec<(bool, f64)> {
    let w = 12usize;
    let env: Vec<f64> = x.iter().map(|s| s.norm()).collect();
    let smooth: Vec<f64> = (0..env.len())
        .map(|n| {
            let a = n.saturating_sub(w / 2);
            let b = (n + w / 2).min(env.len());
            env[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect();
    let peak = smooth.iter().cloned().fold(0.0, f64::max);
    let mut out: Vec<(bool, f64)> = Vec::new();
    for &e in &smooth {
        let on = e > 0.5 * peak;
        match out.last_mut() {
            Some(last) if last.0 == on => last.1 += 1.0 / FS,
            _ => out.push((on, 1.0 / FS)),
        }
    }
    out
}
