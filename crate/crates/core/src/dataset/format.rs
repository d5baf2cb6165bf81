use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use num_complex::Complex32;

use crate::modem::MODE_COUNT;
use crate::{Error, Result, SAMPLE_RATE_HZ, VECTOR_LEN};

pub const MAGIC: &[u8; 4] = b"HFDS";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 8 + 4 + 4;
pub const RECORD_LEN: usize = 1 + 1 + 4 + 4 + 8 + VECTOR_LEN * 8;
const SCENARIO_COUNT: u8 = 6;

/// One labelled 2048-sample vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IqVector {
    pub samples: Vec<Complex32>,
    pub label: u8,
    pub scenario: u8,
    pub snr_db: f32,
    pub freq_offset_hz: f32,
    pub seed: u64,
}

impl IqVector {
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.samples.len() != VECTOR_LEN {
            return Err(format!("{} samples, expected {VECTOR_LEN}", self.samples.len()));
        }
        if self.label as usize >= MODE_COUNT {
            return Err(format!("label {} out of range", self.label));
        }
        if self.scenario >= SCENARIO_COUNT {
            return Err(format!("scenario {} out of range", self.scenario));
        }
        if !self.samples.iter().all(|s| s.re.is_finite() && s.im.is_finite()) {
            return Err("non-finite sample".into());
        }
        Ok(())
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr() as f64).sum::<f64>() / self.samples.len() as f64
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(RECORD_LEN);
        buf.push(self.label);
        buf.push(self.scenario);
        buf.extend(self.snr_db.to_le_bytes());
        buf.extend(self.freq_offset_hz.to_le_bytes());
        buf.extend(self.seed.to_le_bytes());
        for s in &self.samples {
            buf.extend(s.re.to_le_bytes());
            buf.extend(s.im.to_le_bytes());
        }
        w.write_all(&buf)
    }

    fn parse(b: &[u8], offset: u64) -> Result<Self> {
        let f32_at = |i: usize| f32::from_le_bytes(b[i..i + 4].try_into().unwrap());
        let samples = (0..VECTOR_LEN)
            .map(|k| Complex32::new(f32_at(18 + 8 * k), f32_at(22 + 8 * k)))
            .collect();
        let v = IqVector {
            label: b[0],
            scenario: b[1],
            snr_db: f32_at(2),
            freq_offset_hz: f32_at(6),
            seed: u64::from_le_bytes(b[10..18].try_into().unwrap()),
            samples,
        };
        v.check().map_err(|r| Error::format(offset, r))?;
        Ok(v)
    }
}

fn header(count: u64) -> Vec<u8> {
    let mut h = Vec::with_capacity(HEADER_LEN);
    h.extend(MAGIC);
    h.extend(FORMAT_VERSION.to_le_bytes());
    h.extend(count.to_le_bytes());
    h.extend((SAMPLE_RATE_HZ as u32).to_le_bytes());
    h.extend((VECTOR_LEN as u32).to_le_bytes());
    h
}

/// Encodes records into the binary dataset format.
pub fn serialize(records: &[IqVector]) -> Result<Vec<u8>> {
    let mut out = header(records.len() as u64);
    out.reserve(records.len() * RECORD_LEN);
    for (i, r) in records.iter().enumerate() {
        r.check()
            .map_err(|e| Error::param("records", format!("record {i}: {e}")))?;
        r.write_to(&mut out)?;
    }
    Ok(out)
}

/// Parses the header and returns the record count.
pub fn parse_header(h: &[u8]) -> Result<u64> {
    if let Some(i) = h.iter().zip(MAGIC).position(|(a, b)| a != b) {
        return Err(Error::format(i as u64, "bad magic, not an HFDS file"));
    }
    if h.len() < HEADER_LEN {
        return Err(Error::format(h.len() as u64, "truncated header"));
    }
    let version = u16::from_le_bytes([h[4], h[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::format(
            4,
            format!("format version {version}, expected {FORMAT_VERSION}"),
        ));
    }
    let count = u64::from_le_bytes(h[6..14].try_into().unwrap());
    let rate = u32::from_le_bytes(h[14..18].try_into().unwrap());
    if rate != SAMPLE_RATE_HZ as u32 {
        return Err(Error::format(
            14,
            format!("sample rate {rate}, expected {SAMPLE_RATE_HZ}"),
        ));
    }
    let len = u32::from_le_bytes(h[18..22].try_into().unwrap());
    if len as usize != VECTOR_LEN {
        return Err(Error::format(18, format!("vector length {len}, expected {VECTOR_LEN}")));
    }
    Ok(count)
}

/// Decodes a complete dataset byte stream.
pub fn load(bytes: &[u8]) -> Result<Vec<IqVector>> {
    read_dataset(bytes)
}

pub fn read_dataset(mut r: impl Read) -> Result<Vec<IqVector>> {
    let mut h = [0u8; HEADER_LEN];
    let got = read_full(&mut r, &mut h)?;
    let count = parse_header(&h[..got])?;
    let mut out = Vec::with_capacity(count.min(1 << 20) as usize);
    let mut rec = vec![0u8; RECORD_LEN];
    for i in 0..count {
        let offset = HEADER_LEN as u64 + i * RECORD_LEN as u64;
        let got = read_full(&mut r, &mut rec)?;
        if got < RECORD_LEN {
            return Err(Error::format(
                offset + got as u64,
                format!("truncated record {i} of {count} (record starts at byte {offset})"),
            ));
        }
        out.push(IqVector::parse(&rec, offset)?);
    }
    let mut extra = [0u8; 1];
    if read_full(&mut r, &mut extra)? > 0 {
        return Err(Error::format(
            HEADER_LEN as u64 + count * RECORD_LEN as u64,
            "trailing bytes after last record",
        ));
    }
    Ok(out)
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> Result<usize> {
    let mut n = 0;
    while n < buf.len() {
        match r.read(&mut buf[n..]) {
            Ok(0) => break,
            Ok(k) => n += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(n)
}

pub fn load_file(path: &Path) -> Result<Vec<IqVector>> {
    let f = File::open(path).map_err(|e| Error::file(path, e))?;
    read_dataset(BufReader::new(f))
}

/// Streams records to a file; the header count is patched on `finish`.
pub struct DatasetWriter {
    out: BufWriter<File>,
    count: u64,
}

impl DatasetWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let f = File::create(path).map_err(|e| Error::file(path, e))?;
        let mut out = BufWriter::new(f);
        out.write_all(&header(0))?;
        Ok(DatasetWriter { out, count: 0 })
    }

    pub fn push(&mut self, r: &IqVector) -> Result<()> {
        r.check()
            .map_err(|e| Error::param("record", format!("record {}: {e}", self.count)))?;
        r.write_to(&mut self.out)?;
        self.count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<u64> {
        self.out.flush()?;
        let mut f = self.out.into_inner().map_err(|e| e.into_error())?;
        f.seek(SeekFrom::Start(6))?;
        f.write_all(&self.count.to_le_bytes())?;
        f.sync_all()?;
        Ok(self.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(seed: u64) -> IqVector {
        IqVector {
            samples: (0..VECTOR_LEN)
                .map(|i| Complex32::new(i as f32 * 0.5 - seed as f32, -(i as f32)))
                .collect(),
            label: (seed % 18) as u8,
            scenario: (seed % 6) as u8,
            snr_db: seed as f32 * 0.25 - 10.0,
            freq_offset_hz: -(seed as f32),
            seed,
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(HEADER_LEN, 22);
        assert_eq!(RECORD_LEN, 16402);
    }

    #[test]
    fn round_trip() {
        let recs: Vec<_> = (0..5).map(rec).collect();
        let bytes = serialize(&recs).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 5 * RECORD_LEN);
        assert_eq!(load(&bytes).unwrap(), recs);
    }

    #[test]
    fn empty_is_header_only() {
        let bytes = serialize(&[]).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert!(load(&bytes).unwrap().is_empty());
    }

    #[test]
    fn truncation_names_offset() {
        let bytes = serialize(&[rec(1), rec(2)]).unwrap();
        let cut = HEADER_LEN + RECORD_LEN + 100;
        match load(&bytes[..cut]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, cut as u64),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = serialize(&[rec(1)]).unwrap();
        bytes[4] = 9;
        assert!(matches!(load(&bytes), Err(Error::Format { offset: 4, .. })));
        bytes[0] = b'X';
        assert!(matches!(load(&bytes), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn invalid_label_rejected() {
        let mut bytes = serialize(&[rec(1)]).unwrap();
        bytes[HEADER_LEN] = 18;
        assert!(matches!(load(&bytes), Err(Error::Format { offset, .. }) if offset == HEADER_LEN as u64));
    }

    #[test]
    fn writer_patches_count() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.hfds");
        let mut w = DatasetWriter::create(&p).unwrap();
        for i in 0..3 {
            w.push(&rec(i)).unwrap();
        }
        assert_eq!(w.finish().unwrap(), 3);
        assert_eq!(load_file(&p).unwrap(), (0..3).map(rec).collect::<Vec<_>>());
    }
}
