use std::collections::HashSet;

use hfclass_core::channel::Scenario;
use hfclass_core::dataset::*;
use hfclass_core::modem::{ModeId, MODE_COUNT};
use hfclass_core::Error;
use hfclass_testkit::stats::chi_square_pvalue;

fn small(seed: u64) -> GenerationConfig {
    GenerationConfig {
        master_seed: seed,
        per_mode_count: 5,
        ..Default::default()
    }
}

fn read(dir: &std::path::Path, f: &str) -> Vec<u8> {
    std::fs::read(dir.join(f)).unwrap()
}

#[test]
fn regeneration_is_byte_identical() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    generate(&small(7), a.path()).unwrap();
    // A different worker count must not change the bytes.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    pool.install(|| generate(&small(7), b.path())).unwrap();
    generate(&small(8), c.path()).unwrap();
    for f in [TRAIN_FILE, VAL_FILE, MANIFEST_FILE] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    assert_ne!(read(a.path(), TRAIN_FILE), read(c.path(), TRAIN_FILE));
}

#[test]
fn generated_files_match_manifest_and_plan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(3);
    let manifest = generate(&cfg, dir.path()).unwrap();
    assert_eq!(Manifest::load(&dir.path().join(MANIFEST_FILE)).unwrap(), manifest);
    assert_eq!(manifest.config_digest, cfg.digest());
    assert_eq!(manifest.mode_names.len(), MODE_COUNT);
    let train = load_file(&dir.path().join(TRAIN_FILE)).unwrap();
    let val = load_file(&dir.path().join(VAL_FILE)).unwrap();
    assert_eq!(train.len() as u64, manifest.train.count);
    assert_eq!((train.len(), val.len()), (72, 18));
    let plan = record_plan(&cfg).unwrap();
    let gen = Generator::new(cfg).unwrap();
    for (rec, &(i, m, _)) in train.iter().chain(&val).zip(&plan) {
        assert_eq!(rec.label as usize, m.index());
        assert_eq!(rec.seed, gen.record_seed(i));
        assert!(rec.check().is_ok());
        assert!(rec.snr_db >= -10.0 && rec.snr_db <= 25.0);
        assert!(rec.freq_offset_hz.abs() <= 250.0);
        let p = rec.mean_power();
        assert!(p == 0.0 || (p - 1.0).abs() < 1e-3, "power {p}");
    }
    // Modes are interleaved, not blocked.
    let first: Vec<u8> = train[..MODE_COUNT].iter().map(|r| r.label).collect();
    assert_eq!(first, (0..MODE_COUNT as u8).collect::<Vec<_>>());
    assert_eq!(gen.record(5, ModeId::Psk31, Split::Train).unwrap().samples.len(), 2048);
}

fn bits(r: &IqVector) -> (u8, u8, u32, u32, u64, Vec<(u32, u32)>) {
    (
        r.label,
        r.scenario,
        r.snr_db.to_bits(),
        r.freq_offset_hz.to_bits(),
        r.seed,
        r.samples.iter().map(|s| (s.re.to_bits(), s.im.to_bits())).collect(),
    )
}

#[test]
fn serialize_load_is_bit_exact() {
    let recs = Generator::new(small(11)).unwrap().split(Split::Val).unwrap();
    let bytes = serialize(&recs).unwrap();
    assert_eq!(bytes.len(), HEADER_LEN + recs.len() * RECORD_LEN);
    assert_eq!(&bytes[..4], MAGIC);
    let back = load(&bytes).unwrap();
    assert_eq!(back.len(), recs.len());
    for (a, b) in recs.iter().zip(&back) {
        assert_eq!(bits(a), bits(b));
    }
    assert_eq!(serialize(&back).unwrap(), bytes);
}

#[test]
fn corrupt_files_name_the_offset() {
    let recs = Generator::new(small(12)).unwrap().split(Split::Val).unwrap();
    let bytes = serialize(&recs[..3]).unwrap();

    let cut = HEADER_LEN + RECORD_LEN + 100;
    match load(&bytes[..cut]) {
        Err(Error::Format { offset, .. }) => assert_eq!(offset, cut as u64),
        other => panic!("expected format error, got {other:?}"),
    }
    let mut bad = bytes.clone();
    bad[2] = b'X';
    match load(&bad) {
        Err(Error::Format { offset, .. }) => assert_eq!(offset, 2),
        other => panic!("expected format error, got {other:?}"),
    }
    let mut bad = bytes.clone();
    bad[4] = 9;
    assert!(matches!(load(&bad), Err(Error::Format { .. })));
    let mut bad = bytes.clone();
    bad[HEADER_LEN] = 18;
    match load(&bad) {
        Err(Error::Format { offset, .. }) => assert_eq!(offset, HEADER_LEN as u64),
        other => panic!("expected format error, got {other:?}"),
    }
    let mut long = bytes.clone();
    long.push(0);
    assert!(load(&long).is_err());
}

#[test]
fn snr_uniform_and_scenarios_balanced() {
    let cfg = GenerationConfig {
        master_seed: 2024,
        per_mode_count: 556,
        split_ratio: 1.0,
        ..Default::default()
    };
    let recs = Generator::new(cfg).unwrap().split(Split::Train).unwrap();
    assert!(recs.len() >= 10_000);
    let bins = 35;
    let mut hist = vec![0.0; bins];
    let mut scen = vec![0.0; Scenario::ALL.len()];
    for r in &recs {
        let k = (((r.snr_db as f64 + 10.0) / 35.0 * bins as f64) as usize).min(bins - 1);
        hist[k] += 1.0;
        scen[r.scenario as usize] += 1.0;
    }
    let n = recs.len() as f64;
    let p = chi_square_pvalue(&hist, &vec![n / bins as f64; bins]);
    assert!(p > 0.01, "SNR histogram chi-square p = {p}");
    let p = chi_square_pvalue(&scen, &vec![n / scen.len() as f64; scen.len()]);
    assert!(p > 0.01, "scenario chi-square p = {p}");
}

#[test]
fn batches_cover_every_record_once() {
    let recs = Generator::new(small(13)).unwrap().split(Split::Train).unwrap();
    let batches: Vec<_> = split_iter(&recs, 16, 5).collect();
    assert_eq!(batches.len(), 5);
    assert_eq!(batches.last().unwrap().len(), 72 - 4 * 16);
    let seen: HashSet<u64> = batches.iter().flatten().map(|r| r.seed).collect();
    assert_eq!(seen.len(), recs.len());
    let again: Vec<Vec<u64>> = split_iter(&recs, 16, 5)
        .map(|b| b.iter().map(|r| r.seed).collect())
        .collect();
    let first: Vec<Vec<u64>> = batches.iter().map(|b| b.iter().map(|r| r.seed).collect()).collect();
    assert_eq!(first, again);
    let other: Vec<Vec<u64>> = split_iter(&recs, 16, 6)
        .map(|b| b.iter().map(|r| r.seed).collect())
        .collect();
    assert_ne!(first, other);
}
