use hfclass_core::dataset::{GenerationConfig, Generator, Manifest, Split};
use hfclass_core::modem::ModeId;
use hfclass_eval::*;
use hfclass_nn::{Arch, ArchConfig, Model};
use rand::Rng as _;

const K: usize = 18;

fn names() -> Vec<String> {
    (0..K)
        .map(|i| ModeId::from_index(i).unwrap().name().to_string())
        .collect()
}

#[test]
fn oracle_predictor_is_perfect() {
    let labels: Vec<usize> = (0..360).map(|i| i % K).collect();
    let snr: Vec<f64> = (0..360).map(|i| -10.0 + (i % 35) as f64).collect();
    let r = report_from_predictions(K, &labels, &labels, &snr).unwrap();
    assert_eq!(r.overall_accuracy, 1.0);
    assert_eq!(r.total, 360);
    for (i, row) in r.confusion.iter().enumerate() {
        assert_eq!(row.iter().sum::<u64>(), 20);
        assert_eq!(row[i], 20);
    }
    let curve = accuracy_over_snr(&r);
    assert_eq!(curve.rows.len(), SNR_BINS);
    assert!(curve.rows.iter().all(|b| b.accuracy == 1.0));
    assert_eq!(curve.rows.iter().map(|b| b.count).sum::<u64>(), 360);
    assert!(r.per_class_recall().iter().all(|&x| x == Some(1.0)));
}

#[test]
fn uniform_guessing_scores_one_in_eighteen() {
    let n = 36_000;
    let mut rng = hfclass_core::seed::rng(11);
    let labels: Vec<usize> = (0..n).map(|i| i % K).collect();
    let guess: Vec<usize> = (0..n).map(|_| rng.random_range(0..K)).collect();
    let snr: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..25.0)).collect();
    let r = report_from_predictions(K, &labels, &guess, &snr).unwrap();
    let p = 1.0 / K as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((r.overall_accuracy - p).abs() < 3.0 * sigma, "{}", r.overall_accuracy);
    // Rows sum to the per-class totals, columns to the guess totals.
    for c in 0..K {
        let col: u64 = r.confusion.iter().map(|row| row[c]).sum();
        assert_eq!(col, guess.iter().filter(|&&g| g == c).count() as u64);
        assert_eq!(r.confusion[c].iter().sum::<u64>(), (n / K) as u64);
    }
}

#[test]
fn constructed_swaps_land_off_diagonal() {
    // 10% of class 4 (rtty45) is read as class 5 (rtty50); class 16 (am) is
    // always right; class 0 is always called class 17.
    let mut labels = Vec::new();
    let mut preds = Vec::new();
    for i in 0..20 {
        labels.push(4);
        preds.push(if i % 10 == 3 { 5 } else { 4 });
        labels.push(16);
        preds.push(16);
        labels.push(0);
        preds.push(17);
    }
    let snr = vec![0.0; labels.len()];
    let r = report_from_predictions(K, &labels, &preds, &snr).unwrap();
    assert_eq!(r.confusion[4][5], 2);
    assert_eq!(r.confusion[4][4], 18);
    assert_eq!(r.confusion[0][17], 20);
    assert_eq!(r.confusion_rate(4, 5), Some(0.1));
    assert_eq!(r.confusion_rate(4, 16), Some(0.0));
    assert_eq!(r.confusion_rate(1, 0), None);
    assert_eq!(r.correct(), 38);
    assert_eq!(r.overall_accuracy, 38.0 / 60.0);
    let off: u64 = (0..K)
        .flat_map(|i| (0..K).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| r.confusion[i][j])
        .sum();
    assert_eq!(r.correct() + off, r.total);
    let recall = r.per_class_recall();
    assert_eq!(
        (recall[0], recall[4], recall[16], recall[1]),
        (Some(0.0), Some(0.9), Some(1.0), None)
    );

    // Everything sits in the [0, 5) bin; the others are reported as empty.
    let curve = accuracy_over_snr(&r);
    assert_eq!(curve.rows.len(), 1);
    assert_eq!((curve.rows[0].lo_db, curve.rows[0].center_db), (0.0, 2.5));
    assert_eq!(curve.empty_bins.len(), SNR_BINS - 1);
}

#[test]
fn top_edge_goes_to_last_bin() {
    let r = report_from_predictions(K, &[1, 2, 3], &[1, 2, 0], &[25.0, 24.9, -10.0]).unwrap();
    assert_eq!(r.per_snr[6].count, 2);
    assert_eq!(r.per_snr[6].correct, 2);
    assert_eq!(r.per_snr[0].count, 1);
    assert_eq!(r.per_snr[0].correct, 0);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(matches!(
        report_from_predictions(K, &[], &[], &[]),
        Err(EvalError::Empty)
    ));
    assert!(report_from_predictions(K, &[1], &[1, 2], &[0.0]).is_err());
    assert!(report_from_predictions(K, &[18], &[1], &[0.0]).is_err());
}

#[test]
fn confusion_csv_round_trip() {
    let mut rng = hfclass_core::seed::rng(3);
    let labels: Vec<usize> = (0..500).map(|_| rng.random_range(0..K)).collect();
    let preds: Vec<usize> = (0..500).map(|_| rng.random_range(0..K)).collect();
    let r = report_from_predictions(K, &labels, &preds, &vec![5.0; 500]).unwrap();
    let text = confusion_csv(&r, &names()).unwrap();
    assert_eq!(text.lines().count(), K + 1);
    assert!(text.lines().all(|l| l.split(',').count() == K + 1));
    let (n, m) = parse_confusion_csv(&text).unwrap();
    assert_eq!(n, names());
    assert_eq!(m, r.confusion);

    let broken = text.replacen(",0,", ",x,", 1);
    assert!(matches!(parse_confusion_csv(&broken), Err(EvalError::Csv { .. })));
    assert!(confusion_csv(&r, &names()[..17]).is_err());
}

#[test]
fn snr_curve_csv_lists_populated_bins() {
    let r = report_from_predictions(K, &[0, 0, 1, 1], &[0, 1, 1, 1], &[-7.0, -6.0, 12.0, 24.0]).unwrap();
    let text = snr_curve_csv(&r);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "snr_center_db,snr_lo_db,snr_hi_db,accuracy,count");
    assert_eq!(lines[1], "-7.5,-10,-5,0.500000,2");
    assert_eq!(lines[2], "12.5,10,15,1.000000,1");
    assert_eq!(lines[3], "22.5,20,25,1.000000,1");
    assert_eq!(lines.len(), 4);
}

fn tiny_generation() -> GenerationConfig {
    GenerationConfig {
        master_seed: 5,
        per_mode_count: 2,
        ..Default::default()
    }
}

#[test]
fn model_evaluation_matches_its_own_predictions() {
    let records = Generator::new(tiny_generation()).unwrap().split(Split::Train).unwrap();
    let mut model = Model::<f32>::build(Arch::ReducedCnn, &ArchConfig::default(), 1).unwrap();
    let r = evaluate(&mut model, &records, 7).unwrap();
    let refs: Vec<_> = records.iter().collect();
    let preds = model.predict(&hfclass_nn::batch_tensor(&refs)).unwrap();
    let correct = records
        .iter()
        .zip(&preds)
        .filter(|(rec, &p)| rec.label as usize == p)
        .count();
    assert_eq!(r.total, records.len() as u64);
    assert_eq!(r.correct(), correct as u64);
    // Batch size must not change the outcome.
    assert_eq!(evaluate(&mut model, &records, 1).unwrap().confusion, r.confusion);
    assert!(matches!(evaluate(&mut model, &[], 8), Err(EvalError::Empty)));
}

#[test]
fn render_report_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = hfclass_core::dataset::generate(&tiny_generation(), dir.path()).unwrap();
    let r = report_from_predictions(K, &[0, 1, 2], &[0, 1, 1], &[1.0, 2.0, 3.0]).unwrap();
    let out = dir.path().join("eval");
    let files = render_report(&r, &manifest, &out).unwrap();
    assert_eq!(files.len(), 3);
    let s = std::fs::read_to_string(out.join(SUMMARY_FILE)).unwrap();
    assert!(s.contains("overall accuracy: 66.7% (2 of 3)"), "{s}");
    assert!(s.contains("morse"));
    let (n, _) = parse_confusion_csv(&std::fs::read_to_string(out.join(CONFUSION_FILE)).unwrap()).unwrap();
    assert_eq!(n, manifest.mode_names);

    let mut short: Manifest = manifest.clone();
    short.mode_names.pop();
    let e = render_report(&r, &short, &out).unwrap_err();
    assert!(e.to_string().contains("17 modes"), "{e}");
}
