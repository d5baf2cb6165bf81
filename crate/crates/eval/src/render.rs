use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hfclass_core::dataset::Manifest;

use crate::{accuracy_over_snr, EvalError, EvalReport, Result};

pub const CONFUSION_FILE: &str = "confusion.csv";
pub const SNR_CURVE_FILE: &str = "accuracy_snr.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

fn csv_err(e: csv::Error) -> EvalError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    EvalError::Csv {
        line,
        reason: e.to_string(),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    // Writing into a Vec cannot fail.
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

/// Square matrix with a header row and a leading name column. Rows are true
/// classes, columns predicted ones.
pub fn confusion_csv(report: &EvalReport, names: &[String]) -> Result<String> {
    if names.len() != report.classes() {
        return Err(EvalError::Mismatch(format!(
            "{} class names for a {}-class report",
            names.len(),
            report.classes()
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("true\\predicted").chain(names.iter().map(String::as_str));
    w.write_record(header).map_err(csv_err)?;
    for (name, row) in names.iter().zip(&report.confusion) {
        let cells = std::iter::once(name.clone()).chain(row.iter().map(u64::to_string));
        w.write_record(cells).map_err(csv_err)?;
    }
    Ok(finish(w))
}

/// Inverse of [`confusion_csv`]: class names and the count matrix.
pub fn parse_confusion_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<u64>>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let names: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .skip(1)
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        if rec.get(0) != names.get(i).map(String::as_str) {
            return Err(EvalError::Csv {
                line,
                reason: format!("row label {:?} does not match column {:?}", rec.get(0), names.get(i)),
            });
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|c| c.parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| EvalError::Csv {
                line,
                reason: e.to_string(),
            })?;
        rows.push(row);
    }
    if rows.len() != names.len() {
        return Err(EvalError::Csv {
            line: rows.len() + 2,
            reason: format!("{} rows for {} columns", rows.len(), names.len()),
        });
    }
    Ok((names, rows))
}

/// `snr_center_db,snr_lo_db,snr_hi_db,accuracy,count`, one row per non-empty bin.
pub fn snr_curve_csv(report: &EvalReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let rows = accuracy_over_snr(report).rows;
    w.write_record(["snr_center_db", "snr_lo_db", "snr_hi_db", "accuracy", "count"])
        .expect("in-memory CSV");
    for r in rows {
        w.write_record([
            r.center_db.to_string(),
            r.lo_db.to_string(),
            r.hi_db.to_string(),
            format!("{:.6}", r.accuracy),
            r.count.to_string(),
        ])
        .expect("in-memory CSV");
    }
    finish(w)
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

/// Plain-text digest: overall accuracy, the SNR curve and per-class recall.
pub fn summary(report: &EvalReport, names: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "overall accuracy: {} ({} of {})",
        pct(report.overall_accuracy),
        report.correct(),
        report.total
    );
    let curve = accuracy_over_snr(report);
    let _ = writeln!(s, "\naccuracy by SNR:");
    for r in &curve.rows {
        let _ = writeln!(
            s,
            "  [{:>5}, {:>5}) dB  {:>6}  n={}",
            r.lo_db,
            r.hi_db,
            pct(r.accuracy),
            r.count
        );
    }
    for (lo, hi) in &curve.empty_bins {
        let _ = writeln!(s, "  [{lo:>5}, {hi:>5}) dB  no records");
    }
    let _ = writeln!(s, "\nrecall by class:");
    for (i, recall) in report.per_class_recall().iter().enumerate() {
        let name = names.get(i).map_or("?", String::as_str);
        match recall {
            Some(r) => {
                let _ = writeln!(s, "  {name:<16}{:>7}", pct(*r));
            }
            None => {
                let _ = writeln!(s, "  {name:<16}  absent");
            }
        }
    }
    s
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|source| EvalError::File {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the confusion matrix, SNR curve and summary into `out_dir`. Class
/// names come from the dataset manifest, whose class count must match the report.
pub fn render_report(report: &EvalReport, manifest: &Manifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if manifest.mode_names.len() != report.classes() {
        return Err(EvalError::Mismatch(format!(
            "dataset lists {} modes but the model predicts {} classes",
            manifest.mode_names.len(),
            report.classes()
        )));
    }
    std::fs::create_dir_all(out_dir).map_err(|source| EvalError::File {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let names = &manifest.mode_names;
    Ok(vec![
        write(out_dir.join(CONFUSION_FILE), &confusion_csv(report, names)?)?,
        write(out_dir.join(SNR_CURVE_FILE), &snr_curve_csv(report))?,
        write(out_dir.join(SUMMARY_FILE), &summary(report, names))?,
    ])
}
