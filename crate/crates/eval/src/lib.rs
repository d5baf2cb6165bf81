//! Scores a classifier on labelled IQ vectors: overall accuracy, accuracy in
//! 5 dB SNR bins and a confusion matrix, plus CSV and text renderings.

mod render;

use std::path::PathBuf;

use hfclass_core::dataset::IqVector;
use hfclass_nn::model::argmax_rows;
use hfclass_nn::{batch_tensor, Ctx, Model, Scalar};

pub use render::{
    confusion_csv, parse_confusion_csv, render_report, snr_curve_csv, summary, CONFUSION_FILE, SNR_CURVE_FILE,
    SUMMARY_FILE,
};

/// Lower edge of the first SNR bin, in dB.
pub const SNR_LO_DB: f64 = -10.0;
pub const SNR_BIN_WIDTH_DB: f64 = 5.0;
pub const SNR_BINS: usize = 7;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("nothing to evaluate: the dataset is empty")]
    Empty,

    #[error("{0}")]
    Mismatch(String),

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Nn(#[from] hfclass_nn::NnError),
}

pub type Result<T> = std::result::Result<T, EvalError>;

/// Bin index for `snr_db`. Bins are `[lo, lo+5)`; values outside the covered
/// range are clamped into the first or last bin.
pub fn snr_bin(snr_db: f64) -> usize {
    let k = ((snr_db - SNR_LO_DB) / SNR_BIN_WIDTH_DB).floor();
    if k.is_nan() || k < 0.0 {
        0
    } else {
        (k as usize).min(SNR_BINS - 1)
    }
}

/// `[lo, hi)` of bin `k`.
pub fn snr_bin_edges(k: usize) -> (f64, f64) {
    let lo = SNR_LO_DB + k as f64 * SNR_BIN_WIDTH_DB;
    (lo, lo + SNR_BIN_WIDTH_DB)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrBin {
    pub lo_db: f64,
    pub hi_db: f64,
    pub correct: u64,
    pub count: u64,
}

impl SnrBin {
    pub fn center_db(&self) -> f64 {
        0.5 * (self.lo_db + self.hi_db)
    }

    /// `None` for an empty bin.
    pub fn accuracy(&self) -> Option<f64> {
        (self.count > 0).then(|| self.correct as f64 / self.count as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub total: u64,
    pub overall_accuracy: f64,
    pub per_snr: Vec<SnrBin>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReport {
    pub fn classes(&self) -> usize {
        self.confusion.len()
    }

    /// Recall per true class; `None` for classes absent from the data.
    pub fn per_class_recall(&self) -> Vec<Option<f64>> {
        self.confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: u64 = row.iter().sum();
                (n > 0).then(|| row[i] as f64 / n as f64)
            })
            .collect()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes()).map(|i| self.confusion[i][i]).sum()
    }

    /// Fraction of class `a` records predicted as `b`; `None` if `a` is absent.
    pub fn confusion_rate(&self, a: usize, b: usize) -> Option<f64> {
        let n: u64 = self.confusion[a].iter().sum();
        (n > 0).then(|| self.confusion[a][b] as f64 / n as f64)
    }
}

/// Builds a report from true labels, predicted labels and per-record SNR.
pub fn report_from_predictions(
    classes: usize,
    labels: &[usize],
    predicted: &[usize],
    snr_db: &[f64],
) -> Result<EvalReport> {
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    if labels.len() != predicted.len() || labels.len() != snr_db.len() {
        return Err(EvalError::Mismatch(format!(
            "{} labels, {} predictions and {} SNR values",
            labels.len(),
            predicted.len(),
            snr_db.len()
        )));
    }
    if let Some(&l) = labels.iter().chain(predicted).find(|&&l| l >= classes) {
        return Err(EvalError::Mismatch(format!("class {l} outside {classes} classes")));
    }
    let mut confusion = vec![vec![0u64; classes]; classes];
    let mut per_snr: Vec<SnrBin> = (0..SNR_BINS)
        .map(|k| {
            let (lo_db, hi_db) = snr_bin_edges(k);
            SnrBin {
                lo_db,
                hi_db,
                correct: 0,
                count: 0,
            }
        })
        .collect();
    for ((&t, &p), &s) in labels.iter().zip(predicted).zip(snr_db) {
        confusion[t][p] += 1;
        let bin = &mut per_snr[snr_bin(s)];
        bin.count += 1;
        bin.correct += u64::from(t == p);
    }
    let total = labels.len() as u64;
    let correct: u64 = (0..classes).map(|i| confusion[i][i]).sum();
    Ok(EvalReport {
        total,
        overall_accuracy: correct as f64 / total as f64,
        per_snr,
        confusion,
    })
}

/// Runs `model` in inference mode over `records` and scores the argmax
/// predictions (ties go to the lowest class index).
pub fn evaluate<T: Scalar>(model: &mut Model<T>, records: &[IqVector], batch_size: usize) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let classes = model.num_classes();
    let mut predicted = Vec::with_capacity(records.len());
    for chunk in records.chunks(batch_size.max(1)) {
        let refs: Vec<&IqVector> = chunk.iter().collect();
        let p = model.forward(&batch_tensor(&refs), &Ctx::infer())?;
        predicted.extend(argmax_rows(&p));
    }
    let labels: Vec<usize> = records.iter().map(|r| r.label as usize).collect();
    let snr: Vec<f64> = records.iter().map(|r| r.snr_db as f64).collect();
    report_from_predictions(classes, &labels, &predicted, &snr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub center_db: f64,
    pub lo_db: f64,
    pub hi_db: f64,
    pub accuracy: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrCurve {
    pub rows: Vec<CurveRow>,
    /// `[lo, hi)` of bins left out because they held no records.
    pub empty_bins: Vec<(f64, f64)>,
}

/// One row per non-empty SNR bin, in increasing SNR.
pub fn accuracy_over_snr(report: &EvalReport) -> SnrCurve {
    let mut curve = SnrCurve {
        rows: Vec::new(),
        empty_bins: Vec::new(),
    };
    for b in &report.per_snr {
        match b.accuracy() {
            Some(accuracy) => curve.rows.push(CurveRow {
                center_db: b.center_db(),
                lo_db: b.lo_db,
                hi_db: b.hi_db,
                accuracy,
                count: b.count,
            }),
            None => curve.empty_bins.push((b.lo_db, b.hi_db)),
        }
    }
    curve
}
