//! Mini-batch training with per-epoch validation.

use std::fmt::Write as _;
use std::path::Path;

use hfclass_core::dataset::{split_iter, IqVector};
use hfclass_core::seed;

use crate::layers::Ctx;
use crate::model::{argmax_rows, batch_tensor, cross_entropy, Model};
use crate::optim::{Adam, AdamConfig, Plateau, PlateauConfig};
use crate::tensor::Scalar;
use crate::{NnError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub plateau: PlateauConfig,
    /// Drives shuffling and dropout masks.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 128,
            epochs: 30,
            adam: AdamConfig::default(),
            plateau: PlateauConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(NnError::Config("batch_size must be at least 1".into()));
        }
        self.adam.validate()?;
        self.plateau.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based, counting epochs of earlier resumed runs.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochStats>,
}

impl History {
    pub const HEADER: &'static str = "epoch,train_loss,train_acc,val_loss,val_acc,lr";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::HEADER);
        for e in &self.epochs {
            let _ = writeln!(
                s,
                "{},{:.6},{:.6},{:.6},{:.6},{:e}",
                e.epoch, e.train_loss, e.train_acc, e.val_loss, e.val_acc, e.lr
            );
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| NnError::File {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Everything needed to continue training: model, optimizer and scheduler
/// state, and the number of completed epochs.
#[derive(Debug, Clone)]
pub struct TrainState<T: Scalar> {
    pub model: Model<T>,
    pub adam: Adam<T>,
    pub plateau: Plateau,
    pub epochs_done: usize,
}

impl<T: Scalar> TrainState<T> {
    pub fn new(model: Model<T>, config: &TrainConfig) -> Result<Self> {
        Ok(TrainState {
            model,
            adam: Adam::new(config.adam)?,
            plateau: Plateau::new(config.plateau)?,
            epochs_done: 0,
        })
    }
}

/// Loss and accuracy in inference mode.
pub fn evaluate_loss<T: Scalar>(model: &mut Model<T>, data: &[IqVector], batch_size: usize) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let (mut loss, mut correct) = (0.0, 0usize);
    for chunk in data.chunks(batch_size.max(1)) {
        let refs: Vec<&IqVector> = chunk.iter().collect();
        let labels: Vec<usize> = chunk.iter().map(|r| r.label as usize).collect();
        let p = model.forward(&batch_tensor(&refs), &Ctx::infer())?;
        loss += cross_entropy(&p, &labels) * chunk.len() as f64;
        correct += argmax_rows(&p).iter().zip(&labels).filter(|(a, b)| a == b).count();
    }
    Ok((loss / data.len() as f64, correct as f64 / data.len() as f64))
}

/// Runs `config.epochs` further epochs. Each epoch shuffles with
/// `derive(seed, epoch)`, steps Adam once per batch, then scores the
/// validation set and consults the scheduler. `on_epoch` sees each row as
/// it is produced.
pub fn train<T: Scalar>(
    state: &mut TrainState<T>,
    train_set: &[IqVector],
    val_set: &[IqVector],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<History> {
    config.validate()?;
    let classes = state.model.num_classes();
    if let Some(r) = train_set.iter().chain(val_set).find(|r| r.label as usize >= classes) {
        return Err(NnError::Config(format!(
            "label {} outside the model's {classes} classes",
            r.label
        )));
    }
    let mut history = History::default();
    for _ in 0..config.epochs {
        let epoch = state.epochs_done + 1;
        let epoch_seed = seed::derive(config.seed, epoch as u64);
        let lr = state.adam.lr;
        let (mut loss_sum, mut correct, mut seen) = (0.0, 0usize, 0usize);
        for (bi, batch) in split_iter(train_set, config.batch_size, epoch_seed).enumerate() {
            let labels: Vec<usize> = batch.iter().map(|r| r.label as usize).collect();
            let x = batch_tensor::<T>(&batch);
            let ctx = Ctx::train(seed::derive(epoch_seed, bi as u64 + 1));
            let probs = state.model.forward(&x, &ctx)?;
            let loss = cross_entropy(&probs, &labels);
            if !loss.is_finite() || !probs.is_finite() {
                return Err(NnError::NonFinite {
                    what: "loss".into(),
                    epoch,
                    batch: bi,
                });
            }
            state.model.zero_grad();
            state.model.backward_cross_entropy(&probs, &labels)?;
            state.adam.step(state.model.params_mut()).map_err(|e| match e {
                NnError::NonFinite { what, .. } => NnError::NonFinite { what, epoch, batch: bi },
                other => other,
            })?;
            loss_sum += loss * labels.len() as f64;
            correct += argmax_rows(&probs).iter().zip(&labels).filter(|(a, b)| a == b).count();
            seen += labels.len();
        }
        let (val_loss, val_acc) = evaluate_loss(&mut state.model, val_set, config.batch_size)?;
        if !val_set.is_empty() {
            state.adam.lr = state.plateau.observe(val_loss, lr);
        }
        let stats = EpochStats {
            epoch,
            train_loss: loss_sum / seen.max(1) as f64,
            train_acc: correct as f64 / seen.max(1) as f64,
            val_loss,
            val_acc,
            lr,
        };
        state.epochs_done = epoch;
        on_epoch(&stats);
        history.epochs.push(stats);
    }
    Ok(history)
}
