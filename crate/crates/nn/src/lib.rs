//! A small CPU neural-network stack for classifying 2048-sample IQ vectors:
//! tensors, 1-D layers with hand-written backward passes, the classifier
//! architectures, Adam with a plateau scheduler, training and checkpoints.
//!
//! Inputs are `(batch, 2, 2048)` tensors with I and Q as two channels.

use std::path::PathBuf;

pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod model;
pub mod optim;
pub mod tensor;
pub mod train;

pub use checkpoint::{checkpoint_precision, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use layers::{Ctx, Layer, LayerSpec, Mode, Param};
pub use model::{batch_tensor, Arch, ArchConfig, Model, NUM_CLASSES};
pub use optim::{Adam, AdamConfig, Plateau, PlateauConfig};
pub use tensor::{Scalar, Tensor};
pub use train::{evaluate_loss, train, EpochStats, History, TrainConfig, TrainState};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("{what}: expected shape {expected}, got {actual}")]
    Shape {
        what: String,
        expected: String,
        actual: String,
    },

    #[error("{0}: backward called before forward")]
    BackwardBeforeForward(&'static str),

    #[error("non-finite {what} at epoch {epoch}, batch {batch}")]
    NonFinite { what: String, epoch: usize, batch: usize },

    #[error("malformed checkpoint at byte offset {offset}: {reason}")]
    Checkpoint { offset: u64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Data(#[from] hfclass_core::Error),
}

pub type Result<T> = std::result::Result<T, NnError>;
