//! Labelled IQ vectors: binary storage, corpus generation and batching.

mod batch;
mod format;
mod generate;

pub use batch::{shuffled_indices, split_iter, Batches};
pub use format::{
    load, load_file, parse_header, read_dataset, serialize, DatasetWriter, IqVector, FORMAT_VERSION, HEADER_LEN, MAGIC,
    RECORD_LEN,
};
pub use generate::{
    generate, generate_with_progress, record_plan, GenerationConfig, Generator, Manifest, SourceConfig, Split,
    SplitSummary, MANIFEST_FILE, TRAIN_FILE, VAL_FILE, VAL_TEXT_FRACTION,
};
