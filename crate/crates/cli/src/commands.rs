use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use hfclass_core::channel::Scenario;
use hfclass_core::dataset::{
    self, load_file, parse_header, GenerationConfig, IqVector, Manifest, HEADER_LEN, MANIFEST_FILE, RECORD_LEN,
};
use hfclass_core::modem::ModeId;
use hfclass_eval::{evaluate, render_report, summary};
use hfclass_nn::{
    checkpoint_precision, decode_checkpoint, encode_checkpoint, EpochStats, History, LayerSpec, Model, Scalar,
    TrainState,
};
use serde::Serialize;

use crate::config::{sha256_hex, Precision, TrainFile};
use crate::{EvalArgs, SplitArg, TrainArgs};

pub const CHECKPOINT_FILE: &str = "model.hfnn";
pub const HISTORY_FILE: &str = "history.csv";
pub const RUN_FILE: &str = "run.toml";
pub const EVAL_RUN_FILE: &str = "eval.toml";

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn generate(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut cfg = GenerationConfig::from_file(config)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    cfg.validate()?;
    let mut last = 0;
    let m = dataset::generate_with_progress(&cfg, out, |done, total| {
        let pct = 100 * done / total.max(1);
        if pct >= last + 10 || done == total {
            last = pct;
            eprintln!("generated {done}/{total}");
        }
    })?;
    println!("config digest: {}", m.config_digest);
    println!("master seed: {}", cfg.master_seed);
    for (name, s) in [("train", &m.train), ("val", &m.val)] {
        println!("{name}: {} records in {}", s.count, out.join(&s.file).display());
    }
    println!("{:<16}{:>8}{:>8}", "mode", "train", "val");
    for (i, name) in m.mode_names.iter().enumerate() {
        println!("{name:<16}{:>8}{:>8}", m.train.per_mode[i], m.val.per_mode[i]);
    }
    Ok(())
}

fn load_split(data: &Path, split: SplitArg) -> Result<(Manifest, Vec<IqVector>)> {
    let manifest = Manifest::load(&data.join(MANIFEST_FILE))?;
    let file = match split {
        SplitArg::Train => &manifest.train.file,
        SplitArg::Val => &manifest.val.file,
    };
    let records = load_file(&data.join(file))?;
    Ok((manifest, records))
}

#[derive(Serialize)]
struct TrainRun<'a> {
    command: &'static str,
    config_digest: String,
    dataset_digest: &'a str,
    resumed_from: Option<String>,
    steps_before: u64,
    steps_after: u64,
    epochs_done: usize,
    config: &'a TrainFile,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let mut file = match &args.config {
        Some(p) => TrainFile::load(p)?,
        None => TrainFile::default(),
    };
    let resume = match &args.resume {
        Some(p) => Some((p.clone(), read(p)?)),
        None => None,
    };
    if let Some(a) = args.arch {
        file.arch = a.name().into();
    }
    if let Some(e) = args.epochs {
        file.train.epochs = e;
    }
    if let Some(b) = args.batch_size {
        file.train.batch_size = b;
    }
    if let Some(s) = args.seed {
        file.train.seed = s;
    }
    if let Some(p) = args.precision {
        file.precision = p;
    }
    if let Some((path, bytes)) = &resume {
        let stored = Precision::from_bytes(checkpoint_precision(bytes)?);
        if args.precision.is_some_and(|p| p != stored) {
            bail!(
                "{} holds {stored:?} weights; drop --precision or match it",
                path.display()
            );
        }
        file.precision = stored;
    }
    file.validate()?;
    file.resolve()?;
    match file.precision {
        Precision::F32 => train_as::<f32>(args, file, resume),
        Precision::F64 => train_as::<f64>(args, file, resume),
    }
}

fn print_epoch(e: &EpochStats) {
    println!(
        "epoch {:>3}  train loss {:.4} acc {:.4}  val loss {:.4} acc {:.4}  lr {:.2e}",
        e.epoch, e.train_loss, e.train_acc, e.val_loss, e.val_acc, e.lr
    );
}

fn train_as<T: Scalar>(args: &TrainArgs, mut file: TrainFile, resume: Option<(PathBuf, Vec<u8>)>) -> Result<()> {
    let (manifest, train_set) = load_split(&args.data, SplitArg::Train)?;
    let (_, val_set) = load_split(&args.data, SplitArg::Val)?;
    let cfg = file.train_config();
    let mut state: TrainState<T> = match &resume {
        Some((path, bytes)) => {
            let s: TrainState<T> =
                decode_checkpoint(bytes).with_context(|| format!("cannot load {}", path.display()))?;
            if args.arch.is_some_and(|a| a != s.model.arch()) {
                bail!("{} holds a {} model, not {}", path.display(), s.model.arch(), file.arch);
            }
            // Record what the checkpoint actually holds. Every architecture
            // puts its conv dropout first and its head dropout last.
            file.arch = s.model.arch().name().into();
            let rates: Vec<f64> = s
                .model
                .specs()
                .iter()
                .filter_map(|l| match l {
                    LayerSpec::Dropout { rate } => Some(*rate),
                    _ => None,
                })
                .collect();
            file.model.conv_dropout = rates.first().copied();
            file.model.head_dropout = rates.last().copied();
            s
        }
        None => {
            let model = Model::build(file.arch()?, &file.arch_config()?, file.train.seed)?;
            TrainState::new(model, &cfg)?
        }
    };
    let classes = state.model.num_classes();
    if classes != manifest.mode_names.len() {
        bail!(
            "model predicts {classes} classes but the dataset has {} modes",
            manifest.mode_names.len()
        );
    }
    let steps_before = state.adam.t;
    println!(
        "{} ({} parameters, {:?}), {} train / {} val vectors",
        state.model.arch(),
        state.model.param_count(),
        file.precision,
        train_set.len(),
        val_set.len()
    );
    println!("config digest: {}", file.digest());
    if resume.is_some() {
        println!(
            "resuming after epoch {} at optimizer step {steps_before}",
            state.epochs_done
        );
    }
    let history = if cfg.epochs == 0 {
        History::default()
    } else {
        hfclass_nn::train(&mut state, &train_set, &val_set, &cfg, print_epoch)?
    };

    create_dir(&args.out)?;
    write(&args.out.join(CHECKPOINT_FILE), encode_checkpoint(&state))?;
    history.save(&args.out.join(HISTORY_FILE))?;
    let run = TrainRun {
        command: "train",
        config_digest: file.digest(),
        dataset_digest: &manifest.config_digest,
        resumed_from: resume.map(|(p, _)| p.display().to_string()),
        steps_before,
        steps_after: state.adam.t,
        epochs_done: state.epochs_done,
        config: &file,
    };
    write(&args.out.join(RUN_FILE), toml::to_string(&run)?)?;
    println!("optimizer steps: {steps_before} -> {}", state.adam.t);
    println!("wrote {}", args.out.join(CHECKPOINT_FILE).display());
    Ok(())
}

#[derive(Serialize)]
struct EvalRun<'a> {
    command: &'static str,
    checkpoint: String,
    checkpoint_sha256: String,
    dataset_digest: &'a str,
    split: &'static str,
    records: u64,
    overall_accuracy: f64,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let bytes = read(&args.checkpoint)?;
    match Precision::from_bytes(checkpoint_precision(&bytes)?) {
        Precision::F32 => eval_as::<f32>(args, &bytes),
        Precision::F64 => eval_as::<f64>(args, &bytes),
    }
}

fn eval_as<T: Scalar>(args: &EvalArgs, bytes: &[u8]) -> Result<()> {
    let state: TrainState<T> =
        decode_checkpoint(bytes).with_context(|| format!("cannot load {}", args.checkpoint.display()))?;
    let mut model = state.model;
    let (manifest, records) = load_split(&args.data, args.split)?;
    if model.num_classes() != manifest.mode_names.len() {
        bail!(
            "checkpoint predicts {} classes but the dataset has {} modes",
            model.num_classes(),
            manifest.mode_names.len()
        );
    }
    let report = evaluate(&mut model, &records, args.batch_size)?;
    render_report(&report, &manifest, &args.out)?;
    let run = EvalRun {
        command: "eval",
        checkpoint: args.checkpoint.display().to_string(),
        checkpoint_sha256: sha256_hex(bytes),
        dataset_digest: &manifest.config_digest,
        split: match args.split {
            SplitArg::Train => "train",
            SplitArg::Val => "val",
        },
        records: report.total,
        overall_accuracy: report.overall_accuracy,
    };
    write(&args.out.join(EVAL_RUN_FILE), toml::to_string(&run)?)?;
    println!("checkpoint sha256: {}", run.checkpoint_sha256);
    println!("dataset digest: {}", manifest.config_digest);
    print!("{}", summary(&report, &manifest.mode_names));
    println!("reports in {}", args.out.display());
    Ok(())
}

const MAGICS: [&[u8; 4]; 2] = [dataset::MAGIC, hfclass_nn::checkpoint::MAGIC];

pub fn inspect(path: &Path) -> Result<()> {
    let mut head = Vec::with_capacity(4);
    File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))?
        .take(4)
        .read_to_end(&mut head)
        .with_context(|| format!("cannot read {}", path.display()))?;
    if head.as_slice() == dataset::MAGIC {
        inspect_dataset(path)
    } else if head.as_slice() == hfclass_nn::checkpoint::MAGIC {
        inspect_checkpoint(path)
    } else {
        let matched = MAGICS
            .iter()
            .map(|m| head.iter().zip(m.iter()).take_while(|(a, b)| a == b).count())
            .max()
            .unwrap_or(0);
        bail!(
            "{}: unrecognized file, bad magic at byte offset {matched} (expected \"HFDS\" or \"HFNN\")",
            path.display()
        )
    }
}

/// Streams the records so large files need not fit in memory.
fn inspect_dataset(path: &Path) -> Result<()> {
    let mut r = BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?);
    let mut h = [0u8; HEADER_LEN];
    let got = read_full(&mut r, &mut h)?;
    let count = parse_header(&h[..got]).with_context(|| path.display().to_string())?;
    let mut modes = vec![0u64; ModeId::ALL.len()];
    let mut scenarios = vec![0u64; Scenario::ALL.len()];
    let (mut lo, mut hi) = (f32::INFINITY, f32::NEG_INFINITY);
    let mut rec = vec![0u8; RECORD_LEN];
    for i in 0..count {
        let offset = HEADER_LEN as u64 + i * RECORD_LEN as u64;
        let got = read_full(&mut r, &mut rec)?;
        if got < RECORD_LEN {
            bail!(
                "{}: truncated record {i} of {count} at byte offset {}",
                path.display(),
                offset + got as u64
            );
        }
        let (label, scenario) = (rec[0] as usize, rec[1] as usize);
        if label >= modes.len() || scenario >= scenarios.len() {
            bail!("{}: bad label or scenario at byte offset {offset}", path.display());
        }
        modes[label] += 1;
        scenarios[scenario] += 1;
        let snr = f32::from_le_bytes(rec[2..6].try_into().unwrap());
        lo = lo.min(snr);
        hi = hi.max(snr);
    }
    if read_full(&mut r, &mut [0u8; 1])? > 0 {
        bail!(
            "{}: trailing bytes at offset {}",
            path.display(),
            HEADER_LEN as u64 + count * RECORD_LEN as u64
        );
    }
    println!("dataset {}", path.display());
    println!(
        "records: {count}  sample rate: {} Hz  vector length: {}",
        hfclass_core::SAMPLE_RATE_HZ,
        hfclass_core::VECTOR_LEN
    );
    if count > 0 {
        println!("SNR range: {lo:.2} to {hi:.2} dB");
    }
    println!("records per mode:");
    for (m, n) in ModeId::ALL.iter().zip(&modes) {
        println!("  {:<16}{n:>8}", m.name());
    }
    println!("records per scenario:");
    for (s, n) in Scenario::ALL.iter().zip(&scenarios) {
        println!("  {:<16}{n:>8}", s.to_string());
    }
    Ok(())
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> Result<usize> {
    let mut n = 0;
    while n < buf.len() {
        match r.read(&mut buf[n..])? {
            0 => break,
            k => n += k,
        }
    }
    Ok(n)
}

fn inspect_checkpoint(path: &Path) -> Result<()> {
    let bytes = read(path)?;
    let precision = Precision::from_bytes(checkpoint_precision(&bytes)?);
    // Widening to f64 is exact, so counts and values print faithfully.
    let state: TrainState<f64> = decode_checkpoint(&bytes).with_context(|| path.display().to_string())?;
    let m = &state.model;
    println!("checkpoint {}", path.display());
    println!(
        "architecture: {}  precision: {precision:?}  input: [_, 2, {}]  classes: {}",
        m.arch(),
        m.input_len(),
        m.num_classes()
    );
    println!(
        "epochs done: {}  optimizer steps: {}  learning rate: {:e}",
        state.epochs_done, state.adam.t, state.adam.lr
    );
    println!("sha256: {}", sha256_hex(&bytes));
    println!("{:>4}  {:<14}{:>10}  spec", "#", "layer", "params");
    let mut sum = 0;
    for (i, layer) in m.layers().iter().enumerate() {
        let n: usize = layer.params().iter().map(|p| p.value.len()).sum();
        sum += n;
        println!("{i:>4}  {:<14}{n:>10}  {:?}", layer.spec().kind(), layer.spec());
    }
    println!("total parameters: {sum}  weighted layers: {}", m.weighted_layers());
    debug_assert_eq!(sum, m.param_count());
    Ok(())
}
