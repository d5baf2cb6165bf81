//! Little-endian checkpoint files.
//!
//! ```text
//! magic "HFNN" | version u16 | dtype u8 (4 or 8) | arch u8 | input_len u32
//! epochs_done u32 | adam: t u64, lr f64, lr0 f64, beta1 f64, beta2 f64, eps f64
//! plateau: factor f64, patience u32, min_delta f64, min_lr f64, best f64, bad u32
//! layers u32, then per layer: tag u8, 5 × u64
//! parameter tensors, buffer tensors, adam m tensors, adam v tensors:
//!   each group is count u32, then per tensor rank u8, dims u32…, values
//! ```

use std::path::Path;

use crate::layers::LayerSpec;
use crate::model::{Arch, Model};
use crate::optim::{Adam, AdamConfig, Plateau, PlateauConfig};
use crate::tensor::{Scalar, Tensor};
use crate::train::TrainState;
use crate::{NnError, Result};

pub const MAGIC: &[u8; 4] = b"HFNN";
pub const VERSION: u16 = 1;

pub fn encode_checkpoint<T: Scalar>(state: &TrainState<T>) -> Vec<u8> {
    let mut out = Vec::new();
    let model = &state.model;
    out.extend(MAGIC);
    out.extend(VERSION.to_le_bytes());
    out.push(T::BYTES as u8);
    out.push(model.arch().id());
    out.extend((model.input_len() as u32).to_le_bytes());
    out.extend((state.epochs_done as u32).to_le_bytes());
    let a = &state.adam;
    out.extend(a.t.to_le_bytes());
    for v in [a.lr, a.config.lr, a.config.beta1, a.config.beta2, a.config.eps] {
        out.extend(v.to_le_bytes());
    }
    let p = &state.plateau;
    out.extend(p.config.factor.to_le_bytes());
    out.extend((p.config.patience as u32).to_le_bytes());
    out.extend(p.config.min_delta.to_le_bytes());
    out.extend(p.config.min_lr.to_le_bytes());
    out.extend(p.best.to_le_bytes());
    out.extend((p.bad_epochs as u32).to_le_bytes());

    let specs = model.specs();
    out.extend((specs.len() as u32).to_le_bytes());
    for s in &specs {
        let (tag, f) = s.encode();
        out.push(tag);
        for v in f {
            out.extend(v.to_le_bytes());
        }
    }
    let params: Vec<&Tensor<T>> = model.params().into_iter().map(|p| &p.value).collect();
    write_group(&mut out, &params);
    write_group(&mut out, &model.buffers());
    write_group(&mut out, &a.m.iter().collect::<Vec<_>>());
    write_group(&mut out, &a.v.iter().collect::<Vec<_>>());
    out
}

fn write_group<T: Scalar>(out: &mut Vec<u8>, tensors: &[&Tensor<T>]) {
    out.extend((tensors.len() as u32).to_le_bytes());
    for t in tensors {
        out.push(t.shape().len() as u8);
        for &d in t.shape() {
            out.extend((d as u32).to_le_bytes());
        }
        for &v in t.data() {
            v.write_le(out);
        }
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, reason: impl Into<String>) -> NnError {
        NnError::Checkpoint {
            offset: self.pos as u64,
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.b.len() - self.pos < n {
            return Err(NnError::Checkpoint {
                offset: self.b.len() as u64,
                reason: format!("truncated while reading {what}"),
            });
        }
        let s = &self.b[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_bits(self.u64(what)?))
    }

    fn group<S: Scalar, T: Scalar>(&mut self, what: &str) -> Result<Vec<Tensor<T>>> {
        let n = self.u32(what)? as usize;
        let mut out = Vec::with_capacity(n.min(4096));
        for _ in 0..n {
            let rank = self.u8(what)? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(self.u32(what)? as usize);
            }
            let len: usize = shape.iter().product();
            let bytes = self.take(len.saturating_mul(S::BYTES), what)?;
            let data = bytes
                .chunks(S::BYTES)
                .map(|c| T::from_f64(S::read_le(c).as_f64()))
                .collect();
            out.push(Tensor::from_vec(&shape, data)?);
        }
        Ok(out)
    }
}

/// Decodes a checkpoint, converting stored values to `T` if the stored
/// precision differs.
fn check_magic(bytes: &[u8]) -> Result<()> {
    let head = &bytes[..bytes.len().min(4)];
    match head.iter().zip(MAGIC).position(|(a, b)| a != b) {
        Some(i) => Err(NnError::Checkpoint {
            offset: i as u64,
            reason: "bad magic, not a model checkpoint".into(),
        }),
        None => Ok(()),
    }
}

/// Element size in bytes (4 or 8) the checkpoint was written with.
pub fn checkpoint_precision(bytes: &[u8]) -> Result<usize> {
    check_magic(bytes)?;
    let mut r = Reader { b: bytes, pos: 4 };
    r.u16("version")?;
    match r.u8("dtype")? {
        d @ (4 | 8) => Ok(d as usize),
        d => {
            r.pos -= 1;
            Err(r.err(format!("unknown element size {d}")))
        }
    }
}

pub fn decode_checkpoint<T: Scalar>(bytes: &[u8]) -> Result<TrainState<T>> {
    check_magic(bytes)?;
    let mut r = Reader { b: bytes, pos: 0 };
    r.take(4, "magic")?;
    let version = r.u16("version")?;
    if version != VERSION {
        r.pos -= 2;
        return Err(r.err(format!("unsupported version {version}")));
    }
    let dtype = r.u8("dtype")?;
    if dtype != 4 && dtype != 8 {
        r.pos -= 1;
        return Err(r.err(format!("unknown element size {dtype}")));
    }
    let arch_id = r.u8("architecture")?;
    let arch = Arch::from_id(arch_id).ok_or_else(|| {
        r.pos -= 1;
        r.err(format!("unknown architecture id {arch_id}"))
    })?;
    let input_len = r.u32("input length")? as usize;
    let epochs_done = r.u32("epoch counter")? as usize;
    let t = r.u64("step counter")?;
    let lr = r.f64("learning rate")?;
    let adam_cfg = AdamConfig {
        lr: r.f64("adam")?,
        beta1: r.f64("adam")?,
        beta2: r.f64("adam")?,
        eps: r.f64("adam")?,
    };
    let plateau_cfg = PlateauConfig {
        factor: r.f64("scheduler")?,
        patience: r.u32("scheduler")? as usize,
        min_delta: r.f64("scheduler")?,
        min_lr: r.f64("scheduler")?,
    };
    let best = r.f64("scheduler")?;
    let bad_epochs = r.u32("scheduler")? as usize;

    let n_layers = r.u32("layer count")? as usize;
    let mut specs = Vec::with_capacity(n_layers.min(4096));
    for _ in 0..n_layers {
        let at = r.pos;
        let tag = r.u8("layer table")?;
        let mut f = [0u64; 5];
        for v in &mut f {
            *v = r.u64("layer table")?;
        }
        let spec = LayerSpec::decode(tag, f).ok_or_else(|| NnError::Checkpoint {
            offset: at as u64,
            reason: format!("unknown layer tag {tag}"),
        })?;
        spec.validate().map_err(|e| NnError::Checkpoint {
            offset: at as u64,
            reason: e.to_string(),
        })?;
        specs.push(spec);
    }
    let mut model = Model::<T>::from_specs(arch, input_len, &specs, 0).map_err(|e| r.err(e.to_string()))?;

    let (params, buffers, m, v) = if dtype == 8 {
        (
            r.group::<f64, T>("parameters")?,
            r.group::<f64, T>("buffers")?,
            r.group::<f64, T>("adam moments")?,
            r.group::<f64, T>("adam moments")?,
        )
    } else {
        (
            r.group::<f32, T>("parameters")?,
            r.group::<f32, T>("buffers")?,
            r.group::<f32, T>("adam moments")?,
            r.group::<f32, T>("adam moments")?,
        )
    };
    if r.pos != bytes.len() {
        return Err(r.err(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let check = |what: &str, got: &[Tensor<T>], want: Vec<Vec<usize>>| -> Result<()> {
        let shapes: Vec<Vec<usize>> = got.iter().map(|t| t.shape().to_vec()).collect();
        if shapes != want {
            return Err(NnError::Checkpoint {
                offset: bytes.len() as u64,
                reason: format!("{what} do not match the layer table"),
            });
        }
        Ok(())
    };
    let param_shapes: Vec<Vec<usize>> = model.params().iter().map(|p| p.value.shape().to_vec()).collect();
    check("parameter tensors", &params, param_shapes.clone())?;
    check(
        "buffer tensors",
        &buffers,
        model.buffers().iter().map(|b| b.shape().to_vec()).collect(),
    )?;
    if !m.is_empty() {
        check("adam moments", &m, param_shapes.clone())?;
        check("adam moments", &v, param_shapes)?;
    }
    for (p, value) in model.params_mut().into_iter().zip(params) {
        p.value = value;
    }
    for (b, value) in model.buffers_mut().into_iter().zip(buffers) {
        *b = value;
    }
    let adam = Adam {
        config: adam_cfg,
        lr,
        t,
        m,
        v,
    };
    let plateau = Plateau {
        config: plateau_cfg,
        best,
        bad_epochs,
    };
    Ok(TrainState {
        model,
        adam,
        plateau,
        epochs_done,
    })
}

pub fn save_checkpoint<T: Scalar>(state: &TrainState<T>, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(state)).map_err(|source| NnError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<TrainState<T>> {
    let bytes = std::fs::read(path).map_err(|source| NnError::File {
        path: path.to_path_buf(),
        source,
    })?;
    decode_checkpoint(&bytes)
}
