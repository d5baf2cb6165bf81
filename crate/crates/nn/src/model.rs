//! Classifier architectures and the model container.

use std::fmt;
use std::str::FromStr;

use hfclass_core::dataset::IqVector;
use hfclass_core::modem::MODE_COUNT;
use hfclass_core::VECTOR_LEN;

use crate::layers::{build_layer, Ctx, Layer, LayerSpec, Param};
use crate::tensor::{expect_shape, Scalar, Tensor};
use crate::{NnError, Result};

pub const NUM_CLASSES: usize = MODE_COUNT;

/// Input channels: I and Q.
pub const IN_CHANNELS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arch {
    ClassicalCnn,
    AllConv,
    DeepCnn,
    Residual,
    /// About 160k parameters, for quick runs.
    ReducedCnn,
    /// A layer list supplied by the caller.
    Custom,
}

impl Arch {
    pub const BUILTIN: [Arch; 5] = [
        Arch::ClassicalCnn,
        Arch::AllConv,
        Arch::DeepCnn,
        Arch::Residual,
        Arch::ReducedCnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Arch::ClassicalCnn => "classical_cnn",
            Arch::AllConv => "all_conv",
            Arch::DeepCnn => "deep_cnn",
            Arch::Residual => "residual",
            Arch::ReducedCnn => "reduced_cnn",
            Arch::Custom => "custom",
        }
    }

    pub(crate) fn id(self) -> u8 {
        match self {
            Arch::ClassicalCnn => 0,
            Arch::AllConv => 1,
            Arch::DeepCnn => 2,
            Arch::Residual => 3,
            Arch::ReducedCnn => 4,
            Arch::Custom => 255,
        }
    }

    pub(crate) fn from_id(id: u8) -> Option<Self> {
        Arch::BUILTIN.into_iter().chain([Arch::Custom]).find(|a| a.id() == id)
    }

    /// Layer list for inputs of `(batch, 2, cfg.input_len)`.
    pub fn specs(self, cfg: &ArchConfig) -> Result<Vec<LayerSpec>> {
        let len = cfg.input_len;
        // Every convolution here feeds batch norm.
        let conv = |in_ch, out_ch, stride| LayerSpec::Conv1d {
            in_ch,
            out_ch,
            kernel: 3,
            stride,
            bias: false,
        };
        let conv_drop = LayerSpec::Dropout { rate: cfg.conv_dropout };
        let head_drop = LayerSpec::Dropout { rate: cfg.head_dropout };
        let need_len = |div: usize| {
            if len % div != 0 || len == 0 {
                Err(NnError::Config(format!(
                    "{}: input length {len} must be a positive multiple of {div}",
                    self.name()
                )))
            } else {
                Ok(len / div)
            }
        };
        let mut s = Vec::new();
        match self {
            Arch::ClassicalCnn => {
                let widths = [16, 32, 48, 64, 80, 96];
                let out_len = need_len(1 << widths.len())?;
                let mut c = IN_CHANNELS;
                for w in widths {
                    s.extend([
                        conv(c, w, 1),
                        LayerSpec::BatchNorm { channels: w },
                        LayerSpec::Relu,
                        LayerSpec::MaxPool1d,
                        conv_drop,
                    ]);
                    c = w;
                }
                s.extend([
                    LayerSpec::Flatten,
                    head_drop,
                    LayerSpec::Dense {
                        inputs: c * out_len,
                        units: 430,
                    },
                    LayerSpec::Relu,
                    head_drop,
                    LayerSpec::Dense {
                        inputs: 430,
                        units: NUM_CLASSES,
                    },
                ]);
            }
            Arch::ReducedCnn => {
                // Same 6 conv + 2 dense layout. The wide late kernels reach
                // about 70 ms of signal, and averaging over time keeps the
                // head small and shift invariant.
                let widths = [16, 24, 32, 64, 96, 96];
                let kernels = [3, 3, 3, 5, 9, 9];
                need_len(1 << widths.len())?;
                let mut c = IN_CHANNELS;
                for (w, kernel) in widths.into_iter().zip(kernels) {
                    s.extend([
                        LayerSpec::Conv1d {
                            in_ch: c,
                            out_ch: w,
                            kernel,
                            stride: 1,
                            bias: false,
                        },
                        LayerSpec::BatchNorm { channels: w },
                        LayerSpec::Relu,
                        LayerSpec::MaxPool1d,
                        conv_drop,
                    ]);
                    c = w;
                }
                s.extend([
                    LayerSpec::GlobalAvgPool,
                    head_drop,
                    LayerSpec::Dense { inputs: c, units: 64 },
                    LayerSpec::Relu,
                    head_drop,
                    LayerSpec::Dense {
                        inputs: 64,
                        units: NUM_CLASSES,
                    },
                ]);
            }
            Arch::AllConv => {
                let widths = [64, 96, 96, 128, 128, 192, 192, 256, 256, 288, 288];
                let strides = [1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 2];
                need_len(1 << strides.iter().filter(|&&v| v == 2).count())?;
                let mut c = IN_CHANNELS;
                for (&w, &st) in widths.iter().zip(&strides) {
                    s.extend([conv(c, w, st), LayerSpec::BatchNorm { channels: w }, LayerSpec::Relu]);
                    if st == 2 {
                        s.push(conv_drop);
                    }
                    c = w;
                }
                s.extend([
                    LayerSpec::Conv1d {
                        in_ch: c,
                        out_ch: 512,
                        kernel: 1,
                        stride: 1,
                        bias: false,
                    },
                    LayerSpec::BatchNorm { channels: 512 },
                    LayerSpec::Relu,
                    LayerSpec::GlobalAvgPool,
                    head_drop,
                    LayerSpec::Dense {
                        inputs: 512,
                        units: NUM_CLASSES,
                    },
                ]);
            }
            Arch::DeepCnn => {
                let widths = [32, 32, 64, 64, 96, 96, 128, 128, 160, 160, 192, 192, 256, 256, 304, 304];
                let out_len = need_len(1 << (widths.len() / 2))?;
                let mut c = IN_CHANNELS;
                for (i, &w) in widths.iter().enumerate() {
                    s.extend([conv(c, w, 1), LayerSpec::BatchNorm { channels: w }, LayerSpec::Relu]);
                    if i % 2 == 1 {
                        s.extend([LayerSpec::MaxPool1d, conv_drop]);
                    }
                    c = w;
                }
                s.extend([
                    LayerSpec::Flatten,
                    head_drop,
                    LayerSpec::Dense {
                        inputs: c * out_len,
                        units: NUM_CLASSES,
                    },
                ]);
            }
            Arch::Residual => {
                let filters = [64, 80, 96, 112, 128, 128, 144, 144];
                let out_len = need_len(1 << filters.len())?;
                let mut c = IN_CHANNELS;
                for &n in &filters {
                    s.extend([LayerSpec::ResidualStack { in_ch: c, filters: n }, conv_drop]);
                    c = n;
                }
                s.extend([
                    LayerSpec::Flatten,
                    head_drop,
                    LayerSpec::Dense {
                        inputs: c * out_len,
                        units: NUM_CLASSES,
                    },
                ]);
            }
            Arch::Custom => {
                return Err(NnError::Config(
                    "custom architectures have no built-in layer list".into(),
                ))
            }
        }
        s.push(LayerSpec::Softmax);
        Ok(s)
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = NnError;

    fn from_str(s: &str) -> Result<Self> {
        Arch::BUILTIN.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Arch::BUILTIN.iter().map(|a| a.name()).collect();
            NnError::Config(format!("unknown architecture `{s}`; valid names: {}", names.join(", ")))
        })
    }
}

/// Choices that shape the built-in architectures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchConfig {
    pub input_len: usize,
    /// After each pooling or stride-2 block.
    pub conv_dropout: f64,
    /// Before dense layers.
    pub head_dropout: f64,
}

impl ArchConfig {
    /// Defaults for `arch`. The small reduced model trains without dropout:
    /// dropping half of 96 pooled features starves it on desk-scale data.
    pub fn for_arch(arch: Arch) -> Self {
        match arch {
            Arch::ReducedCnn => ArchConfig {
                conv_dropout: 0.0,
                head_dropout: 0.0,
                ..Default::default()
            },
            _ => ArchConfig::default(),
        }
    }
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            input_len: VECTOR_LEN,
            conv_dropout: 0.1,
            head_dropout: 0.5,
        }
    }
}

/// An ordered layer stack ending in softmax.
#[derive(Clone)]
pub struct Model<T: Scalar> {
    arch: Arch,
    input_len: usize,
    layers: Vec<Box<dyn Layer<T>>>,
}

impl<T: Scalar> fmt::Debug for Model<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("arch", &self.arch)
            .field("input_len", &self.input_len)
            .field("layers", &self.specs())
            .finish()
    }
}

impl<T: Scalar> Model<T> {
    pub fn build(arch: Arch, cfg: &ArchConfig, seed: u64) -> Result<Self> {
        Self::from_specs(arch, cfg.input_len, &arch.specs(cfg)?, seed)
    }

    /// Weights are drawn in layer order from one stream seeded by `seed`.
    pub fn from_specs(arch: Arch, input_len: usize, specs: &[LayerSpec], seed: u64) -> Result<Self> {
        if specs.last() != Some(&LayerSpec::Softmax) {
            return Err(NnError::Config("the last layer must be softmax".into()));
        }
        let mut rng = hfclass_core::seed::rng(seed);
        let layers = specs
            .iter()
            .map(|&s| build_layer(s, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Model {
            arch,
            input_len,
            layers,
        })
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec()).collect()
    }

    pub fn layers(&self) -> &[Box<dyn Layer<T>>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Box<dyn Layer<T>>] {
        &mut self.layers
    }

    pub fn num_classes(&self) -> usize {
        self.specs()
            .iter()
            .rev()
            .find_map(|s| match s {
                LayerSpec::Dense { units, .. } => Some(*units),
                _ => None,
            })
            .unwrap_or(0)
    }

    /// Convolution and dense layers, counting those inside residual stacks.
    pub fn weighted_layers(&self) -> usize {
        self.specs().iter().map(|s| s.weighted_layers()).sum()
    }

    /// Trainable scalars, batch norm scale and shift included.
    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    pub fn params(&self) -> Vec<&Param<T>> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn buffers(&self) -> Vec<&Tensor<T>> {
        self.layers.iter().flat_map(|l| l.buffers()).collect()
    }

    pub fn buffers_mut(&mut self) -> Vec<&mut Tensor<T>> {
        self.layers.iter_mut().flat_map(|l| l.buffers_mut()).collect()
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    /// Class probabilities `(batch, classes)` for `(batch, 2, input_len)`.
    pub fn forward(&mut self, x: &Tensor<T>, ctx: &Ctx) -> Result<Tensor<T>> {
        expect_shape("model input", x, &[None, Some(IN_CHANNELS), Some(self.input_len)])?;
        if !x.is_finite() {
            return Err(NnError::Config("model input contains non-finite values".into()));
        }
        let mut h = x.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            h = layer.forward(&h, &ctx.child(i as u64))?;
        }
        Ok(h)
    }

    /// Backpropagates mean cross-entropy from the probabilities of the last
    /// forward pass. The softmax and loss gradients are fused into
    /// `(p − onehot)/B` on the logits.
    pub fn backward_cross_entropy(&mut self, probs: &Tensor<T>, labels: &[usize]) -> Result<()> {
        let mut g = cross_entropy_grad(probs, labels)?;
        let n = self.layers.len();
        for layer in self.layers[..n - 1].iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(())
    }

    /// Argmax class per row; ties go to the lowest index.
    pub fn predict(&mut self, x: &Tensor<T>) -> Result<Vec<usize>> {
        let p = self.forward(x, &Ctx::infer())?;
        Ok(argmax_rows(&p))
    }
}

pub fn argmax_rows<T: Scalar>(p: &Tensor<T>) -> Vec<usize> {
    let cols = p.shape()[1];
    p.data()
        .chunks(cols)
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(
                    (0, T::neg_infinity()),
                    |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
                )
                .0
        })
        .collect()
}

/// Mean of `−ln p[label]` over the rows.
pub fn cross_entropy<T: Scalar>(probs: &Tensor<T>, labels: &[usize]) -> f64 {
    let cols = probs.shape()[1];
    let tiny = f64::MIN_POSITIVE;
    let total: f64 = probs
        .data()
        .chunks(cols)
        .zip(labels)
        .map(|(row, &l)| -row[l].as_f64().max(tiny).ln())
        .sum();
    total / labels.len() as f64
}

/// `(p − onehot)/B`: the gradient of mean cross-entropy on the logits.
pub fn cross_entropy_grad<T: Scalar>(probs: &Tensor<T>, labels: &[usize]) -> Result<Tensor<T>> {
    expect_shape("probabilities", probs, &[Some(labels.len()), None])?;
    let cols = probs.shape()[1];
    if let Some(&l) = labels.iter().find(|&&l| l >= cols) {
        return Err(NnError::Config(format!("label {l} outside {cols} classes")));
    }
    let inv = T::from_f64(1.0 / labels.len() as f64);
    let mut g = probs.clone();
    for (row, &l) in g.data_mut().chunks_mut(cols).zip(labels) {
        row[l] = row[l] - T::one();
        row.iter_mut().for_each(|v| *v = *v * inv);
    }
    Ok(g)
}

/// Packs records into `(batch, 2, len)` with I in channel 0 and Q in channel 1.
pub fn batch_tensor<T: Scalar>(records: &[&IqVector]) -> Tensor<T> {
    let len = records.first().map_or(0, |r| r.samples.len());
    let mut data = Vec::with_capacity(records.len() * 2 * len);
    for r in records {
        data.extend(r.samples.iter().map(|s| T::from_f64(s.re as f64)));
        data.extend(r.samples.iter().map(|s| T::from_f64(s.im as f64)));
    }
    Tensor::from_vec(&[records.len(), IN_CHANNELS, len], data).expect("records share a length")
}
