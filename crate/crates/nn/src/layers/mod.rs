//! Layers with explicit forward and backward passes. Each layer caches what
//! its backward pass needs during a forward call; backward consumes that
//! cache and accumulates parameter gradients.

mod activation;
mod conv;
mod dense;
mod dropout;
mod norm;
mod pool;
mod residual;

pub use activation::{softmax_rows, Relu, Softmax};
pub use conv::Conv1d;
pub use dense::Dense;
pub use dropout::Dropout;
pub use norm::BatchNorm;
pub use pool::{Flatten, GlobalAvgPool, MaxPool1d};
pub use residual::ResidualStack;

use rand::Rng as _;

use crate::tensor::{Scalar, Tensor};
use crate::{NnError, Result};

/// Whether a forward pass is part of training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Per-call context. `seed` drives dropout masks, so a training step can be
/// replayed exactly.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub mode: Mode,
    pub seed: u64,
}

impl Ctx {
    pub fn infer() -> Self {
        Ctx {
            mode: Mode::Infer,
            seed: 0,
        }
    }

    pub fn train(seed: u64) -> Self {
        Ctx {
            mode: Mode::Train,
            seed,
        }
    }

    pub fn is_train(&self) -> bool {
        self.mode == Mode::Train
    }

    /// Context for the `i`-th child of a composite layer.
    pub fn child(&self, i: u64) -> Self {
        Ctx {
            mode: self.mode,
            seed: hfclass_core::seed::derive(self.seed, i),
        }
    }
}

/// A trainable tensor and its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
}

impl<T: Scalar> Param<T> {
    pub fn new(value: Tensor<T>) -> Self {
        let grad = Tensor::zeros(value.shape());
        Param { value, grad }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(T::zero());
    }
}

/// Construction parameters of one layer; also the checkpoint layer table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    /// Kernel `kernel`, zero padding `(kernel-1)/2`, output length `ceil(L/stride)`.
    /// Convolutions feeding batch norm have no bias, which the norm would cancel.
    Conv1d {
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        bias: bool,
    },
    /// Window 2, stride 2.
    MaxPool1d,
    Dense {
        inputs: usize,
        units: usize,
    },
    Relu,
    Softmax,
    BatchNorm {
        channels: usize,
    },
    Dropout {
        rate: f64,
    },
    GlobalAvgPool,
    Flatten,
    /// 1x1 conv to `filters` with batch norm, two residual units of
    /// kernel-3 convs, then max pooling.
    ResidualStack {
        in_ch: usize,
        filters: usize,
    },
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv1d { .. } => "conv1d",
            LayerSpec::MaxPool1d => "maxpool1d",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Relu => "relu",
            LayerSpec::Softmax => "softmax",
            LayerSpec::BatchNorm { .. } => "batchnorm",
            LayerSpec::Dropout { .. } => "dropout",
            LayerSpec::GlobalAvgPool => "global_avg_pool",
            LayerSpec::Flatten => "flatten",
            LayerSpec::ResidualStack { .. } => "residual_stack",
        }
    }

    /// Convolution and dense layers contained in this layer.
    pub fn weighted_layers(&self) -> usize {
        match self {
            LayerSpec::Conv1d { .. } | LayerSpec::Dense { .. } => 1,
            LayerSpec::ResidualStack { .. } => 5,
            _ => 0,
        }
    }

    /// Tag and integer fields used by the checkpoint encoding.
    pub(crate) fn encode(&self) -> (u8, [u64; 5]) {
        match *self {
            LayerSpec::Conv1d {
                in_ch,
                out_ch,
                kernel,
                stride,
                bias,
            } => (
                0,
                [in_ch as u64, out_ch as u64, kernel as u64, stride as u64, bias as u64],
            ),
            LayerSpec::MaxPool1d => (1, [0; 5]),
            LayerSpec::Dense { inputs, units } => (2, [inputs as u64, units as u64, 0, 0, 0]),
            LayerSpec::Relu => (3, [0; 5]),
            LayerSpec::Softmax => (4, [0; 5]),
            LayerSpec::BatchNorm { channels } => (5, [channels as u64, 0, 0, 0, 0]),
            LayerSpec::Dropout { rate } => (6, [rate.to_bits(), 0, 0, 0, 0]),
            LayerSpec::GlobalAvgPool => (7, [0; 5]),
            LayerSpec::Flatten => (8, [0; 5]),
            LayerSpec::ResidualStack { in_ch, filters } => (9, [in_ch as u64, filters as u64, 0, 0, 0]),
        }
    }

    pub(crate) fn decode(tag: u8, f: [u64; 5]) -> Option<Self> {
        let u = |i: usize| f[i] as usize;
        Some(match tag {
            0 => LayerSpec::Conv1d {
                in_ch: u(0),
                out_ch: u(1),
                kernel: u(2),
                stride: u(3),
                bias: match f[4] {
                    0 => false,
                    1 => true,
                    _ => return None,
                },
            },
            1 => LayerSpec::MaxPool1d,
            2 => LayerSpec::Dense {
                inputs: u(0),
                units: u(1),
            },
            3 => LayerSpec::Relu,
            4 => LayerSpec::Softmax,
            5 => LayerSpec::BatchNorm { channels: u(0) },
            6 => LayerSpec::Dropout {
                rate: f64::from_bits(f[0]),
            },
            7 => LayerSpec::GlobalAvgPool,
            8 => LayerSpec::Flatten,
            9 => LayerSpec::ResidualStack {
                in_ch: u(0),
                filters: u(1),
            },
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(NnError::Config(format!("{}: {why}", self.kind())));
        match *self {
            LayerSpec::Conv1d {
                in_ch,
                out_ch,
                kernel,
                stride,
                ..
            } => {
                if in_ch == 0 || out_ch == 0 || stride == 0 || kernel % 2 == 0 {
                    return bad(format!(
                        "channels and stride must be positive and kernel odd (in {in_ch}, out {out_ch}, kernel {kernel}, stride {stride})"
                    ));
                }
            }
            LayerSpec::Dense { inputs, units } if inputs == 0 || units == 0 => {
                return bad("inputs and units must be positive".into())
            }
            LayerSpec::BatchNorm { channels: 0 } => return bad("no channels".into()),
            LayerSpec::Dropout { rate } if !(0.0..1.0).contains(&rate) => {
                return bad(format!("rate {rate} not in [0, 1)"))
            }
            LayerSpec::ResidualStack { in_ch, filters } if in_ch == 0 || filters == 0 => {
                return bad("channels must be positive".into())
            }
            _ => {}
        }
        Ok(())
    }
}

pub trait Layer<T: Scalar>: Send + Sync {
    fn spec(&self) -> LayerSpec;

    fn forward(&mut self, x: &Tensor<T>, ctx: &Ctx) -> Result<Tensor<T>>;

    /// Gradient with respect to the input of the last forward call; adds
    /// parameter gradients into each [`Param::grad`].
    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>>;

    fn params(&self) -> Vec<&Param<T>> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        Vec::new()
    }

    /// Non-trainable state saved in checkpoints (batch norm running stats).
    fn buffers(&self) -> Vec<&Tensor<T>> {
        Vec::new()
    }

    fn buffers_mut(&mut self) -> Vec<&mut Tensor<T>> {
        Vec::new()
    }

    fn clone_box(&self) -> Box<dyn Layer<T>>;
}

impl<T: Scalar> Clone for Box<dyn Layer<T>> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Instantiates `spec` with weights drawn from `rng`.
pub fn build_layer<T: Scalar>(spec: LayerSpec, rng: &mut hfclass_core::seed::Rng) -> Result<Box<dyn Layer<T>>> {
    spec.validate()?;
    Ok(match spec {
        LayerSpec::Conv1d {
            in_ch,
            out_ch,
            kernel,
            stride,
            bias,
        } => Box::new(Conv1d::new(in_ch, out_ch, kernel, stride, bias, rng)),
        LayerSpec::MaxPool1d => Box::new(MaxPool1d::new()),
        LayerSpec::Dense { inputs, units } => Box::new(Dense::new(inputs, units, rng)),
        LayerSpec::Relu => Box::new(Relu::new()),
        LayerSpec::Softmax => Box::new(Softmax::new()),
        LayerSpec::BatchNorm { channels } => Box::new(BatchNorm::new(channels)),
        LayerSpec::Dropout { rate } => Box::new(Dropout::new(rate)),
        LayerSpec::GlobalAvgPool => Box::new(GlobalAvgPool::new()),
        LayerSpec::Flatten => Box::new(Flatten::new()),
        LayerSpec::ResidualStack { in_ch, filters } => Box::new(ResidualStack::new(in_ch, filters, rng)),
    })
}

/// He-style uniform initialisation: `U(-sqrt(6/fan_in), sqrt(6/fan_in))`.
pub(crate) fn fan_in_uniform<T: Scalar>(
    shape: &[usize],
    fan_in: usize,
    rng: &mut hfclass_core::seed::Rng,
) -> Tensor<T> {
    let bound = (6.0 / fan_in as f64).sqrt();
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| T::from_f64(rng.random_range(-bound..bound))).collect();
    Tensor::from_vec(shape, data).expect("shape matches")
}

pub(crate) fn no_cache(layer: &'static str) -> NnError {
    NnError::BackwardBeforeForward(layer)
}
