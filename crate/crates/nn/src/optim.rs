//! Adam and a reduce-on-plateau learning-rate schedule.

use crate::layers::Param;
use crate::tensor::{Scalar, Tensor};
use crate::{NnError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr >= 0.0
            && self.lr.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(NnError::Config(format!(
                "adam: need lr >= 0, 0 <= beta1, beta2 < 1 and eps > 0 (got {self:?})"
            )))
        }
    }
}

/// Adam with bias correction. Moment buffers are created on the first step
/// and follow the order of the parameter list.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub config: AdamConfig,
    /// Current learning rate; starts at `config.lr` and is lowered by the scheduler.
    pub lr: f64,
    /// Completed steps.
    pub t: u64,
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Adam {
            config,
            lr: config.lr,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        })
    }

    /// One update of every parameter from its accumulated gradient. Rejects
    /// the whole step, leaving parameters untouched, if any gradient is not finite.
    pub fn step(&mut self, params: Vec<&mut Param<T>>) -> Result<()> {
        if let Some(i) = params.iter().position(|p| !p.grad.is_finite()) {
            return Err(NnError::NonFinite {
                what: format!("gradient of parameter tensor {i}"),
                epoch: 0,
                batch: 0,
            });
        }
        if self.m.is_empty() {
            self.m = params.iter().map(|p| Tensor::zeros(p.value.shape())).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != params.len() || self.m.iter().zip(&params).any(|(m, p)| m.shape() != p.value.shape()) {
            return Err(NnError::Config("adam state does not match the parameter list".into()));
        }
        self.t += 1;
        let c = &self.config;
        let (b1, b2) = (T::from_f64(c.beta1), T::from_f64(c.beta2));
        let (nb1, nb2) = (T::from_f64(1.0 - c.beta1), T::from_f64(1.0 - c.beta2));
        let bc1 = T::from_f64(1.0 - c.beta1.powf(self.t as f64));
        let bc2 = T::from_f64(1.0 - c.beta2.powf(self.t as f64));
        let lr = T::from_f64(self.lr);
        let eps = T::from_f64(c.eps);
        for ((p, m), v) in params.into_iter().zip(&mut self.m).zip(&mut self.v) {
            let theta = p.value.data_mut();
            for (((w, &g), m), v) in theta.iter_mut().zip(p.grad.data()).zip(m.data_mut()).zip(v.data_mut()) {
                *m = b1 * *m + nb1 * g;
                *v = b2 * *v + nb2 * g * g;
                let mh = *m / bc1;
                let vh = *v / bc2;
                *w = *w - lr * mh / (vh.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauConfig {
    pub factor: f64,
    /// Epochs without improvement before the rate is cut.
    pub patience: usize,
    /// Absolute decrease in validation loss that counts as improvement.
    pub min_delta: f64,
    pub min_lr: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        PlateauConfig {
            factor: 0.5,
            patience: 3,
            min_delta: 1e-3,
            min_lr: 1e-5,
        }
    }
}

impl PlateauConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.factor > 0.0 && self.factor < 1.0) || self.patience == 0 || self.min_delta < 0.0 || self.min_lr < 0.0
        {
            return Err(NnError::Config(format!(
                "plateau: need 0 < factor < 1, patience >= 1, min_delta >= 0, min_lr >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Halves (by default) the learning rate after `patience` epochs without
/// improvement, then starts counting again.
#[derive(Debug, Clone, PartialEq)]
pub struct Plateau {
    pub config: PlateauConfig,
    pub best: f64,
    pub bad_epochs: usize,
}

impl Plateau {
    pub fn new(config: PlateauConfig) -> Result<Self> {
        config.validate()?;
        Ok(Plateau {
            config,
            best: f64::INFINITY,
            bad_epochs: 0,
        })
    }

    /// Records one epoch's validation loss and returns the learning rate to use next.
    pub fn observe(&mut self, val_loss: f64, lr: f64) -> f64 {
        if val_loss < self.best - self.config.min_delta {
            self.best = val_loss;
            self.bad_epochs = 0;
            return lr;
        }
        self.bad_epochs += 1;
        if self.bad_epochs >= self.config.patience {
            self.bad_epochs = 0;
            return (lr * self.config.factor).max(self.config.min_lr);
        }
        lr
    }
}
