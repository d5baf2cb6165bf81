use rand::Rng as _;

use super::{no_cache, Ctx, Layer, LayerSpec};
use crate::tensor::{Scalar, Tensor};
use crate::Result;

/// Inverted dropout: kept units are scaled by `1/(1-rate)` so inference is
/// the identity. The mask is drawn from the context seed.
#[derive(Debug, Clone)]
pub struct Dropout<T> {
    rate: f64,
    /// `None` after an inference pass, which has identity gradient.
    mask: Option<Option<Vec<T>>>,
}

impl<T: Scalar> Dropout<T> {
    pub fn new(rate: f64) -> Self {
        Dropout { rate, mask: None }
    }
}

impl<T: Scalar> Layer<T> for Dropout<T> {
    fn spec(&self) -> LayerSpec {
        LayerSpec::Dropout { rate: self.rate }
    }

    fn forward(&mut self, x: &Tensor<T>, ctx: &Ctx) -> Result<Tensor<T>> {
        if !ctx.is_train() || self.rate == 0.0 {
            self.mask = Some(None);
            return Ok(x.clone());
        }
        let mut rng = hfclass_core::seed::rng(ctx.seed);
        let scale = T::from_f64(1.0 / (1.0 - self.rate));
        let mask: Vec<T> = (0..x.len())
            .map(|_| {
                if rng.random::<f64>() < self.rate {
                    T::zero()
                } else {
                    scale
                }
            })
            .collect();
        let mut y = x.clone();
        for (v, &m) in y.data_mut().iter_mut().zip(&mask) {
            *v = *v * m;
        }
        self.mask = Some(Some(mask));
        Ok(y)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let mask = self.mask.take().ok_or_else(|| no_cache("dropout"))?;
        let mut dx = dy.clone();
        if let Some(mask) = mask {
            for (v, &m) in dx.data_mut().iter_mut().zip(&mask) {
                *v = *v * m;
            }
        }
        Ok(dx)
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}
