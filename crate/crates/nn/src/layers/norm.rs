use super::{no_cache, Ctx, Layer, LayerSpec, Param};
use crate::tensor::{Scalar, Tensor};
use crate::{NnError, Result};

pub const BN_MOMENTUM: f64 = 0.1;
pub const BN_EPS: f64 = 1e-5;

struct Cache<T> {
    xhat: Tensor<T>,
    inv_std: Vec<f64>,
    batch_stats: bool,
}

impl<T: Clone> Clone for Cache<T> {
    fn clone(&self) -> Self {
        Cache {
            xhat: self.xhat.clone(),
            inv_std: self.inv_std.clone(),
            batch_stats: self.batch_stats,
        }
    }
}

/// Per-channel normalisation of `(batch, channels, length)` or
/// `(batch, channels)`. Training uses the biased batch variance; inference
/// uses running statistics updated with momentum 0.1.
#[derive(Clone)]
pub struct BatchNorm<T> {
    channels: usize,
    pub gamma: Param<T>,
    pub beta: Param<T>,
    pub running_mean: Tensor<T>,
    pub running_var: Tensor<T>,
    cache: Option<Cache<T>>,
}

impl<T> std::fmt::Debug for BatchNorm<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BatchNorm").field("channels", &self.channels).finish()
    }
}

impl<T: Scalar> BatchNorm<T> {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            channels,
            gamma: Param::new(Tensor::filled(&[channels], T::one())),
            beta: Param::new(Tensor::zeros(&[channels])),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::filled(&[channels], T::one()),
            cache: None,
        }
    }

    /// Batch size and per-channel run length, or a shape error.
    fn layout(&self, x: &Tensor<T>) -> Result<(usize, usize)> {
        let s = x.shape();
        let ok = (s.len() == 2 || s.len() == 3) && s[1] == self.channels;
        if !ok {
            return Err(NnError::Shape {
                what: "batchnorm input".into(),
                expected: format!("[_, {}, _] or [_, {}]", self.channels, self.channels),
                actual: format!("{s:?}"),
            });
        }
        Ok((s[0], s.get(2).copied().unwrap_or(1)))
    }
}

impl<T: Scalar> Layer<T> for BatchNorm<T> {
    fn spec(&self) -> LayerSpec {
        LayerSpec::BatchNorm {
            channels: self.channels,
        }
    }

    fn forward(&mut self, x: &Tensor<T>, ctx: &Ctx) -> Result<Tensor<T>> {
        let (b, l) = self.layout(x)?;
        let c = self.channels;
        let n = (b * l) as f64;
        let (mean, var): (Vec<f64>, Vec<f64>) = if ctx.is_train() {
            let mut mean = vec![0.0; c];
            let mut sq = vec![0.0; c];
            for (i, run) in x.data().chunks(l).enumerate() {
                let m: f64 = run.iter().map(|v| v.as_f64()).sum();
                mean[i % c] += m;
            }
            mean.iter_mut().for_each(|m| *m /= n);
            for (i, run) in x.data().chunks(l).enumerate() {
                let m = mean[i % c];
                sq[i % c] += run.iter().map(|v| (v.as_f64() - m).powi(2)).sum::<f64>();
            }
            let var: Vec<f64> = sq.iter().map(|s| s / n).collect();
            let keep = T::from_f64(1.0 - BN_MOMENTUM);
            let mom = T::from_f64(BN_MOMENTUM);
            for ch in 0..c {
                let rm = &mut self.running_mean.data_mut()[ch];
                *rm = keep * *rm + mom * T::from_f64(mean[ch]);
                let rv = &mut self.running_var.data_mut()[ch];
                *rv = keep * *rv + mom * T::from_f64(var[ch]);
            }
            (mean, var)
        } else {
            (
                self.running_mean.data().iter().map(|v| v.as_f64()).collect(),
                self.running_var.data().iter().map(|v| v.as_f64()).collect(),
            )
        };
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
        let mut xhat = Tensor::zeros(x.shape());
        let mut y = Tensor::zeros(x.shape());
        for (i, ((hr, yr), xr)) in xhat
            .data_mut()
            .chunks_mut(l)
            .zip(y.data_mut().chunks_mut(l))
            .zip(x.data().chunks(l))
            .enumerate()
        {
            let ch = i % c;
            let (m, is) = (T::from_f64(mean[ch]), T::from_f64(inv_std[ch]));
            let (g, bt) = (self.gamma.value.data()[ch], self.beta.value.data()[ch]);
            for ((h, o), &v) in hr.iter_mut().zip(yr.iter_mut()).zip(xr) {
                *h = (v - m) * is;
                *o = g * *h + bt;
            }
        }
        self.cache = Some(Cache {
            xhat,
            inv_std,
            batch_stats: ctx.is_train(),
        });
        Ok(y)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let cache = self.cache.take().ok_or_else(|| no_cache("batchnorm"))?;
        let (b, l) = self.layout(&cache.xhat)?;
        let c = self.channels;
        let n = (b * l) as f64;
        let mut sum_dy = vec![0.0; c];
        let mut sum_dy_xhat = vec![0.0; c];
        for (i, (gr, hr)) in dy.data().chunks(l).zip(cache.xhat.data().chunks(l)).enumerate() {
            let ch = i % c;
            for (&g, &h) in gr.iter().zip(hr) {
                sum_dy[ch] += g.as_f64();
                sum_dy_xhat[ch] += g.as_f64() * h.as_f64();
            }
        }
        for ch in 0..c {
            let dg = &mut self.gamma.grad.data_mut()[ch];
            *dg = *dg + T::from_f64(sum_dy_xhat[ch]);
            let db = &mut self.beta.grad.data_mut()[ch];
            *db = *db + T::from_f64(sum_dy[ch]);
        }
        let mut dx = Tensor::zeros(dy.shape());
        for (i, ((dr, gr), hr)) in dx
            .data_mut()
            .chunks_mut(l)
            .zip(dy.data().chunks(l))
            .zip(cache.xhat.data().chunks(l))
            .enumerate()
        {
            let ch = i % c;
            let scale = self.gamma.value.data()[ch].as_f64() * cache.inv_std[ch];
            if cache.batch_stats {
                let (mdy, mdh) = (sum_dy[ch] / n, sum_dy_xhat[ch] / n);
                for ((d, &g), &h) in dr.iter_mut().zip(gr).zip(hr) {
                    *d = T::from_f64(scale * (g.as_f64() - mdy - h.as_f64() * mdh));
                }
            } else {
                let s = T::from_f64(scale);
                for (d, &g) in dr.iter_mut().zip(gr) {
                    *d = s * g;
                }
            }
        }
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.gamma, &self.beta]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.gamma, &mut self.beta]
    }

    fn buffers(&self) -> Vec<&Tensor<T>> {
        vec![&self.running_mean, &self.running_var]
    }

    fn buffers_mut(&mut self) -> Vec<&mut Tensor<T>> {
        vec![&mut self.running_mean, &mut self.running_var]
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}
