use super::{no_cache, Ctx, Layer, LayerSpec};
use crate::tensor::{expect_shape, Scalar, Tensor};
use crate::Result;

/// Window 2, stride 2 over the last axis. An odd trailing sample is dropped.
#[derive(Debug, Clone, Default)]
pub struct MaxPool1d {
    /// Input shape and, per output element, the flat input index it came from.
    cache: Option<(Vec<usize>, Vec<usize>)>,
}

impl MaxPool1d {
    pub fn new() -> Self {
        MaxPool1d { cache: None }
    }
}

impl<T: Scalar> Layer<T> for MaxPool1d {
    fn spec(&self) -> LayerSpec {
        LayerSpec::MaxPool1d
    }

    fn forward(&mut self, x: &Tensor<T>, _ctx: &Ctx) -> Result<Tensor<T>> {
        expect_shape("maxpool1d input", x, &[None, None, None])?;
        let (b, c, l) = (x.shape()[0], x.shape()[1], x.shape()[2]);
        let lo = l / 2;
        let mut y = Vec::with_capacity(b * c * lo);
        let mut arg = Vec::with_capacity(b * c * lo);
        for (r, row) in x.data().chunks(l.max(1)).enumerate() {
            for j in 0..lo {
                let (a, z) = (row[2 * j], row[2 * j + 1]);
                // Ties go to the first element.
                let pick = if z > a { 2 * j + 1 } else { 2 * j };
                y.push(row[pick]);
                arg.push(r * l + pick);
            }
        }
        self.cache = Some((x.shape().to_vec(), arg));
        Tensor::from_vec(&[b, c, lo], y)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let (shape, arg) = self.cache.take().ok_or_else(|| no_cache("maxpool1d"))?;
        let mut dx = Tensor::zeros(&shape);
        let d = dx.data_mut();
        for (&i, &g) in arg.iter().zip(dy.data()) {
            d[i] = d[i] + g;
        }
        Ok(dx)
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}

/// Mean over the last axis: `(batch, channels, length)` → `(batch, channels)`.
#[derive(Debug, Clone, Default)]
pub struct GlobalAvgPool {
    shape: Option<Vec<usize>>,
}

impl GlobalAvgPool {
    pub fn new() -> Self {
        GlobalAvgPool { shape: None }
    }
}

impl<T: Scalar> Layer<T> for GlobalAvgPool {
    fn spec(&self) -> LayerSpec {
        LayerSpec::GlobalAvgPool
    }

    fn forward(&mut self, x: &Tensor<T>, _ctx: &Ctx) -> Result<Tensor<T>> {
        expect_shape("global_avg_pool input", x, &[None, None, None])?;
        let (b, c, l) = (x.shape()[0], x.shape()[1], x.shape()[2]);
        let inv = T::from_f64(1.0 / l as f64);
        let y = x.data().chunks(l).map(|r| r.iter().copied().sum::<T>() * inv).collect();
        self.shape = Some(x.shape().to_vec());
        Tensor::from_vec(&[b, c], y)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let shape = self.shape.take().ok_or_else(|| no_cache("global_avg_pool"))?;
        let l = shape[2];
        let inv = T::from_f64(1.0 / l as f64);
        let data = dy
            .data()
            .iter()
            .flat_map(|&g| std::iter::repeat(g * inv).take(l))
            .collect();
        Tensor::from_vec(&shape, data)
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}

/// `(batch, ...)` → `(batch, product of the rest)`.
#[derive(Debug, Clone, Default)]
pub struct Flatten {
    shape: Option<Vec<usize>>,
}

impl Flatten {
    pub fn new() -> Self {
        Flatten { shape: None }
    }
}

impl<T: Scalar> Layer<T> for Flatten {
    fn spec(&self) -> LayerSpec {
        LayerSpec::Flatten
    }

    fn forward(&mut self, x: &Tensor<T>, _ctx: &Ctx) -> Result<Tensor<T>> {
        let b = *x.shape().first().unwrap_or(&0);
        self.shape = Some(x.shape().to_vec());
        x.clone().reshape(&[b, x.len() / b.max(1)])
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let shape = self.shape.take().ok_or_else(|| no_cache("flatten"))?;
        dy.clone().reshape(&shape)
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}
