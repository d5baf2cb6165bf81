use super::{no_cache, Ctx, Layer, LayerSpec};
use crate::tensor::{Scalar, Tensor};
use crate::Result;

#[derive(Debug, Clone, Default)]
pub struct Relu<T> {
    input: Option<Tensor<T>>,
}

impl<T: Scalar> Relu<T> {
    pub fn new() -> Self {
        Relu { input: None }
    }
}

impl<T: Scalar> Layer<T> for Relu<T> {
    fn spec(&self) -> LayerSpec {
        LayerSpec::Relu
    }

    fn forward(&mut self, x: &Tensor<T>, _ctx: &Ctx) -> Result<Tensor<T>> {
        self.input = Some(x.clone());
        Ok(x.map(|v| v.max(T::zero())))
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let x = self.input.take().ok_or_else(|| no_cache("relu"))?;
        let mut dx = dy.clone();
        for (g, &v) in dx.data_mut().iter_mut().zip(x.data()) {
            if v <= T::zero() {
                *g = T::zero();
            }
        }
        Ok(dx)
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}

/// Row-wise softmax of a `(rows, cols)` slice, shifted by the row maximum.
pub fn softmax_rows<T: Scalar>(x: &[T], cols: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(x.len());
    for row in x.chunks(cols) {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let e: Vec<T> = row.iter().map(|&v| (v - m).exp()).collect();
        let s: T = e.iter().copied().sum();
        out.extend(e.into_iter().map(|v| v / s));
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct Softmax<T> {
    output: Option<Tensor<T>>,
}

impl<T: Scalar> Softmax<T> {
    pub fn new() -> Self {
        Softmax { output: None }
    }
}

impl<T: Scalar> Layer<T> for Softmax<T> {
    fn spec(&self) -> LayerSpec {
        LayerSpec::Softmax
    }

    fn forward(&mut self, x: &Tensor<T>, _ctx: &Ctx) -> Result<Tensor<T>> {
        crate::tensor::expect_shape("softmax input", x, &[None, None])?;
        let y = Tensor::from_vec(x.shape(), softmax_rows(x.data(), x.shape()[1]))?;
        self.output = Some(y.clone());
        Ok(y)
    }

    /// Full Jacobian product: `dx = y ⊙ (dy − Σ dy·y)` per row.
    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let y = self.output.take().ok_or_else(|| no_cache("softmax"))?;
        let cols = y.shape()[1];
        let mut dx = Tensor::zeros(y.shape());
        for ((o, yr), gr) in dx
            .data_mut()
            .chunks_mut(cols)
            .zip(y.data().chunks(cols))
            .zip(dy.data().chunks(cols))
        {
            let dot: T = yr.iter().zip(gr).map(|(&a, &b)| a * b).sum();
            for ((o, &a), &g) in o.iter_mut().zip(yr).zip(gr) {
                *o = a * (g - dot);
            }
        }
        Ok(dx)
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}
