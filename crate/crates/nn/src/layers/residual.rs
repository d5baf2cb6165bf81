use super::{BatchNorm, Conv1d, Ctx, Layer, LayerSpec, MaxPool1d, Param, Relu};
use crate::tensor::{Scalar, Tensor};
use crate::Result;

#[derive(Debug, Clone)]
struct Unit<T> {
    conv_a: Conv1d<T>,
    relu_a: Relu<T>,
    conv_b: Conv1d<T>,
    relu_out: Relu<T>,
}

impl<T: Scalar> Unit<T> {
    fn new(n: usize, rng: &mut hfclass_core::seed::Rng) -> Self {
        Unit {
            conv_a: Conv1d::new(n, n, 3, 1, true, rng),
            relu_a: Relu::new(),
            conv_b: Conv1d::new(n, n, 3, 1, true, rng),
            relu_out: Relu::new(),
        }
    }

    fn forward(&mut self, x: &Tensor<T>, ctx: &Ctx) -> Result<Tensor<T>> {
        let a = self.relu_a.forward(&self.conv_a.forward(x, ctx)?, ctx)?;
        let mut b = self.conv_b.forward(&a, ctx)?;
        b.add_assign(x);
        self.relu_out.forward(&b, ctx)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let g = self.relu_out.backward(dy)?;
        let mut dx = self
            .conv_a
            .backward(&self.relu_a.backward(&self.conv_b.backward(&g)?)?)?;
        dx.add_assign(&g);
        Ok(dx)
    }
}

/// A 1×1 convolution to `N` filters with batch norm, two residual units
/// `relu(x + conv3(relu(conv3(x))))`, then max pooling. Five weighted layers.
#[derive(Debug, Clone)]
pub struct ResidualStack<T> {
    in_ch: usize,
    filters: usize,
    project: Conv1d<T>,
    norm: BatchNorm<T>,
    units: [Unit<T>; 2],
    pool: MaxPool1d,
}

impl<T: Scalar> ResidualStack<T> {
    pub fn new(in_ch: usize, filters: usize, rng: &mut hfclass_core::seed::Rng) -> Self {
        let project = Conv1d::new(in_ch, filters, 1, 1, false, rng);
        let units = [Unit::new(filters, rng), Unit::new(filters, rng)];
        ResidualStack {
            in_ch,
            filters,
            project,
            norm: BatchNorm::new(filters),
            units,
            pool: MaxPool1d::new(),
        }
    }
}

impl<T: Scalar> Layer<T> for ResidualStack<T> {
    fn spec(&self) -> LayerSpec {
        LayerSpec::ResidualStack {
            in_ch: self.in_ch,
            filters: self.filters,
        }
    }

    fn forward(&mut self, x: &Tensor<T>, ctx: &Ctx) -> Result<Tensor<T>> {
        let mut h = self.norm.forward(&self.project.forward(x, ctx)?, ctx)?;
        for u in &mut self.units {
            h = u.forward(&h, ctx)?;
        }
        self.pool.forward(&h, ctx)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let mut g = Layer::<T>::backward(&mut self.pool, dy)?;
        for u in self.units.iter_mut().rev() {
            g = u.backward(&g)?;
        }
        self.project.backward(&self.norm.backward(&g)?)
    }

    fn params(&self) -> Vec<&Param<T>> {
        let mut p = self.project.params();
        p.extend(self.norm.params());
        for u in &self.units {
            p.extend(u.conv_a.params());
            p.extend(u.conv_b.params());
        }
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut p = self.project.params_mut();
        p.extend(self.norm.params_mut());
        for u in &mut self.units {
            p.extend(u.conv_a.params_mut());
            p.extend(u.conv_b.params_mut());
        }
        p
    }

    fn buffers(&self) -> Vec<&Tensor<T>> {
        self.norm.buffers()
    }

    fn buffers_mut(&mut self) -> Vec<&mut Tensor<T>> {
        self.norm.buffers_mut()
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}
