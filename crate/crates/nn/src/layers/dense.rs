use super::{fan_in_uniform, no_cache, Ctx, Layer, LayerSpec, Param};
use crate::tensor::{expect_shape, Scalar, Tensor};
use crate::Result;

/// `y = x·W + b` on `(batch, inputs)`.
#[derive(Debug, Clone)]
pub struct Dense<T> {
    inputs: usize,
    units: usize,
    /// `(inputs, units)`.
    pub weight: Param<T>,
    pub bias: Param<T>,
    input: Option<Tensor<T>>,
}

impl<T: Scalar> Dense<T> {
    pub fn new(inputs: usize, units: usize, rng: &mut hfclass_core::seed::Rng) -> Self {
        Dense {
            inputs,
            units,
            weight: Param::new(fan_in_uniform(&[inputs, units], inputs, rng)),
            bias: Param::new(Tensor::zeros(&[units])),
            input: None,
        }
    }
}

impl<T: Scalar> Layer<T> for Dense<T> {
    fn spec(&self) -> LayerSpec {
        LayerSpec::Dense {
            inputs: self.inputs,
            units: self.units,
        }
    }

    fn forward(&mut self, x: &Tensor<T>, _ctx: &Ctx) -> Result<Tensor<T>> {
        expect_shape("dense input", x, &[None, Some(self.inputs)])?;
        let (b, n, u) = (x.shape()[0], self.inputs, self.units);
        let mut y = Tensor::zeros(&[b, u]);
        for row in y.data_mut().chunks_mut(u) {
            row.copy_from_slice(self.bias.value.data());
        }
        unsafe {
            T::gemm(
                b,
                n,
                u,
                T::one(),
                x.data().as_ptr(),
                n as isize,
                1,
                self.weight.value.data().as_ptr(),
                u as isize,
                1,
                T::one(),
                y.data_mut().as_mut_ptr(),
                u as isize,
                1,
            );
        }
        self.input = Some(x.clone());
        Ok(y)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let x = self.input.take().ok_or_else(|| no_cache("dense"))?;
        let (b, n, u) = (x.shape()[0], self.inputs, self.units);
        expect_shape("dense gradient", dy, &[Some(b), Some(u)])?;
        let mut dx = Tensor::zeros(&[b, n]);
        unsafe {
            // dW += xᵀ·dy
            T::gemm(
                n,
                b,
                u,
                T::one(),
                x.data().as_ptr(),
                1,
                n as isize,
                dy.data().as_ptr(),
                u as isize,
                1,
                T::one(),
                self.weight.grad.data_mut().as_mut_ptr(),
                u as isize,
                1,
            );
            // dx = dy·Wᵀ
            T::gemm(
                b,
                u,
                n,
                T::one(),
                dy.data().as_ptr(),
                u as isize,
                1,
                self.weight.value.data().as_ptr(),
                1,
                u as isize,
                T::zero(),
                dx.data_mut().as_mut_ptr(),
                n as isize,
                1,
            );
        }
        let db = self.bias.grad.data_mut();
        for row in dy.data().chunks(u) {
            for (d, &g) in db.iter_mut().zip(row) {
                *d = *d + g;
            }
        }
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.weight, &mut self.bias]
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}
