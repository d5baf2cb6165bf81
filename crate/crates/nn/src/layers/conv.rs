use super::{fan_in_uniform, no_cache, Ctx, Layer, LayerSpec, Param};
use crate::tensor::{expect_shape, Scalar, Tensor};
use crate::Result;

/// 1-D cross-correlation over `(batch, channels, length)` with zero padding
/// `(kernel-1)/2` on both sides.
///
/// Each kernel tap is one strided GEMM against the padded input, so no
/// im2col buffer is built.
#[derive(Debug, Clone)]
pub struct Conv1d<T> {
    in_ch: usize,
    out_ch: usize,
    kernel: usize,
    stride: usize,
    /// `(out_ch, in_ch, kernel)`.
    pub weight: Param<T>,
    pub bias: Option<Param<T>>,
    /// Padded input of the last forward pass and its unpadded length.
    cache: Option<(Tensor<T>, usize)>,
}

impl<T: Scalar> Conv1d<T> {
    pub fn new(
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        bias: bool,
        rng: &mut hfclass_core::seed::Rng,
    ) -> Self {
        let weight = fan_in_uniform(&[out_ch, in_ch, kernel], in_ch * kernel, rng);
        Conv1d {
            in_ch,
            out_ch,
            kernel,
            stride,
            weight: Param::new(weight),
            bias: bias.then(|| Param::new(Tensor::zeros(&[out_ch]))),
            cache: None,
        }
    }

    fn pad(&self) -> usize {
        (self.kernel - 1) / 2
    }

    pub fn out_len(&self, len: usize) -> usize {
        (len + 2 * self.pad() - self.kernel) / self.stride + 1
    }
}

impl<T: Scalar> Layer<T> for Conv1d<T> {
    fn spec(&self) -> LayerSpec {
        LayerSpec::Conv1d {
            in_ch: self.in_ch,
            out_ch: self.out_ch,
            kernel: self.kernel,
            stride: self.stride,
            bias: self.bias.is_some(),
        }
    }

    fn forward(&mut self, x: &Tensor<T>, _ctx: &Ctx) -> Result<Tensor<T>> {
        expect_shape("conv1d input", x, &[None, Some(self.in_ch), None])?;
        let (b, c, l) = (x.shape()[0], self.in_ch, x.shape()[2]);
        let p = self.pad();
        let lp = l + 2 * p;
        if lp < self.kernel {
            return Err(crate::NnError::Shape {
                what: "conv1d input".into(),
                expected: format!("length >= {}", self.kernel - 2 * p),
                actual: format!("{:?}", x.shape()),
            });
        }
        let lo = self.out_len(l);
        let (o, k, s) = (self.out_ch, self.kernel, self.stride);

        let mut xp = Tensor::zeros(&[b, c, lp]);
        for (dst, src) in xp.data_mut().chunks_mut(lp).zip(x.data().chunks(l)) {
            dst[p..p + l].copy_from_slice(src);
        }
        let mut y = Tensor::zeros(&[b, o, lo]);
        let w = self.weight.value.data();
        for bi in 0..b {
            let xb = &xp.data()[bi * c * lp..(bi + 1) * c * lp];
            let yb = &mut y.data_mut()[bi * o * lo..(bi + 1) * o * lo];
            if let Some(bias) = &self.bias {
                for (row, &v) in yb.chunks_mut(lo).zip(bias.value.data()) {
                    row.fill(v);
                }
            }
            for tap in 0..k {
                // y_b += W[:, :, tap] · xp_b[:, tap + s·j]
                unsafe {
                    T::gemm(
                        o,
                        c,
                        lo,
                        T::one(),
                        w.as_ptr().add(tap),
                        (c * k) as isize,
                        k as isize,
                        xb.as_ptr().add(tap),
                        lp as isize,
                        s as isize,
                        T::one(),
                        yb.as_mut_ptr(),
                        lo as isize,
                        1,
                    );
                }
            }
        }
        self.cache = Some((xp, l));
        Ok(y)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let (xp, l) = self.cache.take().ok_or_else(|| no_cache("conv1d"))?;
        let (b, c, lp) = (xp.shape()[0], self.in_ch, xp.shape()[2]);
        let (o, k, s) = (self.out_ch, self.kernel, self.stride);
        let lo = self.out_len(l);
        expect_shape("conv1d gradient", dy, &[Some(b), Some(o), Some(lo)])?;
        let p = self.pad();

        let mut dxp = Tensor::<T>::zeros(&[b, c, lp]);
        let w = self.weight.value.data();
        let dw = self.weight.grad.data_mut();
        for bi in 0..b {
            let xb = &xp.data()[bi * c * lp..(bi + 1) * c * lp];
            let gb = &dy.data()[bi * o * lo..(bi + 1) * o * lo];
            let dxb = &mut dxp.data_mut()[bi * c * lp..(bi + 1) * c * lp];
            for tap in 0..k {
                unsafe {
                    // dW[:, :, tap] += dy_b · xp_b[:, tap + s·j]ᵀ
                    T::gemm(
                        o,
                        lo,
                        c,
                        T::one(),
                        gb.as_ptr(),
                        lo as isize,
                        1,
                        xb.as_ptr().add(tap),
                        s as isize,
                        lp as isize,
                        T::one(),
                        dw.as_mut_ptr().add(tap),
                        (c * k) as isize,
                        k as isize,
                    );
                    // dxp_b[:, tap + s·j] += W[:, :, tap]ᵀ · dy_b
                    T::gemm(
                        c,
                        o,
                        lo,
                        T::one(),
                        w.as_ptr().add(tap),
                        k as isize,
                        (c * k) as isize,
                        gb.as_ptr(),
                        lo as isize,
                        1,
                        T::one(),
                        dxb.as_mut_ptr().add(tap),
                        lp as isize,
                        s as isize,
                    );
                }
            }
        }
        if let Some(bias) = &mut self.bias {
            let db = bias.grad.data_mut();
            for (i, row) in dy.data().chunks(lo).enumerate() {
                db[i % o] = db[i % o] + row.iter().copied().sum::<T>();
            }
        }
        let mut dx = Tensor::zeros(&[b, c, l]);
        for (dst, src) in dx.data_mut().chunks_mut(l).zip(dxp.data().chunks(lp)) {
            dst.copy_from_slice(&src[p..p + l]);
        }
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param<T>> {
        std::iter::once(&self.weight).chain(&self.bias).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        std::iter::once(&mut self.weight).chain(&mut self.bias).collect()
    }

    fn clone_box(&self) -> Box<dyn Layer<T>> {
        Box::new(self.clone())
    }
}
