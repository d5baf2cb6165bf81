//! Central finite-difference checks of analytic gradients in `f64`.

use rand::Rng as _;

use crate::layers::{Ctx, Layer};
use crate::model::{cross_entropy, Model};
use crate::tensor::Tensor;
use crate::Result;

pub const STEP: f64 = 1e-5;

/// `|a − n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GradReport {
    pub max_rel_err: f64,
    /// Where the largest error occurred, e.g. `param 2[17]` or `input[5]`.
    pub worst: String,
    pub checked: usize,
}

impl GradReport {
    fn record(&mut self, what: impl FnOnce() -> String, analytic: f64, numeric: f64) {
        let e = relative_error(analytic, numeric);
        self.checked += 1;
        if e > self.max_rel_err || self.worst.is_empty() {
            self.max_rel_err = self.max_rel_err.max(e);
            self.worst = what();
        }
    }
}

/// Checks `layer` under the scalar loss `Σ wᵢ·yᵢ` with fixed random weights
/// `w` drawn from `seed`. Every parameter and every input element is probed.
pub fn check_layer(layer: &mut dyn Layer<f64>, x: &Tensor<f64>, ctx: &Ctx, seed: u64) -> Result<GradReport> {
    let y = layer.forward(x, ctx)?;
    let mut rng = hfclass_core::seed::rng(seed);
    let w_data = (0..y.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let w = Tensor::from_vec(y.shape(), w_data)?;
    let loss = |layer: &mut dyn Layer<f64>, x: &Tensor<f64>| -> Result<f64> {
        let y = layer.forward(x, ctx)?;
        Ok(y.data().iter().zip(w.data()).map(|(a, b)| a * b).sum())
    };

    for p in layer.params_mut() {
        p.zero_grad();
    }
    let dx = layer.backward(&w)?;
    let analytic: Vec<Vec<f64>> = layer.params().iter().map(|p| p.grad.data().to_vec()).collect();

    let mut report = GradReport::default();
    for (pi, grads) in analytic.iter().enumerate() {
        for (j, &a) in grads.iter().enumerate() {
            let orig = layer.params_mut()[pi].value.data()[j];
            layer.params_mut()[pi].value.data_mut()[j] = orig + STEP;
            let lp = loss(layer, x)?;
            layer.params_mut()[pi].value.data_mut()[j] = orig - STEP;
            let lm = loss(layer, x)?;
            layer.params_mut()[pi].value.data_mut()[j] = orig;
            report.record(|| format!("param {pi}[{j}]"), a, (lp - lm) / (2.0 * STEP));
        }
    }
    let mut xp = x.clone();
    for j in 0..x.len() {
        let orig = x.data()[j];
        xp.data_mut()[j] = orig + STEP;
        let lp = loss(layer, &xp)?;
        xp.data_mut()[j] = orig - STEP;
        let lm = loss(layer, &xp)?;
        xp.data_mut()[j] = orig;
        report.record(|| format!("input[{j}]"), dx.data()[j], (lp - lm) / (2.0 * STEP));
    }
    Ok(report)
}

/// Checks a whole model under mean cross-entropy, using the fused softmax
/// gradient for the analytic side. Only parameters are probed.
pub fn check_model(model: &mut Model<f64>, x: &Tensor<f64>, labels: &[usize], ctx: &Ctx) -> Result<GradReport> {
    let probs = model.forward(x, ctx)?;
    model.zero_grad();
    model.backward_cross_entropy(&probs, labels)?;
    let analytic: Vec<Vec<f64>> = model.params().iter().map(|p| p.grad.data().to_vec()).collect();
    let mut report = GradReport::default();
    for (pi, grads) in analytic.iter().enumerate() {
        for (j, &a) in grads.iter().enumerate() {
            let orig = model.params()[pi].value.data()[j];
            model.params_mut()[pi].value.data_mut()[j] = orig + STEP;
            let lp = cross_entropy(&model.forward(x, ctx)?, labels);
            model.params_mut()[pi].value.data_mut()[j] = orig - STEP;
            let lm = cross_entropy(&model.forward(x, ctx)?, labels);
            model.params_mut()[pi].value.data_mut()[j] = orig;
            report.record(|| format!("param {pi}[{j}]"), a, (lp - lm) / (2.0 * STEP));
        }
    }
    Ok(report)
}
