//! Central finite-difference checks of analytic gradients.

use super::layers::Layer;
use super::model::Model;
use super::tensor::Tensor;
use crate::error::Result;

/// Relative error with an absolute floor so that exact zeros compare cleanly.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Largest relative error between backprop and central differences over
/// every parameter of `model`.
pub fn check_model(model: &Model, batch: &Tensor, labels: &[usize], step: f64) -> Result<f64> {
    let (_, grads) = model.loss_and_grad(batch, labels)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (pi, g) in grads.iter().enumerate() {
        for j in 0..g.len() {
            let orig = probe.params()[pi][j];
            probe.params_mut()[pi][j] = orig + step;
            let (up, _) = probe.loss_and_grad(batch, labels)?;
            probe.params_mut()[pi][j] = orig - step;
            let (down, _) = probe.loss_and_grad(batch, labels)?;
            probe.params_mut()[pi][j] = orig;
            worst = worst.max(relative_error(g[j], (up - down) / (2.0 * step)));
        }
    }
    Ok(worst)
}

/// Check one layer under the scalar objective `sum(w * layer(x))` for a fixed
/// random weighting `w`, covering both input and parameter gradients.
pub fn check_layer(layer: &Layer, x: &Tensor, weights: &[f64], step: f64) -> Result<f64> {
    let objective = |l: &Layer, x: &Tensor| -> Result<f64> {
        let y = l.forward(x)?;
        Ok(y.data().iter().zip(weights).map(|(a, b)| a * b).sum())
    };
    let y = layer.forward(x)?;
    let dy = Tensor::new(y.shape().to_vec(), weights[..y.len()].to_vec())?;
    let mut grads: Vec<Vec<f64>> = layer.params().iter().map(|p| vec![0.0; p.len()]).collect();
    let dx = layer.backward(x, &dy, &mut grads);

    let mut worst = 0.0f64;
    let mut xp = x.clone();
    for i in 0..x.len() {
        let orig = xp.data()[i];
        xp.data_mut()[i] = orig + step;
        let up = objective(layer, &xp)?;
        xp.data_mut()[i] = orig - step;
        let down = objective(layer, &xp)?;
        xp.data_mut()[i] = orig;
        worst = worst.max(relative_error(dx.data()[i], (up - down) / (2.0 * step)));
    }
    let mut probe = layer.clone();
    for (pi, g) in grads.iter().enumerate() {
        for j in 0..g.len() {
            let orig = probe.params()[pi][j];
            probe.params_mut()[pi][j] = orig + step;
            let up = objective(&probe, x)?;
            probe.params_mut()[pi][j] = orig - step;
            let down = objective(&probe, x)?;
            probe.params_mut()[pi][j] = orig;
            worst = worst.max(relative_error(g[j], (up - down) / (2.0 * step)));
        }
    }
    Ok(worst)
}
