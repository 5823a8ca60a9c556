use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{Conv1d, Conv2d, Dense, Layer, MaxPool1d, MaxPool2d};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const NUM_CLASSES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// 1D CNN over raw windows, input `[batch, p]`.
    Raw1D,
    /// 2D CNN over GAF images, input `[batch, S, S]`.
    Gaf2D,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Variant::Raw1D => "raw1d",
            Variant::Gaf2D => "gaf2d",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw1d" | "raw" => Ok(Variant::Raw1D),
            "gaf2d" | "gaf" => Ok(Variant::Gaf2D),
            other => Err(Error::InvalidValue(format!(
                "unknown model variant '{other}'"
            ))),
        }
    }
}

/// Architecture description. Convolutions and pools are 1D or 2D according
/// to the variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv { filters: usize, kernel: usize },
    MaxPool { size: usize },
    Relu,
    GlobalAvgPool,
    Dense { units: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    /// Window length `p` for Raw1D, image side `S` for Gaf2D.
    pub input_size: usize,
    pub layers: Vec<LayerSpec>,
    pub num_classes: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn raw1d(window_len: usize, seed: u64) -> Self {
        use LayerSpec::*;
        ModelConfig {
            variant: Variant::Raw1D,
            input_size: window_len,
            layers: vec![
                Conv {
                    filters: 32,
                    kernel: 8,
                },
                Relu,
                MaxPool { size: 4 },
                Conv {
                    filters: 64,
                    kernel: 8,
                },
                Relu,
                GlobalAvgPool,
                Dense { units: NUM_CLASSES },
            ],
            num_classes: NUM_CLASSES,
            seed,
        }
    }

    pub fn gaf2d(image_size: usize, seed: u64) -> Self {
        use LayerSpec::*;
        ModelConfig {
            variant: Variant::Gaf2D,
            input_size: image_size,
            layers: vec![
                Conv {
                    filters: 16,
                    kernel: 3,
                },
                Relu,
                MaxPool { size: 2 },
                Conv {
                    filters: 32,
                    kernel: 3,
                },
                Relu,
                MaxPool { size: 2 },
                GlobalAvgPool,
                Dense { units: NUM_CLASSES },
            ],
            num_classes: NUM_CLASSES,
            seed,
        }
    }

    pub fn for_variant(variant: Variant, input_size: usize, seed: u64) -> Self {
        match variant {
            Variant::Raw1D => Self::raw1d(input_size, seed),
            Variant::Gaf2D => Self::gaf2d(input_size, seed),
        }
    }

    /// Per-sample input shape without the batch axis.
    pub fn input_shape(&self) -> Vec<usize> {
        match self.variant {
            Variant::Raw1D => vec![self.input_size],
            Variant::Gaf2D => vec![self.input_size, self.input_size],
        }
    }

    /// Check extents through the stack and the output width.
    pub fn validate(&self) -> Result<()> {
        if self.num_classes != NUM_CLASSES {
            return Err(Error::Parameter(format!(
                "num_classes must be {NUM_CLASSES}, got {}",
                self.num_classes
            )));
        }
        let mut extent = self.input_size;
        let mut flat: Option<usize> = None;
        for (i, spec) in self.layers.iter().enumerate() {
            let fail = |msg: String| Error::Parameter(format!("layer {i} ({spec:?}): {msg}"));
            match *spec {
                LayerSpec::Conv { filters, kernel } => {
                    if flat.is_some() {
                        return Err(fail("convolution after flattening".into()));
                    }
                    if filters == 0 || kernel == 0 || kernel > extent {
                        return Err(fail(format!(
                            "kernel {kernel} exceeds input extent {extent}"
                        )));
                    }
                    extent = extent - kernel + 1;
                }
                LayerSpec::MaxPool { size } => {
                    if flat.is_some() || size == 0 || size > extent {
                        return Err(fail(format!("pool {size} does not fit extent {extent}")));
                    }
                    extent /= size;
                }
                LayerSpec::Relu => {}
                LayerSpec::GlobalAvgPool => {
                    if flat.is_some() {
                        return Err(fail("already flat".into()));
                    }
                    flat = Some(0);
                }
                LayerSpec::Dense { units } => {
                    if flat.is_none() {
                        return Err(fail(
                            "dense layer needs a preceding global average pool".into(),
                        ));
                    }
                    if units == 0 {
                        return Err(fail("zero units".into()));
                    }
                    flat = Some(units);
                }
            }
        }
        match (self.layers.last(), flat) {
            (Some(LayerSpec::Dense { units }), _) if *units == self.num_classes => Ok(()),
            _ => Err(Error::Parameter(format!(
                "network must end in a dense layer of width {}",
                self.num_classes
            ))),
        }
    }
}

/// Gradients for every trainable tensor, in declaration order.
pub type Grads = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    layers: Vec<Layer>,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut channels = 1;
        let mut layers = Vec::with_capacity(config.layers.len());
        for spec in &config.layers {
            let layer = match (*spec, config.variant) {
                (LayerSpec::Conv { filters, kernel }, Variant::Raw1D) => {
                    Layer::Conv1d(Conv1d::new(channels, filters, kernel, &mut rng))
                }
                (LayerSpec::Conv { filters, kernel }, Variant::Gaf2D) => {
                    Layer::Conv2d(Conv2d::new(channels, filters, kernel, &mut rng))
                }
                (LayerSpec::MaxPool { size }, Variant::Raw1D) => {
                    Layer::MaxPool1d(MaxPool1d { size })
                }
                (LayerSpec::MaxPool { size }, Variant::Gaf2D) => {
                    Layer::MaxPool2d(MaxPool2d { size })
                }
                (LayerSpec::Relu, _) => Layer::Relu,
                (LayerSpec::GlobalAvgPool, _) => Layer::GlobalAvgPool,
                (LayerSpec::Dense { units }, _) => {
                    Layer::Dense(Dense::new(channels, units, &mut rng))
                }
            };
            if let LayerSpec::Conv { filters: c, .. } | LayerSpec::Dense { units: c } = *spec {
                channels = c;
            }
            layers.push(layer);
        }
        Ok(Model { config, layers })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn params(&self) -> Vec<&Vec<f64>> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn zero_grads(&self) -> Grads {
        self.params().iter().map(|p| vec![0.0; p.len()]).collect()
    }

    fn with_channel_axis(&self, batch: &Tensor) -> Result<Tensor> {
        let expected = self.config.input_shape();
        let s = batch.shape();
        if s.len() != expected.len() + 1 || s[1..] != expected[..] {
            return Err(Error::Shape {
                expected: format!("[batch, {}]", join_dims(&expected)),
                got: format!("{s:?}"),
            });
        }
        let mut shape = vec![s[0], 1];
        shape.extend_from_slice(&expected);
        batch.clone().reshape(shape)
    }

    /// Logits `[batch, 4]`.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor> {
        let mut x = self.with_channel_axis(batch)?;
        for layer in &self.layers {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    /// Mean softmax cross-entropy and its gradient for every parameter.
    pub fn loss_and_grad(&self, batch: &Tensor, labels: &[usize]) -> Result<(f64, Grads)> {
        let (loss, grads, _) = self.loss_grad_logits(batch, labels)?;
        Ok((loss, grads))
    }

    pub(crate) fn loss_grad_logits(
        &self,
        batch: &Tensor,
        labels: &[usize],
    ) -> Result<(f64, Grads, Tensor)> {
        if labels.len() != batch.batch() {
            return Err(Error::Shape {
                expected: format!("{} labels", batch.batch()),
                got: labels.len().to_string(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= self.config.num_classes) {
            return Err(Error::InvalidValue(format!("label {l} out of range")));
        }
        let mut acts = vec![self.with_channel_axis(batch)?];
        for layer in &self.layers {
            let next = layer.forward(acts.last().expect("non-empty"))?;
            acts.push(next);
        }
        let logits = acts.pop().expect("output");
        let (loss, mut grad) = softmax_cross_entropy(&logits, labels)?;

        let mut grads = self.zero_grads();
        let mut offset = grads.len();
        for (layer, x) in self.layers.iter().zip(&acts).rev() {
            let n = layer.params().len();
            offset -= n;
            grad = layer.backward(x, &grad, &mut grads[offset..offset + n]);
        }
        Ok((loss, grads, logits))
    }

    /// Argmax class per row.
    pub fn predict(&self, batch: &Tensor) -> Result<Vec<usize>> {
        let logits = self.forward(batch)?;
        Ok((0..logits.batch())
            .map(|i| argmax(logits.item(i)))
            .collect())
    }
}

fn join_dims(d: &[usize]) -> String {
    d.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Row-wise softmax, shifted by the row max.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Mean cross-entropy over the batch and its gradient with respect to the
/// logits.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    let b = logits.batch();
    let mut grad = Tensor::zeros(logits.shape().to_vec());
    let k = logits.shape()[1];
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let row = logits.item(i);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
        loss += lse - row[y];
        let g = &mut grad.data_mut()[i * k..(i + 1) * k];
        for (gv, z) in g.iter_mut().zip(row) {
            *gv = (z - lse).exp() / b as f64;
        }
        g[y] -= 1.0 / b as f64;
    }
    let loss = loss / b as f64;
    if !loss.is_finite() {
        return Err(Error::Divergence {
            batch: 0,
            partial: None,
        });
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_loss() {
        let logits = Tensor::zeros(vec![3, 4]);
        let (l, _) = softmax_cross_entropy(&logits, &[0, 1, 3]).unwrap();
        assert!((l - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_weights_give_uniform_softmax() {
        let mut m = Model::new(ModelConfig::raw1d(64, 1)).unwrap();
        for p in m.params_mut() {
            p.fill(0.0);
        }
        let x = Tensor::new(vec![2, 64], (0..128).map(|v| v as f64).collect()).unwrap();
        let logits = m.forward(&x).unwrap();
        assert!(logits.data().iter().all(|&v| v == 0.0));
        assert_eq!(softmax(logits.item(0)), vec![0.25; 4]);
    }

    #[test]
    fn shape_mismatch_reported() {
        let m = Model::new(ModelConfig::gaf2d(16, 1)).unwrap();
        let err = m.forward(&Tensor::zeros(vec![1, 16, 15])).unwrap_err();
        assert!(err.to_string().contains("[batch, 16, 16]"), "{err}");
    }

    #[test]
    fn invalid_configs() {
        assert!(ModelConfig::raw1d(8, 0).validate().is_err());
        let mut c = ModelConfig::gaf2d(32, 0);
        c.layers.pop();
        assert!(c.validate().is_err());
        c.layers.push(LayerSpec::Dense { units: 3 });
        assert!(c.validate().is_err());
    }
}
