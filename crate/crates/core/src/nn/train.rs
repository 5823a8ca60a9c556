use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::model::{argmax, Model, ModelConfig, NUM_CLASSES};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::gaf::GafSet;
use crate::windowing::WindowSet;

/// Labeled samples with a common shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    sample_shape: Vec<usize>,
    data: Vec<f64>,
    labels: Vec<usize>,
    groups: Vec<usize>,
}

impl Dataset {
    /// `groups` identifies the participant each sample came from.
    pub fn new(
        sample_shape: Vec<usize>,
        data: Vec<f64>,
        labels: Vec<usize>,
        groups: Vec<usize>,
    ) -> Result<Self> {
        let per: usize = sample_shape.iter().product();
        if per == 0 || data.len() != per * labels.len() || groups.len() != labels.len() {
            return Err(Error::Shape {
                expected: format!("{} samples of shape {sample_shape:?}", labels.len()),
                got: format!("{} values, {} groups", data.len(), groups.len()),
            });
        }
        if let Some(l) = labels.iter().find(|&&l| l >= NUM_CLASSES) {
            return Err(Error::InvalidValue(format!("label {l} out of range")));
        }
        Ok(Dataset {
            sample_shape,
            data,
            labels,
            groups,
        })
    }

    /// Raw windows as `[p]` samples. With `center`, each window has its mean
    /// subtracted. Groups are the source series indices.
    pub fn from_windows(set: &WindowSet, center: bool) -> Result<Self> {
        let p = set.spec().window_len;
        let mut data = Vec::with_capacity(set.data().len());
        for row in set.rows() {
            let m = if center {
                row.iter().sum::<f64>() / p as f64
            } else {
                0.0
            };
            data.extend(row.iter().map(|v| v - m));
        }
        let labels = set.labels().iter().map(|c| c.index()).collect();
        Dataset::new(vec![p], data, labels, set.sources().to_vec())
    }

    pub fn from_gaf(set: &GafSet) -> Result<Self> {
        let labels = set.labels.iter().map(|c| c.index()).collect();
        Dataset::new(
            vec![set.size, set.size],
            set.data.clone(),
            labels,
            set.sources.clone(),
        )
    }

    pub fn with_groups(mut self, groups: Vec<usize>) -> Result<Self> {
        if groups.len() != self.labels.len() {
            return Err(Error::Shape {
                expected: format!("{} groups", self.labels.len()),
                got: groups.len().to_string(),
            });
        }
        self.groups = groups;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample_shape(&self) -> &[usize] {
        &self.sample_shape
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let per = self.data.len() / self.labels.len();
        &self.data[i * per..(i + 1) * per]
    }

    /// Stack the given samples into a batch tensor.
    pub fn batch(&self, idx: &[usize]) -> Tensor {
        let mut data = Vec::with_capacity(idx.len() * self.data.len() / self.len().max(1));
        for &i in idx {
            data.extend_from_slice(self.sample(i));
        }
        let mut shape = vec![idx.len()];
        shape.extend_from_slice(&self.sample_shape);
        Tensor::new(shape, data).expect("consistent batch")
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            sample_shape: self.sample_shape.clone(),
            data: self.batch(idx).into_data(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            groups: idx.iter().map(|&i| self.groups[i]).collect(),
        }
    }

    /// Replace labels, keeping samples.
    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::Shape {
                expected: format!("{} labels", self.labels.len()),
                got: labels.len().to_string(),
            });
        }
        if let Some(l) = labels.iter().find(|&&l| l >= NUM_CLASSES) {
            return Err(Error::InvalidValue(format!("label {l} out of range")));
        }
        self.labels = labels;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Stratify individual samples by class.
    #[default]
    ByWindow,
    /// Keep every sample of a participant in the same partition.
    ByParticipant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Train, validation and test fractions.
    pub split: [f64; 3],
    pub split_mode: SplitMode,
    pub seed: u64,
    /// Stop after this many epochs without a validation improvement.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            epochs: 30,
            split: [0.70, 0.15, 0.15],
            split_mode: SplitMode::ByWindow,
            seed: 0,
            patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Parameter(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.split.iter().any(|f| !(*f > 0.0))
            || (self.split.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Parameter(format!(
                "split fractions must be positive and sum to 1, got {:?}",
                self.split
            )));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Parameter(
                "batch_size and epochs must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn partition_sizes(n: usize, fractions: &[f64; 3]) -> (usize, usize) {
    let n_train = (n as f64 * fractions[0]).round() as usize;
    let n_val = (n as f64 * fractions[1]).round() as usize;
    let n_train = n_train.min(n);
    (n_train, n_val.min(n - n_train))
}

/// Seeded train/validation/test split.
pub fn split_dataset(data: &Dataset, cfg: &TrainConfig) -> Result<Split> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut split = Split {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    match cfg.split_mode {
        SplitMode::ByWindow => {
            for class in 0..NUM_CLASSES {
                let mut idx: Vec<usize> = (0..data.len())
                    .filter(|&i| data.labels[i] == class)
                    .collect();
                idx.shuffle(&mut rng);
                let (a, b) = partition_sizes(idx.len(), &cfg.split);
                split.train.extend_from_slice(&idx[..a]);
                split.val.extend_from_slice(&idx[a..a + b]);
                split.test.extend_from_slice(&idx[a + b..]);
            }
        }
        SplitMode::ByParticipant => {
            let mut groups: Vec<usize> = data
                .groups
                .iter()
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if groups.len() < 3 {
                return Err(Error::Split(format!(
                    "participant split needs at least 3 participants, found {}",
                    groups.len()
                )));
            }
            groups.shuffle(&mut rng);
            let (a, b) = partition_sizes(groups.len(), &cfg.split);
            let a = a.clamp(1, groups.len() - 2);
            let b = b.clamp(1, groups.len() - a - 1);
            for i in 0..data.len() {
                let pos = groups
                    .iter()
                    .position(|&g| g == data.groups[i])
                    .expect("known group");
                let part = if pos < a {
                    &mut split.train
                } else if pos < a + b {
                    &mut split.val
                } else {
                    &mut split.test
                };
                part.push(i);
            }
        }
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();

    for class in 0..NUM_CLASSES {
        if !split.train.iter().any(|&i| data.labels[i] == class) {
            return Err(Error::Split(format!(
                "class {class} missing from the training split"
            )));
        }
    }
    if split.val.is_empty() || split.test.is_empty() {
        return Err(Error::Split(format!(
            "validation or test split is empty ({} samples total)",
            data.len()
        )));
    }
    Ok(split)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Rows are true classes, columns predictions.
    pub confusion: [[usize; NUM_CLASSES]; NUM_CLASSES],
}

/// Accuracy and confusion matrix over every sample.
pub fn evaluate(model: &Model, data: &Dataset) -> Result<Evaluation> {
    let idx: Vec<usize> = (0..data.len()).collect();
    evaluate_indices(model, data, &idx)
}

pub fn evaluate_indices(model: &Model, data: &Dataset, idx: &[usize]) -> Result<Evaluation> {
    if idx.is_empty() {
        return Err(Error::Parameter("cannot evaluate an empty dataset".into()));
    }
    let mut confusion = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for chunk in idx.chunks(64) {
        let pred = model.predict(&data.batch(chunk))?;
        for (&i, p) in chunk.iter().zip(pred) {
            confusion[data.labels[i]][p] += 1;
        }
    }
    Ok(Evaluation {
        accuracy: confusion_accuracy(&confusion),
        confusion,
    })
}

pub fn confusion_accuracy(c: &[[usize; NUM_CLASSES]; NUM_CLASSES]) -> f64 {
    let total: usize = c.iter().flatten().sum();
    let hits: usize = (0..NUM_CLASSES).map(|i| c[i][i]).sum();
    hits as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Completed,
    /// No validation improvement for `patience` epochs.
    EarlyStopped {
        epoch: usize,
        patience: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub model_config: ModelConfig,
    pub train_config: TrainConfig,
    pub split_sizes: [usize; 3],
    pub epochs: Vec<EpochRecord>,
    pub test: Option<Evaluation>,
    pub stop_reason: StopReason,
    pub wall_clock_s: f64,
}

impl TrainReport {
    pub fn test_accuracy(&self) -> Option<f64> {
        self.test.as_ref().map(|e| e.accuracy)
    }
}

/// Equality ignores `wall_clock_s`.
impl PartialEq for TrainReport {
    fn eq(&self, other: &Self) -> bool {
        self.model_config == other.model_config
            && self.train_config == other.train_config
            && self.split_sizes == other.split_sizes
            && self.epochs == other.epochs
            && self.test == other.test
            && self.stop_reason == other.stop_reason
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub report: TrainReport,
}

/// Train a fresh model on the training split and report per-epoch curves
/// and final test accuracy.
pub fn train(model_cfg: &ModelConfig, train_cfg: &TrainConfig, data: &Dataset) -> Result<Trained> {
    train_cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Parameter("empty dataset".into()));
    }
    let mut model = Model::new(model_cfg.clone())?;
    if data.sample_shape() != model_cfg.input_shape() {
        return Err(Error::Shape {
            expected: format!("samples of shape {:?}", model_cfg.input_shape()),
            got: format!("{:?}", data.sample_shape()),
        });
    }
    let split = split_dataset(data, train_cfg)?;
    let start = Instant::now();
    let sizes: Vec<usize> = model.params().iter().map(|p| p.len()).collect();
    let mut opt = Adam::new(train_cfg.learning_rate, &sizes).with_betas(
        train_cfg.beta1,
        train_cfg.beta2,
        train_cfg.epsilon,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(train_cfg.seed);
    rng.set_stream(1);

    let mut report = TrainReport {
        model_config: model_cfg.clone(),
        train_config: train_cfg.clone(),
        split_sizes: [split.train.len(), split.val.len(), split.test.len()],
        epochs: Vec::with_capacity(train_cfg.epochs),
        test: None,
        stop_reason: StopReason::Completed,
        wall_clock_s: 0.0,
    };
    let mut order = split.train.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut since_best = 0;
    let mut batch_index = 0;

    for epoch in 0..train_cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(train_cfg.batch_size) {
            let labels: Vec<usize> = chunk.iter().map(|&i| data.labels[i]).collect();
            let outcome = model.loss_grad_logits(&data.batch(chunk), &labels);
            let (loss, grads, logits) = match outcome {
                Ok(v) => v,
                Err(Error::Divergence { .. }) => {
                    report.wall_clock_s = start.elapsed().as_secs_f64();
                    return Err(Error::Divergence {
                        batch: batch_index,
                        partial: Some(Box::new(report)),
                    });
                }
                Err(e) => return Err(e),
            };
            loss_sum += loss * chunk.len() as f64;
            correct += (0..chunk.len())
                .filter(|&r| argmax(logits.item(r)) == labels[r])
                .count();
            opt.step(model.params_mut(), &grads);
            batch_index += 1;
        }
        let val = evaluate_indices(&model, data, &split.val)?;
        report.epochs.push(EpochRecord {
            epoch: epoch + 1,
            train_loss: loss_sum / order.len() as f64,
            train_accuracy: correct as f64 / order.len() as f64,
            val_accuracy: val.accuracy,
        });
        if let Some(patience) = train_cfg.patience {
            if val.accuracy > best_val {
                best_val = val.accuracy;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    report.stop_reason = StopReason::EarlyStopped {
                        epoch: epoch + 1,
                        patience,
                    };
                    break;
                }
            }
        }
    }
    report.test = Some(evaluate_indices(&model, data, &split.test)?);
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(Trained { model, report })
}
