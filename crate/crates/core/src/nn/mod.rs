//! A small CNN engine: 1D and 2D convolutions, max pooling, global average
//! pooling and dense layers, trained with softmax cross-entropy and Adam.
//!
//! Everything runs sequentially in `f64`, so a fixed seed reproduces a run
//! bit for bit.

mod adam;
pub mod gradcheck;
pub mod layers;
mod model;
mod serialize;
mod tensor;
mod train;

pub use adam::Adam;
pub use layers::Layer;
pub use model::{
    softmax, softmax_cross_entropy, Grads, LayerSpec, Model, ModelConfig, Variant, NUM_CLASSES,
};
pub use serialize::{Container, ContainerKind, FORMAT_VERSION, MAGIC};
pub use tensor::Tensor;
pub use train::{
    confusion_accuracy, evaluate, evaluate_indices, split_dataset, train, Dataset, EpochRecord,
    Evaluation, Split, SplitMode, StopReason, TrainConfig, TrainReport, Trained,
};
