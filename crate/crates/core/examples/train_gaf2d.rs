//! Train the 2D CNN on GADF images of the windows.
//!
//! Pass a number of epochs as the first argument (default 20).

use bvpkit::gaf::{encode_set, EncodeOptions};
use bvpkit::ingest::{generate_synthetic_corpus, SyntheticConfig};
use bvpkit::nn::{train, Dataset, ModelConfig, TrainConfig};
use bvpkit::windowing::{segment, WindowSpec};

fn main() -> bvpkit::Result<()> {
    let epochs = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(20);
    let corpus = generate_synthetic_corpus(&SyntheticConfig::default())?;
    let set = segment(&corpus, WindowSpec::new(512, 128)?)?;
    let opts = EncodeOptions {
        paa_size: Some(32),
        ..EncodeOptions::default()
    };
    let images = encode_set(&set, &opts)?;
    let data = Dataset::from_gaf(&images)?;

    let cfg = TrainConfig {
        epochs,
        seed: 7,
        ..TrainConfig::default()
    };
    let trained = train(&ModelConfig::gaf2d(images.size, 7), &cfg, &data)?;
    let last = trained.report.epochs.last().expect("at least one epoch");
    println!(
        "{} images of {}x{}; after {} epochs train {:.3}, val {:.3}, test {:.3}",
        images.len(),
        images.size,
        images.size,
        last.epoch,
        last.train_accuracy,
        last.val_accuracy,
        trained.report.test_accuracy().unwrap_or(f64::NAN)
    );

    let bytes = trained.model.to_bytes();
    println!("serialized weights: {} bytes", bytes.len());
    Ok(())
}
