//! Train the 1D CNN on raw windows and report test accuracy.
//!
//! Pass a number of epochs as the first argument (default 30).

use bvpkit::ingest::{generate_synthetic_corpus, SyntheticConfig};
use bvpkit::nn::{train, Dataset, ModelConfig, TrainConfig};
use bvpkit::windowing::{segment, WindowSpec};

fn main() -> bvpkit::Result<()> {
    let epochs = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(30);
    let corpus = generate_synthetic_corpus(&SyntheticConfig::default())?;
    let set = segment(&corpus, WindowSpec::new(256, 128)?)?;
    let data = Dataset::from_windows(&set, true)?;

    let cfg = TrainConfig {
        epochs,
        seed: 7,
        ..TrainConfig::default()
    };
    let trained = train(&ModelConfig::raw1d(256, 7), &cfg, &data)?;
    for e in &trained.report.epochs {
        println!(
            "epoch {:>3}  loss {:.4}  train {:.3}  val {:.3}",
            e.epoch, e.train_loss, e.train_accuracy, e.val_accuracy
        );
    }
    let test = trained.report.test.as_ref().expect("test split");
    println!("test accuracy {:.3}", test.accuracy);
    for row in &test.confusion {
        println!("  {row:?}");
    }
    Ok(())
}
