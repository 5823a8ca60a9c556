//! Cut the synthetic corpus into overlapping windows for a few specs.

use bvpkit::ingest::{generate_synthetic_corpus, SyntheticConfig};
use bvpkit::windowing::{rescale, segment, RescaleMode, WindowSpec};

fn main() -> bvpkit::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticConfig::default())?;
    println!("{:>5} {:>5} {:>8} {:>8}", "p", "j", "j/p", "windows");
    for (p, j) in [(512, 128), (512, 200), (256, 128), (200, 50)] {
        let spec = WindowSpec::new(p, j)?;
        let set = segment(&corpus, spec)?;
        println!(
            "{p:>5} {j:>5} {:>8.6} {:>8}",
            spec.effective_length(),
            set.len()
        );
    }

    let set = segment(&corpus, WindowSpec::new(512, 128)?)?;
    let w = rescale(set.row(0), RescaleMode::NegOneOne)?;
    let (lo, hi) = w
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    println!(
        "first window rescaled to [{lo}, {hi}], label {}",
        set.labels()[0]
    );
    Ok(())
}
