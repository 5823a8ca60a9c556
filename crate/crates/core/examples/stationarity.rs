//! ADF and KPSS on canonical signals and on each synthetic session.

use bvpkit::ingest::{generate_synthetic_corpus, SyntheticConfig};
use bvpkit::signals::{random_walk, trend_plus_noise, white_noise};
use bvpkit::stationarity::stationarity_report;

fn show(name: &str, x: &[f64]) -> bvpkit::Result<()> {
    let r = stationarity_report(x, 0.05)?;
    println!(
        "{name:<14} ADF {:>8.3} (p {:.3})  KPSS {:>7.3} (p {:.3})  -> {}",
        r.adf.statistic, r.adf.p_value, r.kpss.statistic, r.kpss.p_value, r.classification
    );
    Ok(())
}

fn main() -> bvpkit::Result<()> {
    show("white noise", &white_noise(1000, 1))?;
    show("random walk", &random_walk(1000, 2))?;
    show("trend + noise", &trend_plus_noise(1000, 0.05, 3))?;

    for s in generate_synthetic_corpus(&SyntheticConfig::default())? {
        show(
            &format!("session {}", s.condition().expect("labeled")),
            s.samples(),
        )?;
    }
    Ok(())
}
