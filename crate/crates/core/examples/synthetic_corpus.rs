//! Generate the seeded four-condition corpus, write one session in the
//! wrist-band text layout and read it back.

use bvpkit::ingest::{generate_synthetic_corpus, parse_e4_bvp, write_e4_bvp, SyntheticConfig};

fn main() -> bvpkit::Result<()> {
    let cfg = SyntheticConfig::default();
    let corpus = generate_synthetic_corpus(&cfg)?;
    for s in &corpus {
        let x = s.samples();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        println!(
            "condition {}: {} samples at {} Hz ({:.0} s), mean {:.3}",
            s.condition().expect("labeled"),
            s.len(),
            s.sample_rate_hz(),
            s.duration_s(),
            mean
        );
    }

    let text = write_e4_bvp(&corpus[0]);
    let back = parse_e4_bvp(&text)?;
    let worst = corpus[0]
        .samples()
        .iter()
        .zip(back.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "text round trip: {} lines, max abs diff {worst:.2e}",
        text.lines().count()
    );
    Ok(())
}
