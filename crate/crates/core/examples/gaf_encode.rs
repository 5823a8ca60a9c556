//! Encode a window as GASF and GADF images and print a corner of each.

use bvpkit::gaf::{encode_window, EncodeOptions, GafKind};
use bvpkit::ingest::{generate_synthetic_corpus, SyntheticConfig};
use bvpkit::windowing::{segment, WindowSpec};

fn main() -> bvpkit::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticConfig::default())?;
    let set = segment(&corpus, WindowSpec::new(512, 128)?)?;

    for kind in [GafKind::Gasf, GafKind::Gadf] {
        let opts = EncodeOptions {
            kind,
            paa_size: Some(64),
            ..EncodeOptions::default()
        };
        let img = encode_window(set.row(0), &opts)?;
        println!("{kind} {}x{}", img.size, img.size);
        for a in 0..4 {
            let row: Vec<String> = (0..4).map(|b| format!("{:+.3}", img.get(a, b))).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
