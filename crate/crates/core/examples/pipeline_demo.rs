//! Run every batch command on a small configuration and list the outputs.
//!
//! Usage: `pipeline_demo [out_dir]` (default `demo_out`).

use bvpkit::pipeline::{cmd_demo, Context, RunConfig};

const CONFIG: &str = r#"
seed = 7

[train]
epochs = 3

[encode]
paa_size = 32

[sweep]
raw = [[512, 128], [256, 128]]
gaf = [[512, 128]]
"#;

fn main() -> bvpkit::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "demo_out".into());
    let config = RunConfig::from_toml_str(CONFIG)?;
    config.validate()?;
    let ctx = Context::new(config, &out, true);
    let outcome = cmd_demo(&ctx)?;
    for m in &outcome.messages {
        println!("{m}");
    }
    println!("{} files written to {out}", outcome.files.len());
    for e in &outcome.row_errors {
        println!("row error in {} ({}): {}", e.command, e.item, e.message);
    }
    Ok(())
}
