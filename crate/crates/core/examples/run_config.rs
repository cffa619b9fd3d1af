//! Drive a full run from a JSON configuration, as the `qsieve` binary does,
//! and print the artifacts instead of writing them.
//!
//! Usage: `cargo run --example run_config -- examples/configs/pointer_classify.json`

use qsieve::{cli, config};

fn main() -> qsieve::error::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/pointer_classify.json").into());
    let cfg = config::parse_config(&std::fs::read_to_string(&path)?)?;
    for artifact in cli::execute(&cfg)? {
        println!("==> {}", artifact.name);
        print!("{}", artifact.contents);
    }
    Ok(())
}
