//! Verifies every circuit of the shipped corpus and prints one line per circuit.
//!
//! cargo run --release --example corpus_verify

use std::path::Path;

use sumpaths::experiments::corpus::{regeneration_mismatches, verify_manifest, MANIFEST};
use sumpaths::experiments::Options;

fn main() -> sumpaths::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let stale = regeneration_mismatches(&dir)?;
    println!(
        "corpus files matching the generator: {}",
        if stale.is_empty() {
            "all".into()
        } else {
            format!("not {stale:?}")
        }
    );
    let report = verify_manifest(&dir.join(MANIFEST), &Options::default())?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    println!("overall: {}", if report.pass() { "PASS" } else { "FAIL" });
    if !report.pass() {
        std::process::exit(1);
    }
    Ok(())
}
