//! Saves a forest record as JSON, reads it back and re-checks every stored
//! point and event against the stored system.
//!
//! Run with `cargo run --example verify_forest`.

use std::path::PathBuf;

use netbif::bifurcation::explore;
use netbif::io::{default_functional, load_inputs, verify_record, ForestRecord, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::load(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/transcritical.toml"))?;
    let inputs = load_inputs(&cfg)?;
    let settings = cfg.explore_settings();
    let forest = explore(&inputs.system, &inputs.lattice, &inputs.group, &settings, cfg.start().as_ref())?;
    let functional = default_functional(inputs.system.n());
    let json = ForestRecord::new(Some(&cfg), &inputs.system, &inputs.lattice, &inputs.group, &settings, &functional, &forest).to_json();
    println!("record is {} bytes", json.len());

    let record = ForestRecord::from_json(&json)?;
    let report = verify_record(&record)?;
    println!(
        "{} points and {} events checked, max residual {:.2e}, {} violations",
        report.points_checked,
        report.events_checked,
        report.max_residual,
        report.violations.len()
    );

    let mut tampered = record.clone();
    tampered.branches[0].points[0].x[0] += 0.1;
    for v in verify_record(&tampered)?.violations {
        println!("after tampering: {v}");
    }
    Ok(())
}
