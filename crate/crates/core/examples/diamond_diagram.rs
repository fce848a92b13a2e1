//! Computes the full bifurcation diagram of the diamond network with
//! `f(s, x) = s x + x^3` and writes the JSON record, branch CSVs and an SVG
//! plot to a directory (default `out/diamond`).
//!
//! Run with `cargo run --release --example diamond_diagram [-- OUTDIR]`.

use std::fs;
use std::path::PathBuf;

use netbif::bifurcation::explore;
use netbif::io::{branch_csv, default_functional, load_inputs, render_svg, ForestRecord, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map_or_else(|| PathBuf::from("out/diamond"), PathBuf::from);
    let cfg = RunConfig::load(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/diamond.toml"))?;
    let inputs = load_inputs(&cfg)?;
    let settings = cfg.explore_settings();
    let forest = explore(&inputs.system, &inputs.lattice, &inputs.group, &settings, None)?;

    println!("{} branches, {} events", forest.branches.len(), forest.events.len());
    for e in &forest.events {
        println!("  {:>4}  s = {:>13.9}  {:>3} -> {:<3} on {}", e.id, e.s_star, e.mother, e.daughter, e.mother_branch);
    }
    for b in &forest.branches {
        let (lo, hi) = b.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.s), hi.max(p.s)));
        println!("  {:>4} in {:<3} s in [{lo:.3}, {hi:.3}], {}", b.id, b.subspace, b.termination.as_str());
    }

    let functional = default_functional(inputs.system.n());
    let record = ForestRecord::new(Some(&cfg), &inputs.system, &inputs.lattice, &inputs.group, &settings, &functional, &forest);
    fs::create_dir_all(out.join("branches"))?;
    fs::write(out.join("forest.json"), record.to_json())?;
    fs::write(out.join("diagram.svg"), render_svg(&record, &functional))?;
    for b in &record.branches {
        fs::write(out.join("branches").join(format!("{}.csv", b.id)), branch_csv(b, &functional))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
