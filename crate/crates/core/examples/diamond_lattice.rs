//! Enumerates the invariant polydiagonal subspaces of the diamond network and
//! prints the containment lattice with its orbits.
//!
//! Run with `cargo run --example diamond_lattice`.

use netbif::io::{format_subspace, parse_matrix, read_file};
use netbif::polydiag::{build_lattice, enumerate_invariant};
use netbif::symmetry::SymmetryGroup;

fn main() -> netbif::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/diamond.mat");
    let m = parse_matrix(&read_file(&path)?, "diamond.mat")?;

    let subspaces = enumerate_invariant(&m, true, 8)?;
    let group = SymmetryGroup::from_matrix(&m, true);
    let lattice = build_lattice(subspaces, &group)?;

    println!("{} invariant subspaces:", lattice.len());
    for w in lattice.subspaces() {
        println!("  {}", format_subspace(w));
    }

    println!("\ncovers (child < parent):");
    for &(c, p) in lattice.covers() {
        println!("  {} < {}", lattice.get(c).id, lattice.get(p).id);
    }

    println!("\n{} orbits under the automorphism group:", lattice.orbits().len());
    for orbit in lattice.orbits() {
        let ids: Vec<&str> = orbit.iter().map(|&k| lattice.get(k).id.as_str()).collect();
        println!("  {{{}}}", ids.join(", "));
    }
    Ok(())
}
