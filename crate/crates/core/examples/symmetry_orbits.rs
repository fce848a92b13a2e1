//! Shows the automorphism group of the diamond acting on its invariant
//! subspaces and on a point of a branch.
//!
//! Run with `cargo run --example symmetry_orbits`.

use nalgebra::DVector;
use netbif::polydiag::{build_lattice, enumerate_invariant};
use netbif::rational::RatMatrix;
use netbif::symmetry::{act, automorphisms, SymmetryGroup};

fn main() -> netbif::Result<()> {
    let m = RatMatrix::from_integers(&[vec![2, -1, 0, -1], vec![-1, 3, -1, -1], vec![0, -1, 2, -1], vec![-1, -1, -1, 3]]);
    for p in automorphisms(&m) {
        let one_based: Vec<usize> = p.iter().map(|v| v + 1).collect();
        println!("automorphism {one_based:?}");
    }
    let group = SymmetryGroup::from_matrix(&m, true);
    println!("with the sign flip -I the group has order {}", group.order());

    let lattice = build_lattice(enumerate_invariant(&m, true, 8)?, &group)?;
    for w in lattice.subspaces() {
        let images: Vec<String> = group
            .elements()
            .map(|(p, sign)| lattice.find_space(&group.act_on_subspace(p, sign, w)).map_or("?".into(), |k| lattice.get(k).id.clone()))
            .collect();
        println!("  {:>3} -> {}", w.id, images.join(" "));
    }

    let x = DVector::from_vec(vec![1.0, 2.0, 1.0, 1.0]);
    println!("\nstabilizer of {:?}:", x.as_slice());
    for (p, sign) in group.stabilizer(&x, 1e-12) {
        println!("  {:?} sign {sign} maps it to {:?}", p, act(p, sign, &x).as_slice());
    }
    Ok(())
}
