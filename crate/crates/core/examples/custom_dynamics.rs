//! Explores a three-cell path network with quintic internal dynamics, then
//! the same network with a user-defined polynomial.
//!
//! Run with `cargo run --example custom_dynamics`.

use netbif::bifurcation::{explore, BranchForest, ExploreSettings};
use netbif::continuation::Window;
use netbif::network::{InternalDynamics, NetworkSystem};
use netbif::polydiag::{build_lattice, enumerate_invariant};
use netbif::rational::RatMatrix;
use netbif::symmetry::SymmetryGroup;

fn run(f: InternalDynamics) -> netbif::Result<BranchForest> {
    let m = RatMatrix::from_integers(&[vec![1, -1, 0], vec![-1, 2, -1], vec![0, -1, 1]]);
    let odd = f.is_odd();
    let sys = NetworkSystem::new(m.clone(), -1.0, f)?;
    let group = SymmetryGroup::from_matrix(&m, odd);
    let lattice = build_lattice(enumerate_invariant(&m, odd, 8)?, &group)?;
    println!("{} invariant subspaces, group of order {}", lattice.len(), group.order());
    let settings = ExploreSettings { window: Window { s_min: -1.0, s_max: 4.0 }, ..ExploreSettings::default() };
    Ok(explore(&sys, &lattice, &group, &settings, None)?)
}

fn report(forest: &BranchForest) {
    for e in &forest.events {
        println!("  {} at s = {:.6}: {} -> {}", e.id, e.s_star, e.mother, e.daughter);
    }
    for n in &forest.notes {
        println!("  note {:?} on {} at s = {:.4}", n.kind, n.branch, n.s);
    }
}

fn main() -> netbif::Result<()> {
    println!("quintic, s x + x^3 - x^5 / 2:");
    report(&run(InternalDynamics::quintic(0.5))?);

    // Row k holds the coefficients of s^k x^j, j = 0..=5: f = s x - 0.2 x^2 - x^3.
    let f = InternalDynamics::custom([[0.0, 0.0, -0.2, -1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0, 0.0], [0.0; 6]])?;
    println!("custom, s x - 0.2 x^2 - x^3:");
    report(&run(f)?);
    Ok(())
}
