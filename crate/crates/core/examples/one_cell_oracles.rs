//! Follows one-cell systems whose branches are known in closed form and
//! reports the largest deviation from the analytic curve.
//!
//! Run with `cargo run --example one_cell_oracles`.

use netbif::bifurcation::{explore, ExploreSettings, StartPoint};
use netbif::continuation::Window;
use netbif::network::{InternalDynamics, NetworkSystem};
use netbif::polydiag::{build_lattice, enumerate_invariant};
use netbif::rational::RatMatrix;
use netbif::symmetry::SymmetryGroup;

fn diagram(f: InternalDynamics, window: (f64, f64), start: Option<StartPoint>) -> netbif::Result<netbif::bifurcation::BranchForest> {
    let m = RatMatrix::from_integers(&[vec![0]]);
    let odd = f.is_odd();
    let sys = NetworkSystem::new(m.clone(), -1.0, f)?;
    let group = SymmetryGroup::from_matrix(&m, odd);
    let lattice = build_lattice(enumerate_invariant(&m, odd, 8)?, &group)?;
    let settings = ExploreSettings { window: Window { s_min: window.0, s_max: window.1 }, ..ExploreSettings::default() };
    Ok(explore(&sys, &lattice, &group, &settings, start.as_ref())?)
}

fn main() -> netbif::Result<()> {
    // Pitchfork: s x + x^3 = 0 gives s = -x^2 off the trivial branch.
    let forest = diagram(InternalDynamics::cubic_soft(), (-2.0, 2.0), None)?;
    let nontrivial = forest.branches.iter().filter(|b| b.points.iter().any(|p| p.x[0] != 0.0));
    let worst = nontrivial.flat_map(|b| &b.points).map(|p| (p.s + p.x[0] * p.x[0]).abs()).fold(0.0, f64::max);
    println!("pitchfork: {} events at s = {:?}, max |s + x^2| = {worst:.1e}", forest.events.len(), forest.events.iter().map(|e| e.s_star).collect::<Vec<_>>());

    // Transcritical: s x + a x^2 - x^3 has no sign symmetry, so both sides are followed.
    let forest = diagram(InternalDynamics::quad_cubic(0.5), (-1.0, 1.0), None)?;
    let e = &forest.events[0];
    println!("transcritical: event at s = {:.2e} spawning {} branches", e.s_star, e.daughter_branches.len());

    // Fold: f = s - x^2 has no trivial branch; x = +-sqrt(s) meet at s = 0.
    let f = InternalDynamics::custom([[0.0, 0.0, -1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0; 6]])?;
    let forest = diagram(f, (-1.0, 4.0), Some(StartPoint { s: 1.0, x: vec![1.0] }))?;
    let points = || forest.branches.iter().flat_map(|b| &b.points);
    let worst = points().map(|p| (p.s - p.x[0] * p.x[0]).abs()).fold(0.0, f64::max);
    let min_x = points().map(|p| p.x[0]).fold(f64::INFINITY, f64::min);
    println!("fold: {} events, passes through the fold to x = {min_x:.3}, max |s - x^2| = {worst:.1e}", forest.events.len());
    Ok(())
}
