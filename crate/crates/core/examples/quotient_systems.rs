//! Prints the exact pseudoinverse and quotient matrix `B+ M B` of every
//! invariant subspace of the diamond, then checks the restriction identity
//! `B+ F(s, B y) = F_B(s, y)` at a sample point.
//!
//! Run with `cargo run --example quotient_systems`.

use nalgebra::DVector;
use netbif::network::{quotient_matrix, InternalDynamics, NetworkSystem};
use netbif::polydiag::{enumerate_invariant, pseudoinverse};
use netbif::rational::{format_rational, RatMatrix};

fn show(m: &RatMatrix) -> String {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| format!("{:>5}", format_rational(m.get(i, j)))).collect::<String>())
        .collect::<Vec<_>>()
        .join("\n    ")
}

fn main() -> netbif::Result<()> {
    let m = RatMatrix::from_integers(&[vec![2, -1, 0, -1], vec![-1, 3, -1, -1], vec![0, -1, 2, -1], vec![-1, -1, -1, 3]]);
    let sys = NetworkSystem::new(m.clone(), -1.0, InternalDynamics::cubic_soft())?;

    for w in enumerate_invariant(&m, true, 8)? {
        let Some(b) = w.basis() else { continue };
        println!("{} ({}, dim {})", w.id, w.kind(), w.dim());
        println!("  B+ =\n    {}", show(&pseudoinverse(b)));
        println!("  Q  =\n    {}", show(&quotient_matrix(&m, b)?));

        let q = sys.restrict(&w)?;
        let y = DVector::from_fn(w.dim(), |i, _| 0.3 + 0.2 * i as f64);
        let full = b.pseudoinverse().to_f64() * sys.eval(1.5, &w.lift(&y))?;
        let reduced = q.eval(1.5, &y)?;
        println!("  restriction error at s = 1.5: {:.1e}\n", (full - reduced).norm());
    }
    Ok(())
}
