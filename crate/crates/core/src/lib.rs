//! Equilibrium bifurcation diagrams of coupled cell networks.
//!
//! The system is `x_i' = f(s, x_i) + h (M x)_i`. Branches of equilibria are
//! followed inside invariant polydiagonal subspaces of `M`, where the
//! restricted system is smaller, and daughter branches are started wherever a
//! restricted Jacobian on a larger subspace becomes singular.
//!
//! ```no_run
//! use netbif::io::{load_inputs, RunConfig};
//! use netbif::bifurcation::explore;
//!
//! let cfg = RunConfig::load("data/diamond.toml".as_ref())?;
//! let inputs = load_inputs(&cfg)?;
//! let forest = explore(&inputs.system, &inputs.lattice, &inputs.group, &cfg.explore_settings(), None)?;
//! println!("{} branches", forest.branches.len());
//! # Ok::<(), netbif::Error>(())
//! ```

pub mod bifurcation;
pub mod cli;
pub mod continuation;
mod error;
pub mod io;
pub mod network;
pub mod polydiag;
pub mod rational;
pub mod symmetry;

pub use error::{Error, Result};
