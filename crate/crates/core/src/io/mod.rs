//! Input files, configuration and run outputs.

mod config;
mod csv;
mod formats;
mod record;
mod svg;

pub use config::{DynamicsConfig, RunConfig, Tolerances};
pub use csv::{branch_csv, default_functional};
pub use formats::{
    format_automorphisms, format_lattice, format_matrix, format_subspace, format_subspaces, parse_automorphisms,
    parse_lattice, parse_matrix, parse_subspaces, AutomorphismFile,
};
pub use record::{verify_record, BranchRecord, ForestRecord, PointRecord, SubspaceRecord, SystemRecord, VerifyReport};
pub use svg::render_svg;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::network::NetworkSystem;
use crate::polydiag::{build_lattice, enumerate_invariant, is_invariant, Subspace, SubspaceKind, SubspaceLattice};
use crate::symmetry::{commutes, SymmetryGroup};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{file}:{line}:{column}: {message}")]
    Parse { file: String, line: usize, column: usize, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("record: {0}")]
    Record(String),
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

/// Everything `explore` needs, plus notices about what was computed rather than read.
#[derive(Debug)]
pub struct Inputs {
    pub system: NetworkSystem,
    pub lattice: SubspaceLattice,
    pub group: SymmetryGroup,
    pub notices: Vec<String>,
}

/// Reads the matrix and the optional subspace, lattice and automorphism files
/// named by `config`, computing whatever is missing and cross-checking
/// whatever is supplied.
pub fn load_inputs(config: &RunConfig) -> Result<Inputs, crate::Error> {
    let mut notices = Vec::new();
    let matrix_path = config.resolve(&config.matrix);
    let m = parse_matrix(&read_file(&matrix_path)?, &matrix_path.display().to_string())?;
    let n = m.nrows();
    let dynamics = config.dynamics.build()?;
    let odd = dynamics.is_odd();
    let system = NetworkSystem::new(m.clone(), config.h, dynamics)?;

    let subspaces = match &config.subspaces {
        Some(p) => {
            let path = config.resolve(p);
            let mut subs = parse_subspaces(&read_file(&path)?, &path.display().to_string(), n)?;
            for s in &subs {
                if let Some(b) = s.basis() {
                    if !is_invariant(&m, b)? {
                        return Err(IoError::Validation(format!("subspace {} is not invariant under the matrix", s.id)).into());
                    }
                }
            }
            if !subs.iter().any(Subspace::is_trivial) {
                subs.insert(0, Subspace::trivial("W_trivial", n));
                notices.push("subspace file has no trivial subspace; added W_trivial".into());
            }
            if !subs.iter().any(|s| s.kind() == SubspaceKind::Full) {
                subs.push(Subspace::full("W_full", n));
                notices.push("subspace file has no full space; added W_full".into());
            }
            subs
        }
        None => {
            notices.push("no subspace file; enumerated invariant polydiagonal subspaces".into());
            enumerate_invariant(&m, true, config.n_max)?
        }
    };

    let group = match &config.automorphisms {
        Some(p) => {
            let path = config.resolve(p);
            let file = parse_automorphisms(&read_file(&path)?, &path.display().to_string(), n)?;
            for perm in &file.perms {
                if !commutes(&m, perm) {
                    let one_based: Vec<usize> = perm.iter().map(|v| v + 1).collect();
                    return Err(IoError::Validation(format!("permutation {one_based:?} does not commute with the matrix")).into());
                }
            }
            SymmetryGroup::from_generators(&m, &file.perms, file.sign_flip.unwrap_or(odd))?
        }
        None => {
            if n > config.n_max {
                return Err(crate::polydiag::PolydiagError::TooLarge { n, max: config.n_max }.into());
            }
            notices.push("no automorphism file; computed the automorphism group".into());
            SymmetryGroup::from_matrix(&m, odd)
        }
    };

    let mut lattice = build_lattice(subspaces, &group)?;
    match &config.lattice {
        Some(p) => {
            let path = config.resolve(p);
            let pairs = parse_lattice(&read_file(&path)?, &path.display().to_string())?;
            let mut covers = Vec::with_capacity(pairs.len());
            for (c, q) in pairs {
                let ci = lattice.index_of(&c).ok_or_else(|| IoError::Validation(format!("lattice names unknown subspace {c}")))?;
                let qi = lattice.index_of(&q).ok_or_else(|| IoError::Validation(format!("lattice names unknown subspace {q}")))?;
                covers.push((ci, qi));
            }
            lattice = lattice.with_covers(covers).map_err(IoError::Validation)?;
        }
        None => notices.push("no lattice file; computed the containment order".into()),
    }
    Ok(Inputs { system, lattice, group, notices })
}
