//! Bifurcation detection and branch switching.
//!
//! Along a branch in `W_m`, the Jacobian restricted to every invariant
//! subspace `W ⊇ W_m` is monitored through the number of its eigenvalues with
//! negative real part (the signature list). A change in some count brackets a
//! crossing, which is refined by a secant iteration and then classified: the
//! kernel vector `x0` of the restricted Jacobian picks the daughter subspace,
//! the smallest candidate containing `x0`, and daughter branches are started
//! at `x* ± δ x0`.

mod classify;
mod explore;
mod refine;

pub use classify::{critical_directions, smallest_containing, CriticalDirection, SiteFinding};
pub use explore::{explore, Branch, BranchForest, BranchOrigin, ExploreSettings, Note, NoteKind, StartPoint};
pub use refine::{refine_crossing, RefineSettings, RefinedCrossing};

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::ContinuationError;
use crate::network::{NetworkError, NetworkSystem, QuotientSystem};
use crate::polydiag::{SubspaceKind, SubspaceLattice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BifurcationError {
    #[error("unknown subspace {0}")]
    UnknownSubspace(String),
    #[error("eigenvalue computation failed")]
    EigenFailure,
    #[error("tracked eigenvalue does not change sign across the bracket")]
    NoSignChange,
    #[error("crossing refinement did not converge")]
    NoConvergence,
    #[error("more than {0} branches queued; tolerances are probably too loose")]
    QueueOverflow(usize),
    #[error("f(s, 0) is not identically zero, so a starting solution must be supplied")]
    MissingStart,
    #[error("starting point: {0}")]
    BadStart(String),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// How a crossing was classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    Fold,
    Blis,
}

/// A bifurcation point on a mother branch with the daughter it spawns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub id: String,
    pub s_star: f64,
    pub x_star: Vec<f64>,
    pub mother: String,
    pub mother_branch: String,
    /// Unit kernel vector `x0` in `R^n`.
    pub critical_vector: Vec<f64>,
    pub daughter: String,
    pub crossing_kind: CrossingKind,
    /// The subset of `{+x0, -x0}` that was followed after symmetry reduction.
    pub spawn_dirs: Vec<Vec<f64>>,
    pub daughter_branches: Vec<String>,
    pub cond_b_checked: bool,
    pub suspected_degenerate: bool,
}

/// Restrictions of a network to every subspace of a lattice, where valid.
#[derive(Debug, Clone)]
pub struct Restrictions {
    systems: Vec<Option<QuotientSystem>>,
}

impl Restrictions {
    pub fn new(sys: &NetworkSystem, lattice: &SubspaceLattice) -> Self {
        let systems = lattice
            .subspaces()
            .iter()
            .map(|w| if sys.supports(w) { sys.restrict(w).ok() } else { None })
            .collect();
        Self { systems }
    }

    pub fn get(&self, idx: usize) -> Option<&QuotientSystem> {
        self.systems.get(idx).and_then(Option::as_ref)
    }
}

/// Every lattice subspace containing `mother`, sorted by dimension then by
/// lattice position. Anti-synchrony subspaces are dropped unless `odd`; the
/// mother itself is always kept.
pub fn daughter_candidates(lattice: &SubspaceLattice, mother: &str, odd: bool) -> Result<Vec<usize>, BifurcationError> {
    let m = lattice.index_of(mother).ok_or_else(|| BifurcationError::UnknownSubspace(mother.to_string()))?;
    Ok(candidates_of(lattice, m, odd))
}

pub(crate) fn candidates_of(lattice: &SubspaceLattice, m: usize, odd: bool) -> Vec<usize> {
    let mut out: Vec<usize> = (0..lattice.len())
        .filter(|&w| lattice.contains(w, m))
        .filter(|&w| w == m || odd || lattice.get(w).kind() != SubspaceKind::AntiSynchrony)
        .collect();
    out.sort_by_key(|&w| (lattice.get(w).dim(), w));
    out
}

// Symmetric matrix diagonally similar to `m`, if there is one: restricted
// Jacobians of systems with a symmetric coupling matrix have this form.
fn symmetrized(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let tiny = 1e-14 * scale;
    let mut d: Vec<Option<f64>> = vec![None; n];
    for root in 0..n {
        if d[root].is_some() {
            continue;
        }
        d[root] = Some(1.0);
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if i == j || (a.abs() <= tiny && b.abs() <= tiny) {
                    continue;
                }
                if a * b <= 0.0 {
                    return None;
                }
                // (D m D^-1)_ij = d_i a / d_j must equal (D m D^-1)_ji = d_j b / d_i.
                let dj = d[i].expect("visited") * (a / b).sqrt();
                match d[j] {
                    None => {
                        d[j] = Some(dj);
                        stack.push(j);
                    }
                    Some(v) if ((v - dj) / dj).abs() > 1e-10 => return None,
                    Some(_) => {}
                }
            }
        }
    }
    let d: Vec<f64> = d.into_iter().map(|v| v.expect("all visited")).collect();
    let mut sym = DMatrix::from_fn(n, n, |i, j| d[i] * m[(i, j)] / d[j]);
    let asym = (&sym - sym.transpose()).amax();
    if asym > 1e-12 * scale {
        return None;
    }
    sym = (&sym + sym.transpose()) * 0.5;
    Some(sym)
}

/// Eigenvalues of a small dense matrix.
///
/// Matrices that are diagonally similar to a symmetric one go through the
/// symmetric solver. Otherwise the real Schur form is used, retried on a few
/// shifted copies when the QR iteration stalls.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, BifurcationError> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(BifurcationError::EigenFailure);
    }
    if let Some(sym) = symmetrized(m) {
        let ev = sym.symmetric_eigenvalues();
        return Ok(ev.iter().map(|&v| Complex::new(v, 0.0)).collect());
    }
    let norm = m.amax().max(1.0);
    for shift in [0.0, 0.37 * norm + 1.0, -0.61 * norm - 1.0, 1.13 * norm + 0.5] {
        let shifted = m + DMatrix::identity(n, n) * shift;
        if let Some(schur) = nalgebra::linalg::Schur::try_new(shifted, f64::EPSILON, 10_000) {
            let ev: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().map(|c| c - shift).collect();
            if ev.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Ok(ev);
            }
        }
    }
    Err(BifurcationError::EigenFailure)
}

/// Real parts of the eigenvalues, ascending.
pub fn sorted_real_parts(m: &DMatrix<f64>) -> Result<Vec<f64>, BifurcationError> {
    let mut re: Vec<f64> = eigenvalues(m)?.iter().map(|c| c.re).collect();
    re.sort_by(f64::total_cmp);
    Ok(re)
}

/// Jacobian of the `W`-restricted system at a point `(s, x)` of `R x R^n`.
pub fn restricted_jacobian(q: &QuotientSystem, s: f64, x: &DVector<f64>) -> DMatrix<f64> {
    q.jac_x(s, &q.subspace().project_unchecked(x))
}

/// Signature list at `(s, x)`: negative-real-part counts for each candidate.
pub fn signature(restrictions: &Restrictions, candidates: &[usize], s: f64, x: &DVector<f64>) -> Result<Vec<usize>, BifurcationError> {
    candidates
        .iter()
        .map(|&w| {
            let q = restrictions.get(w).ok_or_else(|| BifurcationError::UnknownSubspace(format!("#{w}")))?;
            Ok(eigenvalues(&restricted_jacobian(q, s, x))?.iter().filter(|c| c.re < 0.0).count())
        })
        .collect()
}

/// Positions in the signature list whose counts differ, with `after - before`.
pub fn detect_crossings(before: &[usize], after: &[usize]) -> Vec<(usize, i64)> {
    before
        .iter()
        .zip(after)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, (&a, &b))| (i, b as i64 - a as i64))
        .collect()
}
