use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{eigenvalues, restricted_jacobian, Restrictions};
use crate::polydiag::SubspaceLattice;

/// A kernel vector found at a crossing together with the subspaces it selects.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalDirection {
    /// Unit vector in `R^n`.
    pub x0: DVector<f64>,
    /// Lattice index of the subspace whose restricted Jacobian produced `x0`.
    pub found_in: usize,
    /// Smallest candidate subspace containing `x0`.
    pub daughter: usize,
}

/// Crossings that do not yield a followable direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteFinding {
    /// A complex pair on the imaginary axis.
    Hopf { subspace: usize, omega: f64 },
    /// Kernel of dimension at least 2 not spanned by directions found in smaller subspaces.
    Unresolved { subspace: usize, kernel_dim: usize },
    /// No singular value below the gap tolerance.
    NoKernel { subspace: usize },
}

/// First subspace of `candidates` (ordered by dimension) containing `x0`.
pub fn smallest_containing(lattice: &SubspaceLattice, candidates: &[usize], x0: &DVector<f64>, tol: f64) -> Option<usize> {
    candidates.iter().copied().find(|&w| lattice.get(w).membership_residual(x0) <= tol * (1.0 + x0.norm()))
}

// Distance from `v` to the span of the orthonormal set `basis`.
fn residual_to_span(v: &DVector<f64>, basis: &[DVector<f64>]) -> f64 {
    let mut r = v.clone();
    for b in basis {
        r -= b * b.dot(&r);
    }
    r.norm()
}

/// Kernel directions of the restricted Jacobians at the crossing `(s, x)` on a
/// branch in `mother`.
///
/// `site` lists the subspaces whose signature changed; they are examined from
/// the smallest up. One-dimensional kernels give a direction unless it lies in
/// the mother subspace or repeats one already found. Larger kernels are
/// accepted only when directions from smaller subspaces already span them.
#[allow(clippy::too_many_arguments)]
pub fn critical_directions(
    restrictions: &Restrictions,
    lattice: &SubspaceLattice,
    mother: usize,
    site: &[usize],
    candidates: &[usize],
    s: f64,
    x: &DVector<f64>,
    gap_tol: f64,
    critical_tol: f64,
) -> (Vec<CriticalDirection>, Vec<SiteFinding>) {
    let mut order: Vec<usize> = site.iter().copied().filter(|&w| w != mother).collect();
    order.sort_by_key(|&w| (lattice.get(w).dim(), w));
    let mother_space = lattice.get(mother);
    let mut found: Vec<CriticalDirection> = Vec::new();
    let mut span: Vec<DVector<f64>> = Vec::new();
    let mut findings = Vec::new();
    for w in order {
        let Some(q) = restrictions.get(w) else { continue };
        let j = restricted_jacobian(q, s, x);
        let svd = j.clone().svd(false, true);
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let kernel: Vec<DVector<f64>> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= gap_tol)
            .map(|i| q.lift(&v_t.row(i).transpose()).normalize())
            .collect();
        match kernel.len() {
            0 => {
                let hopf = eigenvalues(&j)
                    .unwrap_or_default()
                    .into_iter()
                    .find(|c| c.re.abs() <= 10.0 * gap_tol && c.im.abs() > gap_tol);
                findings.push(match hopf {
                    Some(c) => SiteFinding::Hopf { subspace: w, omega: c.im.abs() },
                    None => SiteFinding::NoKernel { subspace: w },
                });
            }
            1 => {
                let x0 = &kernel[0];
                let repeated = found.iter().any(|d| 1.0 - d.x0.dot(x0).abs() < critical_tol);
                if mother_space.membership_residual(x0) < 0.1 || repeated {
                    continue;
                }
                let mut x0 = x0.clone();
                if let Some(k) = x0.iter().position(|v| v.abs() > 1e-12) {
                    if x0[k] < 0.0 {
                        x0 = -x0;
                    }
                }
                let daughter = smallest_containing(lattice, candidates, &x0, critical_tol).unwrap_or(w);
                let r = residual_to_span(&x0, &span);
                let mut e = x0.clone();
                for b in &span {
                    e -= b * b.dot(&e);
                }
                if r > critical_tol {
                    span.push(e / r);
                }
                found.push(CriticalDirection { x0, found_in: w, daughter });
            }
            k => {
                let outside_mother: Vec<&DVector<f64>> =
                    kernel.iter().filter(|v| mother_space.membership_residual(v) >= 0.1).collect();
                if outside_mother.iter().any(|v| residual_to_span(v, &span) > critical_tol) {
                    findings.push(SiteFinding::Unresolved { subspace: w, kernel_dim: k });
                }
            }
        }
    }
    (found, findings)
}
