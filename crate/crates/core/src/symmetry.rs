//! Symmetries of a coupled cell network.
//!
//! A permutation `p` acts by `(p x)_{p(i)} = x_i` and is a symmetry of the
//! vector field when its permutation matrix commutes with `M`, i.e.
//! `M[p(i), p(j)] = M[i, j]`. When `f` is odd, `x -> -x` is a symmetry as well
//! and the group is the product of the two.

use nalgebra::DVector;
use thiserror::Error;

use crate::polydiag::Subspace;
use crate::rational::RatMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("{0:?} is not a permutation of 0..{1}")]
    NotPermutation(Vec<usize>, usize),
    #[error("permutation {0:?} does not commute with the coupling matrix")]
    DoesNotCommute(Vec<usize>),
    #[error("the image of subspace {id} is not in the list")]
    NotClosed { id: String },
    #[error("group of order > {0} generated; inputs are inconsistent")]
    TooLarge(usize),
}

const MAX_ORDER: usize = 40_320 * 2;

/// All permutations `p` with `M[p(i), p(j)] = M[i, j]`, in lexicographic order.
pub fn automorphisms(m: &RatMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut out = Vec::new();
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    automorphisms_rec(m, &mut perm, &mut used, &mut out);
    out
}

fn automorphisms_rec(m: &RatMatrix, perm: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    let n = m.nrows();
    let i = perm.len();
    if i == n {
        out.push(perm.clone());
        return;
    }
    for cand in 0..n {
        if used[cand] {
            continue;
        }
        let consistent = m.get(cand, cand) == m.get(i, i)
            && (0..i).all(|j| m.get(cand, perm[j]) == m.get(i, j) && m.get(perm[j], cand) == m.get(j, i));
        if consistent {
            used[cand] = true;
            perm.push(cand);
            automorphisms_rec(m, perm, used, out);
            perm.pop();
            used[cand] = false;
        }
    }
}

pub fn commutes(m: &RatMatrix, perm: &[usize]) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| m.get(perm[i], perm[j]) == m.get(i, j)))
}

fn check_permutation(perm: &[usize], n: usize) -> Result<(), SymmetryError> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(SymmetryError::NotPermutation(perm.to_vec(), n));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(SymmetryError::NotPermutation(perm.to_vec(), n));
        }
        seen[p] = true;
    }
    Ok(())
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // (a ∘ b)(i) = a(b(i))
    b.iter().map(|&bi| a[bi]).collect()
}

/// A finite group of signed permutations: every permutation in `perms`,
/// optionally combined with the global sign flip.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGroup {
    n: usize,
    perms: Vec<Vec<usize>>,
    has_sign_flip: bool,
}

impl SymmetryGroup {
    pub fn trivial(n: usize) -> Self {
        Self { n, perms: vec![(0..n).collect()], has_sign_flip: false }
    }

    /// Full automorphism group of `M`, with the sign flip when `f` is odd.
    pub fn from_matrix(m: &RatMatrix, odd: bool) -> Self {
        Self { n: m.nrows(), perms: automorphisms(m), has_sign_flip: odd }
    }

    /// Closure of the given generators. Each generator must commute with `m`.
    pub fn from_generators(m: &RatMatrix, generators: &[Vec<usize>], sign_flip: bool) -> Result<Self, SymmetryError> {
        let n = m.nrows();
        for g in generators {
            check_permutation(g, n)?;
            if !commutes(m, g) {
                return Err(SymmetryError::DoesNotCommute(g.clone()));
            }
        }
        let mut perms: Vec<Vec<usize>> = vec![(0..n).collect()];
        let mut frontier = perms.clone();
        while let Some(p) = frontier.pop() {
            for g in generators {
                let q = compose(g, &p);
                if !perms.contains(&q) {
                    if perms.len() >= MAX_ORDER {
                        return Err(SymmetryError::TooLarge(MAX_ORDER));
                    }
                    perms.push(q.clone());
                    frontier.push(q);
                }
            }
        }
        perms.sort();
        Ok(Self { n, perms, has_sign_flip: sign_flip })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn has_sign_flip(&self) -> bool {
        self.has_sign_flip
    }

    pub fn order(&self) -> usize {
        self.perms.len() * if self.has_sign_flip { 2 } else { 1 }
    }

    /// Every element as `(perm, sign)`, identity first.
    pub fn elements(&self) -> impl Iterator<Item = (&[usize], i8)> + '_ {
        let signs: &'static [i8] = if self.has_sign_flip { &[1, -1] } else { &[1] };
        signs.iter().flat_map(move |&s| self.perms.iter().map(move |p| (p.as_slice(), s)))
    }

    /// Closed under composition and containing the identity.
    pub fn is_group(&self) -> bool {
        let id: Vec<usize> = (0..self.n).collect();
        self.perms.contains(&id)
            && self.perms.iter().all(|a| self.perms.iter().all(|b| self.perms.contains(&compose(a, b))))
    }

    pub fn act_on_subspace(&self, perm: &[usize], sign: i8, w: &Subspace) -> Subspace {
        w.permuted(perm, sign)
    }

    /// Whether some element maps `(x_from, d_from)` to `(x_to, d_to)` within `tol`
    /// (relative to the vector norms).
    pub fn maps_to(
        &self,
        x_from: &DVector<f64>,
        d_from: &DVector<f64>,
        x_to: &DVector<f64>,
        d_to: &DVector<f64>,
        tol: f64,
    ) -> bool {
        self.elements().any(|(p, s)| {
            (act(p, s, x_from) - x_to).norm() <= tol * (1.0 + x_to.norm())
                && (act(p, s, d_from) - d_to).norm() <= tol * (1.0 + d_to.norm())
        })
    }

    /// Elements fixing `x` within `tol`.
    pub fn stabilizer<'a>(&'a self, x: &'a DVector<f64>, tol: f64) -> impl Iterator<Item = (&'a [usize], i8)> + 'a {
        self.elements().filter(move |(p, s)| (act(p, *s, x) - x).norm() <= tol * (1.0 + x.norm()))
    }
}

/// `(g x)_{perm[i]} = sign * x_i`.
pub fn act(perm: &[usize], sign: i8, x: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(x.len());
    for (i, &pi) in perm.iter().enumerate() {
        out[pi] = sign as f64 * x[i];
    }
    out
}

/// Partition of `subspaces` into group orbits, each sorted by index and the
/// list sorted by smallest member.
pub fn orbit_partition(subspaces: &[Subspace], group: &SymmetryGroup) -> Result<Vec<Vec<usize>>, SymmetryError> {
    let k = subspaces.len();
    let mut class: Vec<Option<usize>> = vec![None; k];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for i in 0..k {
        if class[i].is_some() {
            continue;
        }
        let mut orbit = Vec::new();
        for (p, s) in group.elements() {
            let image = subspaces[i].permuted(p, s);
            let j = subspaces
                .iter()
                .position(|t| t.same_space(&image))
                .ok_or_else(|| SymmetryError::NotClosed { id: subspaces[i].id.clone() })?;
            if class[j].is_none() {
                class[j] = Some(orbits.len());
                orbit.push(j);
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    Ok(orbits)
}
