//! Polydiagonal subspaces of `R^n` represented by their canonical basis matrices.
//!
//! A polydiagonal subspace is cut out by equations `x_i = x_j`, `x_i = -x_j`
//! and `x_i = 0`. Every nontrivial one is the column space of exactly one
//! `{-1, 0, 1}` matrix `B` with full column rank, at most one non-zero per
//! row, and `B^T` in reduced row-echelon form. Because each row of `B` has a
//! single non-zero entry, the columns are orthogonal and `B^T B` is diagonal,
//! which makes the pseudoinverse, projections and invariance tests exact and
//! cheap. The trivial subspace `{0}` has no basis matrix and is carried as a
//! separate kind.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DVector;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{RatMatrix, Rational};
use crate::symmetry::{self, SymmetryGroup};

/// Default cap on `n` for brute-force enumeration.
pub const DEFAULT_N_MAX: usize = 8;

/// Tolerance for floating-point invariance checks, relative to `||MB||`.
pub const TOL_INVARIANT: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolydiagError {
    #[error("entry {value} at ({row}, {col}) is not in {{-1, 0, 1}}")]
    BadEntry { row: usize, col: usize, value: i64 },
    #[error("basis matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("row {row} has more than one non-zero entry")]
    RowConflict { row: usize },
    #[error("transpose is not in reduced row-echelon form at column {col}")]
    NotEchelon { col: usize },
    #[error("span is not a polydiagonal subspace")]
    NotPolydiagonal,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("n = {n} exceeds the enumeration limit n_max = {max}")]
    TooLarge { n: usize, max: usize },
    #[error("subspace {id} lives in R^{found}, expected R^{expected}")]
    InconsistentAmbient { id: String, expected: usize, found: usize },
    #[error("vector is not in the subspace (residual {residual:e})")]
    NotInSubspace { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceKind {
    Trivial,
    Synchrony,
    AntiSynchrony,
    Full,
}

impl SubspaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SubspaceKind::Trivial => "trivial",
            SubspaceKind::Synchrony => "synchrony",
            SubspaceKind::AntiSynchrony => "anti-synchrony",
            SubspaceKind::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trivial" => Some(SubspaceKind::Trivial),
            "synchrony" => Some(SubspaceKind::Synchrony),
            "anti-synchrony" | "antisynchrony" => Some(SubspaceKind::AntiSynchrony),
            "full" => Some(SubspaceKind::Full),
            _ => None,
        }
    }
}

impl fmt::Display for SubspaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Canonical `n x d` basis matrix of a nontrivial polydiagonal subspace.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyBasisMatrix {
    n: usize,
    d: usize,
    entries: Vec<i8>,
}

impl PolyBasisMatrix {
    /// Checks the three defining conditions and entry range.
    pub fn validate(n: usize, d: usize, entries: &[i64]) -> Result<Self, PolydiagError> {
        if entries.len() != n * d {
            return Err(PolydiagError::DimensionMismatch { expected: n * d, found: entries.len() });
        }
        for (k, &v) in entries.iter().enumerate() {
            if !(-1..=1).contains(&v) {
                return Err(PolydiagError::BadEntry { row: k / d.max(1), col: k % d.max(1), value: v });
            }
        }
        if d == 0 || d > n {
            return Err(PolydiagError::RankDeficient { rank: d.min(n), expected: d });
        }
        for i in 0..n {
            let nonzeros = entries[i * d..(i + 1) * d].iter().filter(|&&v| v != 0).count();
            if nonzeros > 1 {
                return Err(PolydiagError::RowConflict { row: i });
            }
        }
        // With one non-zero per row the columns are orthogonal, so rank is the
        // number of non-zero columns.
        let first_rows: Vec<Option<usize>> =
            (0..d).map(|l| (0..n).find(|&i| entries[i * d + l] != 0)).collect();
        let rank = first_rows.iter().filter(|r| r.is_some()).count();
        if rank != d {
            return Err(PolydiagError::RankDeficient { rank, expected: d });
        }
        let mut prev: Option<usize> = None;
        for (l, first) in first_rows.iter().enumerate() {
            let row = first.expect("rank checked");
            if entries[row * d + l] != 1 || prev.is_some_and(|p| row <= p) {
                return Err(PolydiagError::NotEchelon { col: l });
            }
            prev = Some(row);
        }
        Ok(Self { n, d, entries: entries.iter().map(|&v| v as i8).collect() })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, PolydiagError> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(PolydiagError::DimensionMismatch { expected: d, found: 0 });
        }
        let flat: Vec<i64> = rows.iter().flatten().copied().collect();
        Self::validate(n, d, &flat)
    }

    /// Builds from the per-row column assignment `(column, sign)`; rows mapped
    /// to `None` are zero rows. The assignment must already be canonical.
    fn from_assignment(assign: &[Option<(usize, i8)>], d: usize) -> Self {
        let n = assign.len();
        let mut entries = vec![0i8; n * d];
        for (i, a) in assign.iter().enumerate() {
            if let Some((l, s)) = a {
                entries[i * d + l] = *s;
            }
        }
        Self { n, d, entries }
    }

    pub fn identity(n: usize) -> Self {
        let assign: Vec<_> = (0..n).map(|i| Some((i, 1i8))).collect();
        Self::from_assignment(&assign, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, l: usize) -> i8 {
        self.entries[i * self.d + l]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// Column and sign of the non-zero entry in row `i`, if any.
    pub fn row_support(&self, i: usize) -> Option<(usize, i8)> {
        (0..self.d).find_map(|l| {
            let v = self.entry(i, l);
            (v != 0).then_some((l, v))
        })
    }

    /// Non-zero counts per column; these are the diagonal entries of `B^T B`.
    pub fn column_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.d];
        for i in 0..self.n {
            if let Some((l, _)) = self.row_support(i) {
                counts[l] += 1;
            }
        }
        counts
    }

    /// Synchrony iff every row carries a `+1`.
    pub fn is_synchrony(&self) -> bool {
        (0..self.n).all(|i| matches!(self.row_support(i), Some((_, 1))))
    }

    pub fn is_identity(&self) -> bool {
        self.n == self.d && (0..self.n).all(|i| self.row_support(i) == Some((i, 1)))
    }

    pub fn kind(&self) -> SubspaceKind {
        if self.is_identity() {
            SubspaceKind::Full
        } else if self.is_synchrony() {
            SubspaceKind::Synchrony
        } else {
            SubspaceKind::AntiSynchrony
        }
    }

    pub fn to_rational(&self) -> RatMatrix {
        let data = self.entries.iter().map(|&v| Rational::from_integer(v as i128)).collect();
        RatMatrix::from_row_major(self.n, self.d, data)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.d, |i, l| self.entry(i, l) as f64)
    }

    /// `B^+ = (B^T B)^{-1} B^T`, exact.
    pub fn pseudoinverse(&self) -> RatMatrix {
        let counts = self.column_counts();
        let mut p = RatMatrix::zeros(self.d, self.n);
        for i in 0..self.n {
            if let Some((l, s)) = self.row_support(i) {
                p.set(l, i, Rational::new(s as i128, counts[l] as i128));
            }
        }
        p
    }

    /// Whether `v` lies in `col(B)`, exactly.
    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        if v.len() != self.n {
            return false;
        }
        let mut class_value: Vec<Option<Rational>> = vec![None; self.d];
        for (i, vi) in v.iter().enumerate() {
            match self.row_support(i) {
                None => {
                    if !vi.is_zero() {
                        return false;
                    }
                }
                Some((l, s)) => {
                    let val = if s > 0 { *vi } else { -*vi };
                    match &class_value[l] {
                        None => class_value[l] = Some(val),
                        Some(c) if *c == val => {}
                        Some(_) => return false,
                    }
                }
            }
        }
        true
    }

    /// `B y`.
    pub fn lift(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| match self.row_support(i) {
            Some((l, s)) => s as f64 * y[l],
            None => 0.0,
        })
    }

    /// `B^+ x` (no membership check).
    pub fn project_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        let counts = self.column_counts();
        let mut y = DVector::zeros(self.d);
        for i in 0..self.n {
            if let Some((l, s)) = self.row_support(i) {
                y[l] += s as f64 * x[i];
            }
        }
        for l in 0..self.d {
            y[l] /= counts[l] as f64;
        }
        y
    }

    /// `||(I - B B^+) x||`, the distance from `x` to `col(B)`.
    pub fn membership_residual(&self, x: &DVector<f64>) -> f64 {
        (x - self.lift(&self.project_unchecked(x))).norm()
    }

    /// Applies a signed permutation (`x_i -> sign * x_{perm^-1(i)}`) and
    /// returns the canonical basis of the image.
    pub fn permuted(&self, perm: &[usize], sign: i8) -> Self {
        let mut cols: Vec<Vec<Rational>> = vec![vec![Rational::zero(); self.n]; self.d];
        for i in 0..self.n {
            if let Some((l, s)) = self.row_support(i) {
                cols[l][perm[i]] = Rational::from_integer((s * sign) as i128);
            }
        }
        canonicalize(&cols).expect("image of a polydiagonal subspace is polydiagonal")
    }

    fn ordering_key(&self) -> (usize, Vec<i8>) {
        (self.d, self.entries.clone())
    }
}

impl fmt::Debug for PolyBasisMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyBasisMatrix({}x{}; ", self.n, self.d)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.d).map(|l| self.entry(i, l).to_string()).collect();
            write!(f, "[{}]", row.join(" "))?;
        }
        write!(f, ")")
    }
}

/// Returns the unique canonical basis matrix whose column space is the span of
/// `vectors`, exactly.
pub fn canonicalize(vectors: &[Vec<Rational>]) -> Result<PolyBasisMatrix, PolydiagError> {
    let n = vectors.first().map_or(0, Vec::len);
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(PolydiagError::DimensionMismatch { expected: n, found: v.len() });
    }
    let assign = relation_assignment(n, vectors.len(), |k, i| vectors[k][i], |a, b| a == b);
    let d = assign.iter().flatten().map(|&(l, _)| l + 1).max().unwrap_or(0);
    if d == 0 {
        return Err(PolydiagError::NotPolydiagonal);
    }
    let span = RatMatrix::from_row_major(
        vectors.len(),
        n,
        vectors.iter().flatten().copied().collect(),
    );
    if span.rank() != d {
        return Err(PolydiagError::NotPolydiagonal);
    }
    Ok(PolyBasisMatrix::from_assignment(&assign, d))
}

/// Floating-point variant of [`canonicalize`] for numerically computed spans
/// (eigenvectors). Equalities are tested to `tol` relative to the largest entry.
pub fn canonicalize_f64(vectors: &[DVector<f64>], tol: f64) -> Result<PolyBasisMatrix, PolydiagError> {
    let n = vectors.first().map_or(0, |v| v.len());
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(PolydiagError::DimensionMismatch { expected: n, found: v.len() });
    }
    let scale = vectors.iter().map(|v| v.amax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let eq_tol = tol * scale;
    let assign = relation_assignment(n, vectors.len(), |k, i| vectors[k][i], |a, b| (a - b).abs() <= eq_tol);
    let d = assign.iter().flatten().map(|&(l, _)| l + 1).max().unwrap_or(0);
    if d == 0 {
        return Err(PolydiagError::NotPolydiagonal);
    }
    let mat = nalgebra::DMatrix::from_fn(n, vectors.len(), |i, k| vectors[k][i] / scale);
    let rank = mat.rank(tol.max(1e-12));
    if rank != d {
        return Err(PolydiagError::NotPolydiagonal);
    }
    Ok(PolyBasisMatrix::from_assignment(&assign, d))
}

/// Row-by-row class assignment from the equalities `v_i = +-v_j` and `v_i = 0`
/// satisfied by every vector of the spanning set.
fn relation_assignment<T, G, E>(n: usize, count: usize, get: G, eq: E) -> Vec<Option<(usize, i8)>>
where
    T: std::ops::Neg<Output = T> + Copy + Zero,
    G: Fn(usize, usize) -> T,
    E: Fn(T, T) -> bool,
{
    let mut assign: Vec<Option<(usize, i8)>> = Vec::with_capacity(n);
    let mut next_col = 0;
    for i in 0..n {
        if (0..count).all(|k| eq(get(k, i), T::zero())) {
            assign.push(None);
            continue;
        }
        let mut found = None;
        for j in 0..i {
            let Some((l, sj)) = assign[j] else { continue };
            if (0..count).all(|k| eq(get(k, i), get(k, j))) {
                found = Some((l, sj));
                break;
            }
            if (0..count).all(|k| eq(get(k, i), -get(k, j))) {
                found = Some((l, -sj));
                break;
            }
        }
        match found {
            Some(a) => assign.push(Some(a)),
            None => {
                assign.push(Some((next_col, 1)));
                next_col += 1;
            }
        }
    }
    assign
}

/// A polydiagonal subspace with a stable label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub id: String,
    n: usize,
    basis: Option<PolyBasisMatrix>,
}

impl Subspace {
    pub fn trivial(id: impl Into<String>, n: usize) -> Self {
        Self { id: id.into(), n, basis: None }
    }

    pub fn from_basis(id: impl Into<String>, basis: PolyBasisMatrix) -> Self {
        Self { id: id.into(), n: basis.n(), basis: Some(basis) }
    }

    pub fn full(id: impl Into<String>, n: usize) -> Self {
        Self::from_basis(id, PolyBasisMatrix::identity(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.as_ref().map_or(0, PolyBasisMatrix::d)
    }

    pub fn basis(&self) -> Option<&PolyBasisMatrix> {
        self.basis.as_ref()
    }

    pub fn kind(&self) -> SubspaceKind {
        self.basis.as_ref().map_or(SubspaceKind::Trivial, PolyBasisMatrix::kind)
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_none()
    }

    /// Same subspace, ignoring labels.
    pub fn same_space(&self, other: &Subspace) -> bool {
        self.n == other.n && self.basis == other.basis
    }

    /// `B y`; the trivial subspace lifts the empty vector to `0`.
    pub fn lift(&self, y: &DVector<f64>) -> DVector<f64> {
        match &self.basis {
            Some(b) => b.lift(y),
            None => DVector::zeros(self.n),
        }
    }

    /// `B^+ x`, rejecting `x` farther than `1e-9 (1 + ||x||)` from the subspace.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>, PolydiagError> {
        self.project_with_tol(x, 1e-9)
    }

    pub fn project_with_tol(&self, x: &DVector<f64>, tol: f64) -> Result<DVector<f64>, PolydiagError> {
        if x.len() != self.n {
            return Err(PolydiagError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        let residual = self.membership_residual(x);
        if residual > tol * (1.0 + x.norm()) {
            return Err(PolydiagError::NotInSubspace { residual });
        }
        Ok(self.project_unchecked(x))
    }

    pub fn project_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.basis {
            Some(b) => b.project_unchecked(x),
            None => DVector::zeros(0),
        }
    }

    pub fn membership_residual(&self, x: &DVector<f64>) -> f64 {
        match &self.basis {
            Some(b) => b.membership_residual(x),
            None => x.norm(),
        }
    }

    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        match &self.basis {
            Some(b) => b.contains_vector(v),
            None => v.iter().all(Zero::is_zero),
        }
    }

    /// Image under the signed permutation; trivial and full map to themselves.
    pub fn permuted(&self, perm: &[usize], sign: i8) -> Subspace {
        match &self.basis {
            None => self.clone(),
            Some(b) if b.is_identity() => self.clone(),
            Some(b) => Subspace { id: self.id.clone(), n: self.n, basis: Some(b.permuted(perm, sign)) },
        }
    }

    fn ordering_key(&self) -> (usize, Vec<i8>) {
        self.basis.as_ref().map_or((0, Vec::new()), PolyBasisMatrix::ordering_key)
    }
}

/// Canonical order: by dimension, then lexicographically by row-major entries.
pub fn canonical_order(a: &Subspace, b: &Subspace) -> Ordering {
    a.ordering_key().cmp(&b.ordering_key())
}

/// Exact pseudoinverse of a basis matrix.
pub fn pseudoinverse(b: &PolyBasisMatrix) -> RatMatrix {
    b.pseudoinverse()
}

/// Exact test of `col(M B) ⊆ col(B)`.
pub fn is_invariant(m: &RatMatrix, b: &PolyBasisMatrix) -> Result<bool, PolydiagError> {
    if !m.is_square() || m.nrows() != b.n() {
        return Err(PolydiagError::DimensionMismatch { expected: b.n(), found: m.nrows() });
    }
    let mut v = vec![Rational::zero(); b.n()];
    for l in 0..b.d() {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = Rational::zero();
            for j in 0..b.n() {
                let e = b.entry(j, l);
                if e != 0 {
                    let mij = m.get(i, j);
                    if e > 0 {
                        *vi += mij;
                    } else {
                        *vi -= mij;
                    }
                }
            }
        }
        if !b.contains_vector(&v) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Floating-point invariance test: `||(I - B B^+) M B|| <= tol ||M B||`.
pub fn is_invariant_f64(m: &nalgebra::DMatrix<f64>, b: &PolyBasisMatrix, tol: f64) -> Result<bool, PolydiagError> {
    if m.nrows() != m.ncols() || m.nrows() != b.n() {
        return Err(PolydiagError::DimensionMismatch { expected: b.n(), found: m.nrows() });
    }
    let mb = m * b.to_f64();
    let mut residual = 0.0f64;
    for l in 0..b.d() {
        let col: DVector<f64> = mb.column(l).into_owned();
        residual = residual.max(b.membership_residual(&col));
    }
    Ok(residual <= tol * mb.norm().max(f64::MIN_POSITIVE))
}

/// Whether `inner ⊆ outer`.
pub fn contains(outer: &Subspace, inner: &Subspace) -> Result<bool, PolydiagError> {
    if outer.n() != inner.n() {
        return Err(PolydiagError::DimensionMismatch { expected: outer.n(), found: inner.n() });
    }
    let Some(inner_basis) = inner.basis() else { return Ok(true) };
    let Some(outer_basis) = outer.basis() else { return Ok(false) };
    if inner_basis.d() > outer_basis.d() {
        return Ok(false);
    }
    let r = inner_basis.to_rational();
    Ok((0..inner_basis.d()).all(|l| outer_basis.contains_vector(&r.column(l))))
}

/// Every `M`-invariant polydiagonal subspace, sorted canonically and labelled
/// `W0, W1, ...`. Always includes the trivial and the full subspace.
pub fn enumerate_invariant(
    m: &RatMatrix,
    include_antisynchrony: bool,
    n_max: usize,
) -> Result<Vec<Subspace>, PolydiagError> {
    if !m.is_square() {
        return Err(PolydiagError::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let n = m.nrows();
    if n > n_max {
        return Err(PolydiagError::TooLarge { n, max: n_max });
    }
    let mut found: Vec<PolyBasisMatrix> = Vec::new();
    let mut assign: Vec<Option<(usize, i8)>> = Vec::with_capacity(n);
    enumerate_rec(m, include_antisynchrony, &mut assign, 0, &mut found);
    let mut subspaces: Vec<Subspace> = Vec::with_capacity(found.len() + 1);
    subspaces.push(Subspace::trivial("", n));
    subspaces.extend(found.into_iter().map(|b| Subspace::from_basis("", b)));
    subspaces.sort_by(canonical_order);
    for (k, s) in subspaces.iter_mut().enumerate() {
        s.id = format!("W{k}");
    }
    Ok(subspaces)
}

// Builds canonical assignments row by row: a row is zero, opens a new column
// with +1, or joins an existing column with either sign. This generates each
// polydiagonal basis matrix exactly once and never a row conflict.
fn enumerate_rec(
    m: &RatMatrix,
    anti: bool,
    assign: &mut Vec<Option<(usize, i8)>>,
    cols: usize,
    out: &mut Vec<PolyBasisMatrix>,
) {
    let n = m.nrows();
    if assign.len() == n {
        if cols == 0 {
            return;
        }
        let b = PolyBasisMatrix::from_assignment(assign, cols);
        if is_invariant(m, &b).unwrap_or(false) {
            out.push(b);
        }
        return;
    }
    if anti {
        assign.push(None);
        enumerate_rec(m, anti, assign, cols, out);
        assign.pop();
    }
    assign.push(Some((cols, 1)));
    enumerate_rec(m, anti, assign, cols + 1, out);
    assign.pop();
    for l in 0..cols {
        let signs: &[i8] = if anti { &[1, -1] } else { &[1] };
        for &s in signs {
            assign.push(Some((l, s)));
            enumerate_rec(m, anti, assign, cols, out);
            assign.pop();
        }
    }
}

/// Subspaces with their containment order and symmetry orbits.
#[derive(Clone, Debug)]
pub struct SubspaceLattice {
    n: usize,
    subspaces: Vec<Subspace>,
    contains: Vec<Vec<bool>>,
    covers: Vec<(usize, usize)>,
    orbits: Vec<Vec<usize>>,
}

/// Builds the Hasse diagram and orbit partition.
pub fn build_lattice(subspaces: Vec<Subspace>, group: &SymmetryGroup) -> Result<SubspaceLattice, crate::Error> {
    let n = subspaces.first().map_or(0, Subspace::n);
    for s in &subspaces {
        if s.n() != n {
            return Err(PolydiagError::InconsistentAmbient { id: s.id.clone(), expected: n, found: s.n() }.into());
        }
    }
    let k = subspaces.len();
    let mut contains_mat = vec![vec![false; k]; k];
    for (i, outer) in subspaces.iter().enumerate() {
        for (j, inner) in subspaces.iter().enumerate() {
            contains_mat[i][j] = contains(outer, inner)?;
        }
    }
    let covers = transitive_reduction(&contains_mat);
    let orbits = symmetry::orbit_partition(&subspaces, group)?;
    Ok(SubspaceLattice { n, subspaces, contains: contains_mat, covers, orbits })
}

// (child, parent) pairs where parent strictly contains child with nothing in between.
fn transitive_reduction(contains_mat: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let k = contains_mat.len();
    let strictly = |outer: usize, inner: usize| outer != inner && contains_mat[outer][inner];
    let mut covers = Vec::new();
    for child in 0..k {
        for parent in 0..k {
            if strictly(parent, child) && !(0..k).any(|mid| strictly(parent, mid) && strictly(mid, child)) {
                covers.push((child, parent));
            }
        }
    }
    covers
}

impl SubspaceLattice {
    /// Replaces the computed covers with supplied ones after checking that their
    /// transitive closure is exactly the containment relation.
    pub fn with_covers(mut self, covers: Vec<(usize, usize)>) -> Result<Self, String> {
        let k = self.subspaces.len();
        let mut closure = vec![vec![false; k]; k];
        for (i, row) in closure.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(child, parent) in &covers {
            if child >= k || parent >= k {
                return Err("cover refers to an unknown subspace".into());
            }
            closure[parent][child] = true;
        }
        for mid in 0..k {
            for outer in 0..k {
                if closure[outer][mid] {
                    for inner in 0..k {
                        if closure[mid][inner] {
                            closure[outer][inner] = true;
                        }
                    }
                }
            }
        }
        for outer in 0..k {
            for inner in 0..k {
                if closure[outer][inner] != self.contains[outer][inner] {
                    return Err(format!(
                        "lattice disagrees with containment for {} < {}",
                        self.subspaces[inner].id, self.subspaces[outer].id
                    ));
                }
            }
        }
        self.covers = covers;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn get(&self, idx: usize) -> &Subspace {
        &self.subspaces[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.subspaces.iter().position(|s| s.id == id)
    }

    /// Index of the subspace equal to `s` (ignoring labels).
    pub fn find_space(&self, s: &Subspace) -> Option<usize> {
        self.subspaces.iter().position(|t| t.same_space(s))
    }

    /// Whether subspace `outer` contains subspace `inner`.
    pub fn contains(&self, outer: usize, inner: usize) -> bool {
        self.contains[outer][inner]
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    /// Orbit class index of each subspace.
    pub fn orbit_of(&self, idx: usize) -> usize {
        self.orbits.iter().position(|o| o.contains(&idx)).expect("orbits partition the lattice")
    }

    pub fn trivial_index(&self) -> Option<usize> {
        self.subspaces.iter().position(Subspace::is_trivial)
    }

    pub fn full_index(&self) -> Option<usize> {
        self.subspaces.iter().position(|s| s.kind() == SubspaceKind::Full)
    }
}
