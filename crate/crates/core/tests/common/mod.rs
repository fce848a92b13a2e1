#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use netbif::polydiag::{PolyBasisMatrix, Subspace, SubspaceLattice};
use netbif::rational::RatMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn diamond() -> RatMatrix {
    RatMatrix::from_integers(&[vec![2, -1, 0, -1], vec![-1, 3, -1, -1], vec![0, -1, 2, -1], vec![-1, -1, -1, 3]])
}

pub fn k3() -> RatMatrix {
    RatMatrix::from_integers(&[vec![2, -1, -1], vec![-1, 2, -1], vec![-1, -1, 2]])
}

pub fn p3() -> RatMatrix {
    RatMatrix::from_integers(&[vec![1, -1, 0], vec![-1, 2, -1], vec![0, -1, 1]])
}

/// Integer matrices with `n <= 5` and entries in `-2..=2`, half of them symmetric.
pub fn random_matrices(count: usize, seed: u64) -> Vec<RatMatrix> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.gen_range(1..=5);
            let mut rows = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if k % 2 == 0 && j < i {
                        rows[i][j] = rows[j][i];
                    } else {
                        rows[i][j] = rng.gen_range(-2..=2);
                    }
                }
            }
            RatMatrix::from_integers(&rows)
        })
        .collect()
}

/// Diamond, K3, P3 and 20 random matrices.
pub fn suite_matrices() -> Vec<(String, RatMatrix)> {
    let mut out = vec![("diamond".to_string(), diamond()), ("K3".to_string(), k3()), ("P3".to_string(), p3())];
    out.extend(random_matrices(20, 7).into_iter().enumerate().map(|(k, m)| (format!("random{k}"), m)));
    out
}

pub fn basis(rows: &[Vec<i64>]) -> PolyBasisMatrix {
    PolyBasisMatrix::from_rows(rows).unwrap()
}

pub fn index_of(lattice: &SubspaceLattice, rows: &[Vec<i64>]) -> usize {
    let b = basis(rows);
    lattice.subspaces().iter().position(|w| w.basis() == Some(&b)).unwrap_or_else(|| panic!("no subspace with basis {b:?}"))
}

/// Orthogonal projector onto the subspace, computed with a floating point pseudoinverse.
pub fn projector(w: &Subspace, n: usize) -> DMatrix<f64> {
    match w.basis() {
        None => DMatrix::zeros(n, n),
        Some(b) => {
            let b = b.to_f64();
            let pinv = b.clone().pseudo_inverse(1e-12).unwrap();
            b * pinv
        }
    }
}

pub fn projector_key(p: &DMatrix<f64>) -> Vec<i64> {
    p.iter().map(|v| (v * 1e6).round() as i64).collect()
}

/// Brute force over every labelling of the cells by `0, ±1, ..., ±n`, where
/// label `±k` means `x_i = ±y_k`. Returns the projectors of the labellings
/// whose subspace is invariant under `m`, plus the trivial subspace.
pub fn oracle_invariant(m: &RatMatrix, include_anti: bool) -> BTreeSet<Vec<i64>> {
    let n = m.nrows();
    let mf = m.to_f64();
    let labels: Vec<i64> = if include_anti { (-(n as i64)..=n as i64).collect() } else { (1..=n as i64).collect() };
    let mut out = BTreeSet::new();
    out.insert(projector_key(&DMatrix::zeros(n, n)));
    let mut code = vec![0usize; n];
    loop {
        let lab: Vec<i64> = code.iter().map(|&c| labels[c]).collect();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if lab[i] != 0 && lab[i].abs() == lab[j].abs() {
                    let size = lab.iter().filter(|v| v.abs() == lab[i].abs()).count() as f64;
                    p[(i, j)] = (lab[i].signum() * lab[j].signum()) as f64 / size;
                }
            }
        }
        let leak = (DMatrix::identity(n, n) - &p) * &mf * &p;
        if leak.amax() < 1e-9 {
            out.insert(projector_key(&p));
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            code[k] += 1;
            if code[k] < labels.len() {
                break;
            }
            code[k] = 0;
            k += 1;
        }
    }
}

/// Every permutation `p` with `m[p(i)][p(j)] = m[i][j]`, by exhaustive search.
pub fn oracle_automorphisms(m: &RatMatrix) -> BTreeSet<Vec<usize>> {
    let n = m.nrows();
    let mut out = BTreeSet::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        if (0..n).all(|i| (0..n).all(|j| m.get(p[i], p[j]) == m.get(i, j))) {
            out.insert(p.to_vec());
        }
    });
    out
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Distance between the unit vectors along `a` and `b`, up to sign.
pub fn direction_gap(a: &DVector<f64>, b: &[f64]) -> f64 {
    let a = a.normalize();
    let b = DVector::from_column_slice(b).normalize();
    (&a - &b).norm().min((&a + &b).norm())
}

/// Basis matrix of a typical element written like `"a b -a 0"`: each letter
/// is a column in order of first appearance.
pub fn pattern(text: &str) -> PolyBasisMatrix {
    let mut letters: Vec<char> = Vec::new();
    let tokens: Vec<&str> = text.split_whitespace().collect();
    for t in &tokens {
        let c = t.trim_start_matches('-').chars().next().unwrap();
        if c != '0' && !letters.contains(&c) {
            letters.push(c);
        }
    }
    let rows: Vec<Vec<i64>> = tokens
        .iter()
        .map(|t| {
            let mut row = vec![0; letters.len()];
            let c = t.trim_start_matches('-').chars().next().unwrap();
            if c != '0' {
                let k = letters.iter().position(|&l| l == c).unwrap();
                row[k] = if t.starts_with('-') { -1 } else { 1 };
            }
            row
        })
        .collect();
    basis(&rows)
}

pub fn find_pattern(lattice: &SubspaceLattice, text: &str) -> usize {
    let b = pattern(text);
    lattice.subspaces().iter().position(|w| w.basis() == Some(&b)).unwrap_or_else(|| panic!("no subspace {text}"))
}
