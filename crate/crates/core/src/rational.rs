//! Small dense matrices over exact rationals.
//!
//! Every matrix that enters the subspace algebra (adjacency matrices, basis
//! matrices, pseudoinverses, quotient matrices) is integer or has small
//! denominators, so `Ratio<i128>` never comes close to overflowing for the
//! network sizes supported here.

use std::fmt;
use std::ops::{Mul, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

/// Parses `7`, `-3/4`, or a plain decimal such as `0.25` into an exact rational.
pub fn parse_rational(token: &str) -> Option<Rational> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    if let Ok(r) = Rational::from_str(t) {
        return Some(r);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if frac_part.len() > 18 || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let int_val: i128 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let frac_val: i128 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
    let denom = 10_i128.pow(frac_part.len() as u32);
    let r = Rational::new(int_val * denom + frac_val, denom);
    Some(if neg { -r } else { r })
}

/// Formats as `p` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds from row-major data. Panics if the length does not match.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Rational>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c, "ragged integer matrix");
                row.iter().map(|&v| Rational::from_integer(v as i128))
            })
            .collect();
        Self { rows: r, cols: c, data }
    }

    pub fn from_f64_exact(m: &DMatrix<f64>) -> Option<Self> {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.set(i, j, Rational::approximate_float(m[(i, j)])?);
            }
        }
        Some(out)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row_major(&self) -> &[Rational] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, *self.get(i, j));
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Exact rank by Gaussian elimination over the rationals.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..a.cols {
            let Some(pivot) = (rank..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
                continue;
            };
            for j in 0..a.cols {
                a.data.swap(rank * a.cols + j, pivot * a.cols + j);
            }
            let p = *a.get(rank, col);
            for r in 0..a.rows {
                if r != rank && !a.get(r, col).is_zero() {
                    let factor = *a.get(r, col) / p;
                    for j in col..a.cols {
                        let v = *a.get(r, j) - factor * *a.get(rank, j);
                        a.set(r, j, v);
                    }
                }
            }
            rank += 1;
            if rank == a.rows {
                break;
            }
        }
        rank
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| *self.get(i, j)).collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN))
    }

    pub fn max_abs(&self) -> Rational {
        self.data.iter().map(Signed::abs).max().unwrap_or_else(Rational::zero)
    }

    pub fn checked_mul(&self, rhs: &RatMatrix) -> Option<RatMatrix> {
        if self.cols != rhs.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Some(out)
    }
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;

    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        self.checked_mul(rhs).expect("matrix dimension mismatch in product")
    }
}

impl Sub for &RatMatrix {
    type Output = RatMatrix;

    fn sub(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        RatMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format_rational(self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}
