//! Coupled cell vector field `F(s, x)_i = f(s, x_i) + h (M x)_i` and its
//! restriction to invariant polydiagonal subspaces.
//!
//! On an `M`-invariant subspace with basis matrix `B` the restricted field has
//! the same form with `M` replaced by the quotient matrix `Q = B^+ M B`, as
//! long as `B` is a synchrony basis or `f` is odd in `x`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polydiag::{self, PolyBasisMatrix, Subspace, SubspaceKind};
use crate::rational::RatMatrix;

/// Highest power of `x` in a coefficient table.
pub const MAX_X_DEGREE: usize = 5;
/// Highest power of `s` in a coefficient table.
pub const MAX_S_DEGREE: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("non-finite value in evaluation")]
    NonFinite,
    #[error("subspace {id} is not invariant under the coupling matrix")]
    NotInvariant { id: String },
    #[error("anti-synchrony subspace {id} is only flow-invariant when f is odd")]
    RequiresOddDynamics { id: String },
    #[error("the trivial subspace is not flow-invariant because f(s, 0) is not identically zero")]
    TrivialNotInvariant,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coupling matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid dynamics: {0}")]
    InvalidDynamics(String),
    #[error(transparent)]
    Subspace(#[from] polydiag::PolydiagError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `s x + x^3`
    CubicSoft,
    /// `s x + alpha x^2 - x^3`
    QuadCubic,
    /// `s x + x^3 - beta x^5`
    Quintic,
    /// Polynomial in `x` (degree ≤ 5) with coefficients polynomial in `s` (degree ≤ 2).
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::CubicSoft => "cubic_soft",
            Family::QuadCubic => "quad_cubic",
            Family::Quintic => "quintic",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Internal cell dynamics `f(s, x)`, stored as the coefficient table
/// `f = sum_{j,k} c[j][k] s^j x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalDynamics {
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    coeffs: [[f64; MAX_X_DEGREE + 1]; MAX_S_DEGREE + 1],
}

impl InternalDynamics {
    pub fn cubic_soft() -> Self {
        let mut c = [[0.0; MAX_X_DEGREE + 1]; MAX_S_DEGREE + 1];
        c[1][1] = 1.0;
        c[0][3] = 1.0;
        Self { family: Family::CubicSoft, alpha: None, beta: None, coeffs: c }
    }

    pub fn quad_cubic(alpha: f64) -> Self {
        let mut c = [[0.0; MAX_X_DEGREE + 1]; MAX_S_DEGREE + 1];
        c[1][1] = 1.0;
        c[0][2] = alpha;
        c[0][3] = -1.0;
        Self { family: Family::QuadCubic, alpha: Some(alpha), beta: None, coeffs: c }
    }

    pub fn quintic(beta: f64) -> Self {
        let mut c = [[0.0; MAX_X_DEGREE + 1]; MAX_S_DEGREE + 1];
        c[1][1] = 1.0;
        c[0][3] = 1.0;
        c[0][5] = -beta;
        Self { family: Family::Quintic, alpha: None, beta: Some(beta), coeffs: c }
    }

    /// Custom polynomial; `coeffs[j][k]` multiplies `s^j x^k`.
    pub fn custom(coeffs: [[f64; MAX_X_DEGREE + 1]; MAX_S_DEGREE + 1]) -> Result<Self, NetworkError> {
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(NetworkError::InvalidDynamics("coefficients must be finite".into()));
        }
        if coeffs.iter().flatten().all(|&c| c == 0.0) {
            return Err(NetworkError::InvalidDynamics("all coefficients are zero".into()));
        }
        Ok(Self { family: Family::Custom, alpha: None, beta: None, coeffs })
    }

    /// Builds a family by name, as used in configuration files.
    pub fn from_name(name: &str, alpha: Option<f64>, beta: Option<f64>) -> Result<Self, NetworkError> {
        match name {
            "cubic_soft" => Ok(Self::cubic_soft()),
            "quad_cubic" => Ok(Self::quad_cubic(alpha.ok_or_else(|| {
                NetworkError::InvalidDynamics("quad_cubic needs alpha".into())
            })?)),
            "quintic" => Ok(Self::quintic(
                beta.ok_or_else(|| NetworkError::InvalidDynamics("quintic needs beta".into()))?,
            )),
            other => Err(NetworkError::InvalidDynamics(format!("unknown family '{other}'"))),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn coefficients(&self) -> &[[f64; MAX_X_DEGREE + 1]; MAX_S_DEGREE + 1] {
        &self.coeffs
    }

    /// `f(s, -x) = -f(s, x)` for all `s`: no even powers of `x`.
    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().all(|row| row.iter().step_by(2).all(|&c| c == 0.0))
    }

    /// `f(s, 0) = 0` for all `s`.
    pub fn vanishes_at_zero(&self) -> bool {
        self.coeffs.iter().all(|row| row[0] == 0.0)
    }

    fn s_coefficient(&self, k: usize, s: f64) -> f64 {
        self.coeffs[0][k] + s * (self.coeffs[1][k] + s * self.coeffs[2][k])
    }

    fn ds_coefficient(&self, k: usize, s: f64) -> f64 {
        self.coeffs[1][k] + 2.0 * s * self.coeffs[2][k]
    }

    pub fn value(&self, s: f64, x: f64) -> f64 {
        (0..=MAX_X_DEGREE).rev().fold(0.0, |acc, k| acc * x + self.s_coefficient(k, s))
    }

    /// `∂f/∂x`
    pub fn dx(&self, s: f64, x: f64) -> f64 {
        (1..=MAX_X_DEGREE).rev().fold(0.0, |acc, k| acc * x + k as f64 * self.s_coefficient(k, s))
    }

    /// `∂f/∂s`
    pub fn ds(&self, s: f64, x: f64) -> f64 {
        (0..=MAX_X_DEGREE).rev().fold(0.0, |acc, k| acc * x + self.ds_coefficient(k, s))
    }
}

/// `f(s, v_i) + h (C v)_i` for a coupling matrix `C` (either `M` or a quotient).
fn field(f: &InternalDynamics, h: f64, coupling: &DMatrix<f64>, s: f64, v: &DVector<f64>) -> Result<DVector<f64>, NetworkError> {
    if !s.is_finite() || v.iter().any(|x| !x.is_finite()) {
        return Err(NetworkError::NonFinite);
    }
    let mut out = coupling * v * h;
    for (o, &vi) in out.iter_mut().zip(v.iter()) {
        *o += f.value(s, vi);
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(NetworkError::NonFinite);
    }
    Ok(out)
}

fn field_jac_x(f: &InternalDynamics, h: f64, coupling: &DMatrix<f64>, s: f64, v: &DVector<f64>) -> DMatrix<f64> {
    let mut j = coupling * h;
    for (i, &vi) in v.iter().enumerate() {
        j[(i, i)] += f.dx(s, vi);
    }
    j
}

fn field_jac_s(f: &InternalDynamics, s: f64, v: &DVector<f64>) -> DVector<f64> {
    v.map(|vi| f.ds(s, vi))
}

/// The full network: coupling matrix `M`, scalar coupling `h`, cell dynamics `f`.
#[derive(Debug, Clone)]
pub struct NetworkSystem {
    m: RatMatrix,
    m_f64: DMatrix<f64>,
    h: f64,
    f: InternalDynamics,
}

impl NetworkSystem {
    pub fn new(m: RatMatrix, h: f64, f: InternalDynamics) -> Result<Self, NetworkError> {
        if !m.is_square() {
            return Err(NetworkError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if !h.is_finite() {
            return Err(NetworkError::NonFinite);
        }
        let m_f64 = m.to_f64();
        Ok(Self { m, m_f64, h, f })
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.m
    }

    pub fn matrix_f64(&self) -> &DMatrix<f64> {
        &self.m_f64
    }

    pub fn coupling(&self) -> f64 {
        self.h
    }

    pub fn dynamics(&self) -> &InternalDynamics {
        &self.f
    }

    fn check_len(&self, x: &DVector<f64>) -> Result<(), NetworkError> {
        if x.len() != self.n() {
            return Err(NetworkError::DimensionMismatch { expected: self.n(), found: x.len() });
        }
        Ok(())
    }

    pub fn eval(&self, s: f64, x: &DVector<f64>) -> Result<DVector<f64>, NetworkError> {
        self.check_len(x)?;
        field(&self.f, self.h, &self.m_f64, s, x)
    }

    pub fn jac_x(&self, s: f64, x: &DVector<f64>) -> DMatrix<f64> {
        field_jac_x(&self.f, self.h, &self.m_f64, s, x)
    }

    pub fn jac_s(&self, s: f64, x: &DVector<f64>) -> DVector<f64> {
        field_jac_s(&self.f, s, x)
    }

    /// Whether `subspace` carries a valid restricted system for this `f`.
    pub fn supports(&self, subspace: &Subspace) -> bool {
        match subspace.kind() {
            SubspaceKind::Trivial => self.f.vanishes_at_zero(),
            SubspaceKind::Synchrony | SubspaceKind::Full => true,
            SubspaceKind::AntiSynchrony => self.f.is_odd(),
        }
    }

    pub fn restrict(&self, subspace: &Subspace) -> Result<QuotientSystem, NetworkError> {
        QuotientSystem::new(self, subspace)
    }
}

/// Exact `B^+ M B`.
pub fn quotient_matrix(m: &RatMatrix, b: &PolyBasisMatrix) -> Result<RatMatrix, NetworkError> {
    if !polydiag::is_invariant(m, b)? {
        return Err(NetworkError::NotInvariant { id: format!("{b:?}") });
    }
    Ok(&(&b.pseudoinverse() * m) * &b.to_rational())
}

/// The restriction of a [`NetworkSystem`] to an invariant subspace, in the
/// subspace's own coordinates `y` with `x = B y`.
#[derive(Debug, Clone)]
pub struct QuotientSystem {
    subspace: Subspace,
    q: RatMatrix,
    q_f64: DMatrix<f64>,
    h: f64,
    f: InternalDynamics,
}

impl QuotientSystem {
    pub fn new(sys: &NetworkSystem, subspace: &Subspace) -> Result<Self, NetworkError> {
        if subspace.n() != sys.n() {
            return Err(NetworkError::DimensionMismatch { expected: sys.n(), found: subspace.n() });
        }
        let q = match subspace.basis() {
            None => {
                if !sys.f.vanishes_at_zero() {
                    return Err(NetworkError::TrivialNotInvariant);
                }
                RatMatrix::zeros(0, 0)
            }
            Some(b) => {
                if subspace.kind() == SubspaceKind::AntiSynchrony && !sys.f.is_odd() {
                    return Err(NetworkError::RequiresOddDynamics { id: subspace.id.clone() });
                }
                quotient_matrix(&sys.m, b).map_err(|e| match e {
                    NetworkError::NotInvariant { .. } => NetworkError::NotInvariant { id: subspace.id.clone() },
                    other => other,
                })?
            }
        };
        let q_f64 = q.to_f64();
        Ok(Self { subspace: subspace.clone(), q, q_f64, h: sys.h, f: sys.f.clone() })
    }

    pub fn d(&self) -> usize {
        self.subspace.dim()
    }

    pub fn n(&self) -> usize {
        self.subspace.n()
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn quotient(&self) -> &RatMatrix {
        &self.q
    }

    pub fn quotient_f64(&self) -> &DMatrix<f64> {
        &self.q_f64
    }

    pub fn dynamics(&self) -> &InternalDynamics {
        &self.f
    }

    fn check_len(&self, y: &DVector<f64>) -> Result<(), NetworkError> {
        if y.len() != self.d() {
            return Err(NetworkError::DimensionMismatch { expected: self.d(), found: y.len() });
        }
        Ok(())
    }

    pub fn eval(&self, s: f64, y: &DVector<f64>) -> Result<DVector<f64>, NetworkError> {
        self.check_len(y)?;
        field(&self.f, self.h, &self.q_f64, s, y)
    }

    pub fn jac_x(&self, s: f64, y: &DVector<f64>) -> DMatrix<f64> {
        field_jac_x(&self.f, self.h, &self.q_f64, s, y)
    }

    pub fn jac_s(&self, s: f64, y: &DVector<f64>) -> DVector<f64> {
        field_jac_s(&self.f, s, y)
    }

    pub fn lift(&self, y: &DVector<f64>) -> DVector<f64> {
        self.subspace.lift(y)
    }

    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>, NetworkError> {
        Ok(self.subspace.project(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diamond() -> RatMatrix {
        RatMatrix::from_integers(&[
            vec![2, -1, 0, -1],
            vec![-1, 3, -1, -1],
            vec![0, -1, 2, -1],
            vec![-1, -1, -1, 3],
        ])
    }

    fn b5() -> Subspace {
        Subspace::from_basis("W5", PolyBasisMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 0], vec![1, 0]]).unwrap())
    }

    #[test]
    fn family_flags() {
        assert!(InternalDynamics::cubic_soft().is_odd());
        assert!(InternalDynamics::quintic(0.3).is_odd());
        assert!(InternalDynamics::quad_cubic(0.0).is_odd());
        assert!(!InternalDynamics::quad_cubic(1.0).is_odd());
        for f in [InternalDynamics::cubic_soft(), InternalDynamics::quintic(0.3), InternalDynamics::quad_cubic(0.0)] {
            for &(s, x) in &[(0.3, 1.7), (-2.0, 0.4), (5.0, -3.0)] {
                assert!((f.value(s, -x) + f.value(s, x)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn family_values() {
        let f = InternalDynamics::quad_cubic(2.0);
        assert_relative_eq!(f.value(1.5, 2.0), 1.5 * 2.0 + 2.0 * 4.0 - 8.0);
        assert_relative_eq!(f.dx(1.5, 2.0), 1.5 + 8.0 - 12.0);
        assert_relative_eq!(f.ds(1.5, 2.0), 2.0);
        let g = InternalDynamics::quintic(0.5);
        assert_relative_eq!(g.value(-1.0, 2.0), -2.0 + 8.0 - 16.0);
        assert_relative_eq!(g.dx(-1.0, 2.0), -1.0 + 12.0 - 0.5 * 5.0 * 16.0);
    }

    #[test]
    fn eval_examples() {
        let sys = NetworkSystem::new(diamond(), -1.0, InternalDynamics::cubic_soft()).unwrap();
        assert_eq!(sys.eval(0.7, &DVector::zeros(4)).unwrap(), DVector::zeros(4));
        let r = sys.eval(-1.0, &DVector::from_element(4, 1.0)).unwrap();
        assert!(r.norm() == 0.0);
        let one = NetworkSystem::new(RatMatrix::zeros(1, 1), -1.0, InternalDynamics::cubic_soft()).unwrap();
        assert_eq!(one.eval(-1.0, &DVector::from_element(1, 1.0)).unwrap()[0], 0.0);
        assert_eq!(sys.eval(f64::NAN, &DVector::zeros(4)), Err(NetworkError::NonFinite));
    }

    #[test]
    fn w5_quotient_residual_at_known_point() {
        let sys = NetworkSystem::new(diamond(), -1.0, InternalDynamics::cubic_soft()).unwrap();
        let q = sys.restrict(&b5()).unwrap();
        let y = DVector::from_vec(vec![1.0 / 2f64.sqrt(), -(2f64.sqrt())]);
        assert!(q.eval(2.5, &y).unwrap().norm() <= 1e-12);
        let j = q.jac_x(2.5, &y);
        // s + 3 y_1^2 - 1 = 3, s + 3 y_2^2 - 3 = 11/2
        let expected = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 3.0, 5.5]);
        assert!((j - expected).norm() <= 1e-12);
    }

    #[test]
    fn jac_s_is_state_for_builtin_families() {
        let x = DVector::from_vec(vec![2.0, -1.0]);
        let sys = NetworkSystem::new(RatMatrix::identity(2), -1.0, InternalDynamics::cubic_soft()).unwrap();
        assert_eq!(sys.jac_s(0.3, &x), x);
        assert_eq!(sys.jac_s(0.3, &DVector::zeros(2)), DVector::zeros(2));
        let one = NetworkSystem::new(RatMatrix::zeros(1, 1), -1.0, InternalDynamics::quintic(1.0)).unwrap();
        assert_eq!(one.jac_s(2.0, &DVector::from_element(1, 3.0))[0], 3.0);
    }

    #[test]
    fn anti_synchrony_needs_odd_f() {
        let sys = NetworkSystem::new(diamond(), -1.0, InternalDynamics::quad_cubic(1.0)).unwrap();
        let w4 = Subspace::from_basis("W4", PolyBasisMatrix::from_rows(&[vec![1], vec![0], vec![-1], vec![0]]).unwrap());
        assert!(matches!(sys.restrict(&w4), Err(NetworkError::RequiresOddDynamics { .. })));
        assert!(sys.restrict(&b5()).is_ok());
    }

    #[test]
    fn trivial_quotient_needs_zero_at_origin() {
        let mut c = [[0.0; 6]; 3];
        c[1][0] = 1.0;
        c[0][2] = -1.0;
        let fold = InternalDynamics::custom(c).unwrap();
        assert!(!fold.vanishes_at_zero());
        let sys = NetworkSystem::new(RatMatrix::zeros(1, 1), -1.0, fold).unwrap();
        assert_eq!(sys.restrict(&Subspace::trivial("W0", 1)).unwrap_err(), NetworkError::TrivialNotInvariant);
    }

    #[test]
    fn lift_and_project() {
        let b = Subspace::from_basis(
            "B",
            PolyBasisMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![0, 0], vec![-1, 0]]).unwrap(),
        );
        let y = DVector::from_vec(vec![1.5, -2.0]);
        assert_eq!(b.lift(&y), DVector::from_vec(vec![1.5, -2.0, 0.0, -1.5]));
        assert_eq!(b.project(&b.lift(&y)).unwrap(), y);
        assert!(b.project(&DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0])).is_err());
        let w8 = Subspace::from_basis(
            "W8",
            PolyBasisMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]).unwrap(),
        );
        assert_eq!(w8.lift(&DVector::from_vec(vec![1.0, 0.0, -2.0])), DVector::from_vec(vec![1.0, 0.0, 1.0, -2.0]));
        assert_eq!(Subspace::trivial("W0", 3).lift(&DVector::zeros(0)), DVector::zeros(3));
    }
}
