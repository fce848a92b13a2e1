use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{restricted_jacobian, sorted_real_parts, BifurcationError};
use crate::continuation::{newton_correct, BranchPoint, ContinuationSettings, Hyperplane};
use crate::network::QuotientSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineSettings {
    /// Stop once the tracked real part is this small.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RefineSettings {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 80 }
    }
}

#[derive(Debug, Clone)]
pub struct RefinedCrossing {
    /// Position along the chord from the first to the second bracket point.
    pub t: f64,
    /// On-branch point `(s*, y*)` in mother coordinates.
    pub z: DVector<f64>,
    /// Real part of the tracked eigenvalue there.
    pub real_part: f64,
}

/// Locates the point between two consecutive branch points where eigenvalue
/// number `index` (ascending real part) of the `candidate`-restricted
/// Jacobian has zero real part.
///
/// Each trial point is put back on the mother branch by Newton's method on
/// the hyperplane normal to the chord `p1 -> p2` at fraction `t`, so the
/// bracket may straddle a fold. The root in `t` is found by the Illinois
/// variant of the secant method with bisection as fallback.
pub fn refine_crossing(
    mother: &QuotientSystem,
    candidate: &QuotientSystem,
    p1: &BranchPoint,
    p2: &BranchPoint,
    index: usize,
    cont: &ContinuationSettings,
    settings: &RefineSettings,
) -> Result<RefinedCrossing, BifurcationError> {
    let z1 = p1.z();
    let z2 = p2.z();
    let chord = &z2 - &z1;
    let len = chord.norm();
    if len == 0.0 {
        return Err(BifurcationError::NoSignChange);
    }
    let normal = &chord / len;
    let tracked = |z: &DVector<f64>| -> Result<f64, BifurcationError> {
        let x = mother.lift(&z.rows(1, z.len() - 1).into_owned());
        let re = sorted_real_parts(&restricted_jacobian(candidate, z[0], &x))?;
        re.get(index).copied().ok_or(BifurcationError::EigenFailure)
    };
    // The guess interpolates the corrected bracket ends, so its distance to
    // the branch shrinks faster than the bracket when a branch point of the
    // mother lies inside it.
    let point_at = |t: f64, a: (f64, &DVector<f64>), b: (f64, &DVector<f64>)| -> Result<DVector<f64>, BifurcationError> {
        let anchor = &z1 + &chord * t;
        let plane = Hyperplane { normal: normal.clone(), anchor };
        let guess = a.1 + (b.1 - a.1) * ((t - a.0) / (b.0 - a.0));
        Ok(newton_correct(mother, &guess, &plane, cont)?)
    };

    let (mut a, fa) = (0.0, tracked(&z1)?);
    let (mut b, mut fb) = (1.0, tracked(&z2)?);
    if fa.abs() <= settings.tol {
        return Ok(RefinedCrossing { t: 0.0, z: z1, real_part: fa });
    }
    if fb.abs() <= settings.tol {
        return Ok(RefinedCrossing { t: 1.0, z: z2, real_part: fb });
    }
    if fa.signum() == fb.signum() {
        return Err(BifurcationError::NoSignChange);
    }
    let (mut ga, mut gb) = (fa, fb);
    let (mut za, mut zb) = (z1.clone(), z2.clone());
    let mut side = 0i8;
    let mut best: Option<RefinedCrossing> = None;
    for it in 0..settings.max_iter {
        let secant = (a * gb - b * ga) / (gb - ga);
        let t = if it % 4 == 3 || !secant.is_finite() || secant <= a || secant >= b { 0.5 * (a + b) } else { secant };
        let z = match point_at(t, (a, &za), (b, &zb)) {
            Ok(z) => z,
            Err(e) => match best {
                Some(r) if r.real_part.abs() <= 1e3 * settings.tol => return Ok(r),
                _ => return Err(e),
            },
        };
        let ft = tracked(&z)?;
        if best.as_ref().is_none_or(|r| ft.abs() < r.real_part.abs()) {
            best = Some(RefinedCrossing { t, z: z.clone(), real_part: ft });
        }
        if ft.abs() <= settings.tol || (b - a) * len <= 1e-15 {
            return Ok(RefinedCrossing { t, z, real_part: ft });
        }
        if ft.signum() == fb.signum() {
            b = t;
            fb = ft;
            gb = ft;
            zb = z;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = t;
            ga = ft;
            za = z;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    match best {
        Some(r) if r.real_part.abs() <= 1e3 * settings.tol => Ok(r),
        _ => Err(BifurcationError::NoConvergence),
    }
}
