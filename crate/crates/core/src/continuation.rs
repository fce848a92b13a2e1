//! Pseudo-arclength continuation of one branch inside one quotient system.
//!
//! Points live in `(s, y)` space with `y` the quotient coordinates. Each step
//! predicts along the unit tangent and corrects with Newton's method on the
//! hyperplane through the predictor normal to the tangent, which lets the
//! corrector pass folds where `s` turns around.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{NetworkError, QuotientSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("Newton iteration did not converge (residual {residual:e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("singular Jacobian in Newton correction")]
    SingularJacobian,
    #[error("augmented Jacobian has a kernel of dimension at least 2")]
    RankDeficient,
    #[error("starting point is not a solution (residual {residual:e})")]
    StartInvalid { residual: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSettings {
    pub tol_newton: f64,
    pub max_newton_iter: usize,
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    pub merge_tol: f64,
    pub max_steps: usize,
    /// Branches leaving the ball `||y|| <= norm_max` are treated as window exits.
    pub norm_max: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            tol_newton: 1e-10,
            max_newton_iter: 20,
            step_init: 0.02,
            step_min: 1e-6,
            step_max: 0.1,
            merge_tol: 1e-6,
            max_steps: 10_000,
            norm_max: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub s_min: f64,
    pub s_max: f64,
}

impl Window {
    pub fn contains(&self, s: f64) -> bool {
        s >= self.s_min && s <= self.s_max
    }
}

/// `{z : normal · (z - anchor) = 0}` in `(s, y)` space.
#[derive(Debug, Clone)]
pub struct Hyperplane {
    pub normal: DVector<f64>,
    pub anchor: DVector<f64>,
}

impl Hyperplane {
    /// The hyperplane `s = s0`.
    pub fn fixed_s(dim: usize, s0: f64) -> Self {
        let mut normal = DVector::zeros(dim);
        normal[0] = 1.0;
        let mut anchor = DVector::zeros(dim);
        anchor[0] = s0;
        Self { normal, anchor }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    WindowExit,
    ClosedLoop,
    HitKnownEvent,
    MaxSteps,
    NewtonFailure,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::WindowExit => "window_exit",
            Termination::ClosedLoop => "closed_loop",
            Termination::HitKnownEvent => "hit_known_event",
            Termination::MaxSteps => "max_steps",
            Termination::NewtonFailure => "newton_failure",
        }
    }
}

/// A converged point on a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub s: f64,
    pub y: DVector<f64>,
    pub x: DVector<f64>,
    pub tangent: DVector<f64>,
    /// Negative-real-part eigenvalue counts, one per daughter candidate.
    pub signatures: Vec<usize>,
}

impl BranchPoint {
    pub fn new(q: &QuotientSystem, z: &DVector<f64>, tangent: DVector<f64>) -> Self {
        let y = z.rows(1, z.len() - 1).into_owned();
        let x = q.lift(&y);
        Self { s: z[0], y, x, tangent, signatures: Vec::new() }
    }

    /// `(s, y)` stacked.
    pub fn z(&self) -> DVector<f64> {
        stack(self.s, &self.y)
    }
}

pub fn stack(s: f64, y: &DVector<f64>) -> DVector<f64> {
    let mut z = DVector::zeros(y.len() + 1);
    z[0] = s;
    z.rows_mut(1, y.len()).copy_from(y);
    z
}

fn split(z: &DVector<f64>) -> (f64, DVector<f64>) {
    (z[0], z.rows(1, z.len() - 1).into_owned())
}

/// `||F_B(s, y)||`.
pub fn residual(q: &QuotientSystem, z: &DVector<f64>) -> Result<f64, ContinuationError> {
    let (s, y) = split(z);
    Ok(q.eval(s, &y)?.norm())
}

/// Newton's method on `F_B(s, y) = 0` together with the hyperplane constraint.
pub fn newton_correct(
    q: &QuotientSystem,
    guess: &DVector<f64>,
    plane: &Hyperplane,
    settings: &ContinuationSettings,
) -> Result<DVector<f64>, ContinuationError> {
    let dim = q.d() + 1;
    let mut z = guess.clone();
    let mut first_residual = None;
    let mut last_update = f64::INFINITY;
    let mut res = f64::INFINITY;
    for it in 0..=settings.max_newton_iter {
        let (s, y) = split(&z);
        let f = match q.eval(s, &y) {
            Ok(f) => f,
            Err(NetworkError::NonFinite) => {
                return Err(ContinuationError::NoConvergence { residual: f64::INFINITY, iterations: it })
            }
            Err(e) => return Err(e.into()),
        };
        let c = plane.normal.dot(&(&z - &plane.anchor));
        res = f.norm().max(c.abs());
        let res0 = *first_residual.get_or_insert(res);
        let on_branch = f.norm() <= settings.tol_newton * (1.0 + y.norm()) && c.abs() <= settings.tol_newton;
        if on_branch && (last_update <= 1e-12 * (1.0 + z.norm()) || it == settings.max_newton_iter) {
            return Ok(z);
        }
        if it == settings.max_newton_iter || res > 1e4 * res0.max(settings.tol_newton) {
            break;
        }
        let mut a = DMatrix::zeros(dim, dim);
        a.view_mut((0, 0), (dim - 1, 1)).copy_from(&q.jac_s(s, &y));
        a.view_mut((0, 1), (dim - 1, dim - 1)).copy_from(&q.jac_x(s, &y));
        a.row_mut(dim - 1).copy_from(&plane.normal.transpose());
        let mut rhs = DVector::zeros(dim);
        rhs.rows_mut(0, dim - 1).copy_from(&(-f));
        rhs[dim - 1] = -c;
        let dz = a.lu().solve(&rhs).ok_or(ContinuationError::SingularJacobian)?;
        if dz.iter().any(|v| !v.is_finite()) {
            return Err(ContinuationError::SingularJacobian);
        }
        last_update = dz.norm();
        z += dz;
    }
    Err(ContinuationError::NoConvergence { residual: res, iterations: settings.max_newton_iter })
}

/// Unit null vector of `[jac_s | jac_x]`, oriented along `prev` when given and
/// otherwise with non-negative `s` component.
pub fn compute_tangent(
    q: &QuotientSystem,
    z: &DVector<f64>,
    prev: Option<&DVector<f64>>,
) -> Result<DVector<f64>, ContinuationError> {
    let d = q.d();
    let mut t = if d == 0 {
        DVector::from_element(1, 1.0)
    } else {
        let (s, y) = split(z);
        let mut a = DMatrix::zeros(d + 1, d + 1);
        a.view_mut((0, 0), (d, 1)).copy_from(&q.jac_s(s, &y));
        a.view_mut((0, 1), (d, d)).copy_from(&q.jac_x(s, &y));
        let svd = a.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let sv = &svd.singular_values;
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
        let scale = sv.max().max(1.0);
        if sv[order[1]] <= 1e-8 * scale {
            return Err(ContinuationError::RankDeficient);
        }
        v_t.row(order[0]).transpose()
    };
    let flip = match prev {
        Some(p) => t.dot(p) < 0.0,
        None => t[0] < 0.0,
    };
    if flip {
        t = -t;
    }
    Ok(t.normalize())
}

/// Verdict of a [`StepMonitor`] on a candidate step.
#[derive(Debug, Clone)]
pub enum Verdict {
    Accept,
    /// Retry with half the step.
    Refine,
    /// Stop the branch, optionally appending a final point.
    Stop(Termination, Option<BranchPoint>),
}

/// Hook run on every candidate point before it is accepted.
pub trait StepMonitor {
    fn start(&mut self, _q: &QuotientSystem, _first: &mut BranchPoint) {}

    fn inspect(&mut self, q: &QuotientSystem, prev: &BranchPoint, next: &mut BranchPoint, step: f64) -> Verdict;
}

/// Accepts everything.
pub struct NoMonitor;

impl StepMonitor for NoMonitor {
    fn inspect(&mut self, _: &QuotientSystem, _: &BranchPoint, _: &mut BranchPoint, _: f64) -> Verdict {
        Verdict::Accept
    }
}

#[derive(Debug, Clone)]
pub struct FollowResult {
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
}

fn distance_to_segment(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Follows the branch through `start` in direction `dir` until a termination condition.
pub fn follow_branch(
    q: &QuotientSystem,
    start: &DVector<f64>,
    dir: &DVector<f64>,
    window: Window,
    settings: &ContinuationSettings,
    monitor: &mut dyn StepMonitor,
) -> Result<FollowResult, ContinuationError> {
    let r0 = residual(q, start)?;
    let (_, y0) = split(start);
    if r0 > 10.0 * settings.tol_newton * (1.0 + y0.norm()) {
        return Err(ContinuationError::StartInvalid { residual: r0 });
    }
    let t0 = compute_tangent(q, start, Some(dir))?;
    let mut first = BranchPoint::new(q, start, t0);
    monitor.start(q, &mut first);
    let mut points = vec![first];
    let mut step = settings.step_init;
    let mut successes = 0;
    let mut arclength = 0.0;

    let termination = loop {
        if points.len() > settings.max_steps {
            break Termination::MaxSteps;
        }
        let prev = points.last().expect("branch has a start point");
        let zp = prev.z();
        let pred = &zp + &prev.tangent * step;
        let plane = Hyperplane { normal: prev.tangent.clone(), anchor: pred.clone() };
        let corrected = newton_correct(q, &pred, &plane, settings)
            .ok()
            .filter(|z| (z - &pred).norm() <= step.max(10.0 * settings.tol_newton));
        let Some(mut z) = corrected else {
            step *= 0.5;
            successes = 0;
            if step < settings.step_min {
                break Termination::NewtonFailure;
            }
            continue;
        };
        let mut exits = false;
        if !window.contains(z[0]) {
            let bound = if z[0] < window.s_min { window.s_min } else { window.s_max };
            let frac = ((bound - zp[0]) / (z[0] - zp[0])).clamp(0.0, 1.0);
            let guess = &zp + (&z - &zp) * frac;
            match newton_correct(q, &guess, &Hyperplane::fixed_s(z.len(), bound), settings) {
                Ok(b) => z = b,
                Err(_) => break Termination::WindowExit,
            }
            exits = true;
        }
        let t = match compute_tangent(q, &z, Some(&prev.tangent)) {
            Ok(t) if t.dot(&prev.tangent) >= 0.8 || step <= 2.0 * settings.step_min => t,
            _ => {
                step *= 0.5;
                successes = 0;
                if step < settings.step_min {
                    break Termination::NewtonFailure;
                }
                continue;
            }
        };
        let mut next = BranchPoint::new(q, &z, t);
        if next.y.norm() > settings.norm_max {
            break Termination::WindowExit;
        }
        match monitor.inspect(q, prev, &mut next, step) {
            Verdict::Accept => {}
            Verdict::Refine => {
                step *= 0.5;
                successes = 0;
                continue;
            }
            Verdict::Stop(term, last) => {
                if let Some(p) = last {
                    points.push(p);
                }
                break term;
            }
        }
        let seg = (&z - &zp).norm();
        arclength += seg;
        let closes = points.len() > 3
            && arclength > 10.0 * settings.step_init
            && next.tangent.dot(&points[0].tangent) > 0.0
            && distance_to_segment(&points[0].z(), &zp, &z) <= settings.merge_tol.max(0.05 * seg);
        points.push(next);
        if exits {
            break Termination::WindowExit;
        }
        if closes {
            break Termination::ClosedLoop;
        }
        successes += 1;
        if successes >= 3 {
            step = (step * 1.3).min(settings.step_max);
            successes = 0;
        }
    };
    Ok(FollowResult { points, termination })
}
