use std::collections::VecDeque;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::classify::{critical_directions, SiteFinding};
use super::refine::{refine_crossing, RefineSettings};
use super::{candidates_of, detect_crossings, signature, BifurcationError, BifurcationEvent, CrossingKind, Restrictions};
use crate::continuation::{
    compute_tangent, follow_branch, newton_correct, stack, BranchPoint, ContinuationSettings, Hyperplane, StepMonitor,
    Termination, Verdict, Window,
};
use crate::network::{NetworkSystem, QuotientSystem};
use crate::polydiag::SubspaceLattice;
use crate::symmetry::{act, SymmetryGroup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreSettings {
    pub window: Window,
    pub continuation: ContinuationSettings,
    pub refine: RefineSettings,
    /// Membership tolerance for starting points.
    pub tol_mem: f64,
    /// Singular values below this count as kernel.
    pub gap_tol: f64,
    /// Tolerance for deciding which subspaces contain a critical vector.
    pub critical_tol: f64,
    /// Offset of daughter seeds from the bifurcation point.
    pub delta_spawn: f64,
    /// Distance under which two bifurcation points are the same.
    pub seed_tol: f64,
    /// Cosine above which two one-sided branch directions are the same.
    pub direction_cos: f64,
    /// Smallest step that is still halved to separate crossings.
    pub min_refine_step: f64,
    pub max_branches: usize,
}

impl Default for ExploreSettings {
    fn default() -> Self {
        Self {
            window: Window { s_min: -3.0, s_max: 5.0 },
            continuation: ContinuationSettings::default(),
            refine: RefineSettings::default(),
            tol_mem: 1e-8,
            gap_tol: 1e-6,
            critical_tol: 1e-6,
            delta_spawn: 1e-3,
            seed_tol: 1e-7,
            direction_cos: 0.9,
            min_refine_step: 1e-4,
            max_branches: 512,
        }
    }
}

/// User-supplied starting solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartPoint {
    pub s: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchOrigin {
    Start,
    Event { event: String, sign: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoteKind {
    Fold,
    Hopf,
    MultiDimKernelUnresolved,
    NoKernel,
    RefinementFailed,
    EigenFailure,
    SuspectedDegenerate,
    DuplicateEvent,
    Arrival,
    SeedCovered,
    FollowFailed,
}

/// Something the explorer observed but did not turn into an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub kind: NoteKind,
    pub branch: String,
    pub subspace: String,
    pub s: f64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub id: String,
    pub subspace: String,
    /// Orbit class of the subspace in the lattice.
    pub orbit: usize,
    pub origin: BranchOrigin,
    pub termination: Termination,
    /// Candidate subspace ids, aligned with each point's signature list.
    pub signature_ids: Vec<String>,
    pub points: Vec<BranchPoint>,
}

#[derive(Debug, Clone, Default)]
pub struct BranchForest {
    pub branches: Vec<Branch>,
    pub events: Vec<BifurcationEvent>,
    pub notes: Vec<Note>,
}

// One-sided direction of a branch leaving a bifurcation point, in (s, x) space.
struct SiteDir {
    dir: DVector<f64>,
    event: bool,
    covered: bool,
}

struct Site {
    s: f64,
    x: DVector<f64>,
    dirs: Vec<SiteDir>,
}

#[derive(Default)]
struct Registry {
    sites: Vec<Site>,
}

impl Registry {
    fn g_dir(p: &[usize], sign: i8, d: &DVector<f64>) -> DVector<f64> {
        let dx = d.rows(1, d.len() - 1).into_owned();
        stack(d[0], &act(p, sign, &dx))
    }

    fn match_dir(&self, group: &SymmetryGroup, s: f64, x: &DVector<f64>, dir: &DVector<f64>, tol: f64, cos: f64) -> Option<(usize, usize)> {
        for (si, site) in self.sites.iter().enumerate() {
            if (site.s - s).abs() > tol * (1.0 + s.abs()) {
                continue;
            }
            for (p, sign) in group.elements() {
                if (act(p, sign, &site.x) - x).norm() > tol * (1.0 + x.norm()) {
                    continue;
                }
                for (di, d) in site.dirs.iter().enumerate() {
                    if Self::g_dir(p, sign, &d.dir).dot(dir) >= cos {
                        return Some((si, di));
                    }
                }
            }
        }
        None
    }

    fn site_at(&mut self, s: f64, x: &DVector<f64>, tol: f64) -> usize {
        if let Some(i) = self
            .sites
            .iter()
            .position(|site| (site.s - s).abs() <= tol * (1.0 + s.abs()) && (&site.x - x).norm() <= tol * (1.0 + x.norm()))
        {
            return i;
        }
        self.sites.push(Site { s, x: x.clone(), dirs: Vec::new() });
        self.sites.len() - 1
    }

    fn add_dir(&mut self, site: usize, dir: DVector<f64>, event: bool) -> usize {
        self.sites[site].dirs.push(SiteDir { dir, event, covered: false });
        self.sites[site].dirs.len() - 1
    }
}

struct Seed {
    subspace: usize,
    site_point: BranchPoint,
    z: DVector<f64>,
    tangent: DVector<f64>,
    origin: BranchOrigin,
    event: Option<usize>,
    slot: Option<(usize, usize)>,
}

struct Ctx<'a> {
    lattice: &'a SubspaceLattice,
    group: &'a SymmetryGroup,
    restrictions: Restrictions,
    settings: &'a ExploreSettings,
    odd: bool,
}

#[derive(Default)]
struct State {
    registry: Registry,
    events: Vec<BifurcationEvent>,
    notes: Vec<Note>,
    queue: VecDeque<Seed>,
}

struct Spawned {
    z: DVector<f64>,
    tangent: DVector<f64>,
    dir: DVector<f64>,
    sign: i8,
}

fn unit(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

impl Ctx<'_> {
    fn note(&self, state: &mut State, kind: NoteKind, branch: &str, subspace: usize, s: f64, message: String) {
        state.notes.push(Note { kind, branch: branch.to_string(), subspace: self.lattice.get(subspace).id.clone(), s, message });
    }

    // Starts a daughter branch at (s*, x*) offset by `delta x0`.
    fn spawn(&self, mother: usize, daughter: usize, s: f64, x: &DVector<f64>, x0: &DVector<f64>, sign: i8) -> Option<Spawned> {
        let q = self.restrictions.get(daughter)?;
        let w = q.subspace();
        let delta = self.settings.delta_spawn;
        let y_star = w.project_unchecked(x);
        let y_hat = unit(w.project_unchecked(x0)) * sign as f64;
        let guess = stack(s, &(&y_star + &y_hat * delta));
        let plane = Hyperplane { normal: stack(0.0, &y_hat), anchor: guess.clone() };
        let z = newton_correct(q, &guess, &plane, &self.settings.continuation).ok()?;
        let x1 = q.lift(&z.rows(1, z.len() - 1).into_owned());
        if self.lattice.get(mother).membership_residual(&x1) < 0.01 * delta {
            return None;
        }
        let away = &z - stack(s, &y_star);
        let tangent = compute_tangent(q, &z, Some(&away)).unwrap_or_else(|_| unit(away.clone()));
        let dir = unit(stack(z[0] - s, &(&x1 - x)));
        Some(Spawned { z, tangent, dir, sign })
    }

    fn site_point(&self, q: &QuotientSystem, candidates: &[usize], s: f64, x: &DVector<f64>, tangent: DVector<f64>) -> BranchPoint {
        let z = stack(s, &q.subspace().project_unchecked(x));
        let mut p = BranchPoint::new(q, &z, tangent);
        p.signatures = signature(&self.restrictions, candidates, s, x).unwrap_or_default();
        p
    }

    // Classifies a crossing site that does not involve the mother's own
    // spectrum and queues the daughters of every new event.
    #[allow(clippy::too_many_arguments)]
    fn handle_event_site(
        &self,
        state: &mut State,
        branch: &str,
        mother: usize,
        candidates: &[usize],
        site: &[usize],
        s: f64,
        x: &DVector<f64>,
    ) {
        let set = self.settings;
        let (dirs, findings) =
            critical_directions(&self.restrictions, self.lattice, mother, site, candidates, s, x, set.gap_tol, set.critical_tol);
        for f in findings {
            match f {
                SiteFinding::Hopf { subspace, omega } => {
                    self.note(state, NoteKind::Hopf, branch, subspace, s, format!("imaginary-axis crossing, omega = {omega:.6e}"))
                }
                SiteFinding::Unresolved { subspace, kernel_dim } => self.note(
                    state,
                    NoteKind::MultiDimKernelUnresolved,
                    branch,
                    subspace,
                    s,
                    format!("kernel of dimension {kernel_dim} not resolved by smaller subspaces"),
                ),
                SiteFinding::NoKernel { .. } => {}
            }
        }
        for cd in dirs {
            let spawned: Vec<Spawned> =
                [1i8, -1].iter().filter_map(|&sg| self.spawn(mother, cd.daughter, s, x, &cd.x0, sg)).collect();
            let degenerate = spawned.len() < 2;
            let site_idx = state.registry.site_at(s, x, set.seed_tol);
            let mut fresh: Vec<Spawned> = Vec::new();
            let mut duplicates = 0;
            for sp in spawned {
                let hit = state.registry.match_dir(self.group, s, x, &sp.dir, set.seed_tol, set.direction_cos);
                let fresh_hit = hit.is_none()
                    && fresh.iter().all(|f| {
                        !self.group.elements().any(|(p, sign)| {
                            (act(p, sign, x) - x).norm() <= set.seed_tol * (1.0 + x.norm())
                                && Registry::g_dir(p, sign, &f.dir).dot(&sp.dir) >= set.direction_cos
                        })
                    });
                match hit {
                    Some((si, di)) if state.registry.sites[si].dirs[di].event => duplicates += 1,
                    Some(_) => {}
                    None if fresh_hit => fresh.push(sp),
                    None => {}
                }
            }
            if duplicates > 0 && fresh.is_empty() {
                self.note(state, NoteKind::DuplicateEvent, branch, cd.daughter, s, "equivalent to a known event".into());
                continue;
            }
            let id = format!("E{}", state.events.len());
            let q_d = self.restrictions.get(cd.daughter).expect("daughter has a restriction");
            let cands_d = candidates_of(self.lattice, cd.daughter, self.odd);
            let event_idx = state.events.len();
            state.events.push(BifurcationEvent {
                id: id.clone(),
                s_star: s,
                x_star: x.iter().copied().collect(),
                mother: self.lattice.get(mother).id.clone(),
                mother_branch: branch.to_string(),
                critical_vector: cd.x0.iter().copied().collect(),
                daughter: self.lattice.get(cd.daughter).id.clone(),
                crossing_kind: CrossingKind::Blis,
                spawn_dirs: fresh.iter().map(|f| (&cd.x0 * f.sign as f64).iter().copied().collect()).collect(),
                daughter_branches: Vec::new(),
                cond_b_checked: false,
                suspected_degenerate: degenerate,
            });
            if degenerate {
                self.note(state, NoteKind::SuspectedDegenerate, branch, cd.daughter, s, format!("{id}: a daughter seed fell back to the mother"));
            }
            for sp in fresh {
                let dir_idx = state.registry.add_dir(site_idx, sp.dir.clone(), true);
                let y_star = stack(s, &q_d.subspace().project_unchecked(x));
                let site_point = self.site_point(q_d, &cands_d, s, x, unit(&sp.z - y_star));
                state.queue.push_back(Seed {
                    subspace: cd.daughter,
                    site_point,
                    z: sp.z,
                    tangent: sp.tangent,
                    origin: BranchOrigin::Event { event: id.clone(), sign: sp.sign },
                    event: Some(event_idx),
                    slot: Some((site_idx, dir_idx)),
                });
            }
        }
    }
}

struct BranchMonitor<'c, 's> {
    ctx: &'c Ctx<'c>,
    state: &'s mut State,
    branch: String,
    mother: usize,
    candidates: Vec<usize>,
    origin: Option<DVector<f64>>,
}

impl BranchMonitor<'_, '_> {
    fn near_origin(&self, s: f64, x: &DVector<f64>) -> bool {
        self.origin.as_ref().is_some_and(|o| (o - stack(s, x)).norm() <= 10.0 * self.ctx.settings.delta_spawn)
    }

    // The branch meets a bifurcation point of its own subspace.
    fn arrival(&mut self, q: &QuotientSystem, z: &DVector<f64>, prev: &BranchPoint, next: &BranchPoint) -> Option<Verdict> {
        let set = self.ctx.settings;
        let s = z[0];
        let x = q.lift(&z.rows(1, z.len() - 1).into_owned());
        let incoming = unit(stack(prev.s - s, &(&prev.x - &x)));
        let outgoing = unit(stack(next.s - s, &(&next.x - &x)));
        let reg = &mut self.state.registry;
        if let Some((si, di)) = reg.match_dir(self.ctx.group, s, &x, &incoming, set.seed_tol, set.direction_cos) {
            if reg.sites[si].dirs[di].event {
                reg.sites[si].dirs[di].covered = true;
            }
        }
        let out_hit = reg.match_dir(self.ctx.group, s, &x, &outgoing, set.seed_tol, set.direction_cos);
        if let Some((si, di)) = out_hit {
            if reg.sites[si].dirs[di].event {
                self.ctx.note(self.state, NoteKind::Arrival, &self.branch, self.mother, s, "reached a known bifurcation point".into());
                let mut p = BranchPoint::new(q, z, prev.tangent.clone());
                p.signatures = signature(&self.ctx.restrictions, &self.candidates, s, &x).unwrap_or_else(|_| prev.signatures.clone());
                return Some(Verdict::Stop(Termination::HitKnownEvent, Some(p)));
            }
        }
        let site = reg.site_at(s, &x, set.seed_tol);
        reg.add_dir(site, incoming, false);
        reg.add_dir(site, outgoing, false);
        self.ctx.note(self.state, NoteKind::Arrival, &self.branch, self.mother, s, "passed a branch point of its own subspace".into());
        None
    }
}

impl StepMonitor for BranchMonitor<'_, '_> {
    fn start(&mut self, _q: &QuotientSystem, first: &mut BranchPoint) {
        first.signatures = signature(&self.ctx.restrictions, &self.candidates, first.s, &first.x).unwrap_or_default();
    }

    fn inspect(&mut self, q: &QuotientSystem, prev: &BranchPoint, next: &mut BranchPoint, step: f64) -> Verdict {
        let set = self.ctx.settings;
        next.signatures = match signature(&self.ctx.restrictions, &self.candidates, next.s, &next.x) {
            Ok(sig) => sig,
            Err(e) => {
                self.ctx.note(self.state, NoteKind::EigenFailure, &self.branch, self.mother, next.s, e.to_string());
                prev.signatures.clone()
            }
        };
        if prev.signatures.len() != next.signatures.len() {
            return Verdict::Accept;
        }
        let deltas = detect_crossings(&prev.signatures, &next.signatures);
        if deltas.is_empty() {
            return Verdict::Accept;
        }
        if deltas.iter().any(|&(_, d)| d.abs() >= 2) && 0.5 * step >= set.min_refine_step {
            return Verdict::Refine;
        }
        let mut refined: Vec<(usize, f64, DVector<f64>)> = Vec::new();
        for &(pos, _) in &deltas {
            let w = self.candidates[pos];
            let Some(q_w) = self.ctx.restrictions.get(w) else { continue };
            let index = prev.signatures[pos].min(next.signatures[pos]);
            match refine_crossing(q, q_w, prev, next, index, &set.continuation, &set.refine) {
                Ok(r) => refined.push((w, r.t, r.z)),
                Err(e) => self.ctx.note(self.state, NoteKind::RefinementFailed, &self.branch, w, prev.s, e.to_string()),
            }
        }
        refined.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut sites: Vec<(Vec<usize>, DVector<f64>)> = Vec::new();
        for (w, _, z) in refined {
            match sites.iter_mut().find(|(_, zs)| (zs.clone() - &z).norm() <= 1e-6 * (1.0 + z.norm())) {
                Some(site) => site.0.push(w),
                None => sites.push((vec![w], z)),
            }
        }
        for (ws, z) in sites {
            let s = z[0];
            let x = q.lift(&z.rows(1, z.len() - 1).into_owned());
            if self.near_origin(s, &x) {
                continue;
            }
            if ws.contains(&self.mother) {
                if prev.tangent[0] * next.tangent[0] < 0.0 {
                    self.ctx.note(self.state, NoteKind::Fold, &self.branch, self.mother, s, "fold point traversed".into());
                    continue;
                }
                if let Some(v) = self.arrival(q, &z, prev, next) {
                    return v;
                }
                continue;
            }
            self.ctx.handle_event_site(self.state, &self.branch, self.mother, &self.candidates, &ws, s, &x);
        }
        Verdict::Accept
    }
}

/// Explores the branch tree reachable from the starting solution.
///
/// Without `start`, the trivial branch is followed from `s_min` upward, which
/// requires `f(s, 0) = 0`. Daughters are processed breadth first.
pub fn explore(
    sys: &NetworkSystem,
    lattice: &SubspaceLattice,
    group: &SymmetryGroup,
    settings: &ExploreSettings,
    start: Option<&StartPoint>,
) -> Result<BranchForest, BifurcationError> {
    let odd = sys.dynamics().is_odd();
    let ctx = Ctx { lattice, group, restrictions: Restrictions::new(sys, lattice), settings, odd };
    let mut state = State::default();
    let window = settings.window;

    match start {
        Some(st) => {
            if st.x.len() != sys.n() {
                return Err(BifurcationError::BadStart(format!("expected {} components, found {}", sys.n(), st.x.len())));
            }
            if !window.contains(st.s) {
                return Err(BifurcationError::BadStart(format!("s = {} is outside the window", st.s)));
            }
            let x = DVector::from_column_slice(&st.x);
            let mut order: Vec<usize> = (0..lattice.len()).collect();
            order.sort_by_key(|&w| (lattice.get(w).dim(), w));
            let home = order
                .into_iter()
                .find(|&w| {
                    ctx.restrictions.get(w).is_some()
                        && lattice.get(w).membership_residual(&x) <= settings.tol_mem * (1.0 + x.norm())
                })
                .ok_or_else(|| BifurcationError::BadStart("no invariant subspace in the lattice contains it".into()))?;
            let q = ctx.restrictions.get(home).expect("home has a restriction");
            let guess = stack(st.s, &q.subspace().project_unchecked(&x));
            let z = newton_correct(q, &guess, &Hyperplane::fixed_s(guess.len(), st.s), &settings.continuation)
                .map_err(|e| BifurcationError::BadStart(e.to_string()))?;
            let t = compute_tangent(q, &z, None)?;
            let cands = candidates_of(lattice, home, odd);
            for dir in [t.clone(), -t] {
                let site_point = ctx.site_point(q, &cands, z[0], &q.lift(&z.rows(1, z.len() - 1).into_owned()), dir.clone());
                state.queue.push_back(Seed {
                    subspace: home,
                    site_point,
                    z: z.clone(),
                    tangent: dir,
                    origin: BranchOrigin::Start,
                    event: None,
                    slot: None,
                });
            }
        }
        None => {
            let trivial = lattice.trivial_index().filter(|_| sys.dynamics().vanishes_at_zero()).ok_or(BifurcationError::MissingStart)?;
            let q = ctx.restrictions.get(trivial).ok_or(BifurcationError::MissingStart)?;
            let z = DVector::from_element(1, window.s_min);
            let cands = candidates_of(lattice, trivial, odd);
            let site_point = ctx.site_point(q, &cands, window.s_min, &DVector::zeros(sys.n()), z.map(|_| 1.0));
            state.queue.push_back(Seed {
                subspace: trivial,
                site_point,
                z,
                tangent: DVector::from_element(1, 1.0),
                origin: BranchOrigin::Start,
                event: None,
                slot: None,
            });
        }
    }

    let mut branches: Vec<Branch> = Vec::new();
    while let Some(seed) = state.queue.pop_front() {
        if let Some((si, di)) = seed.slot {
            if state.registry.sites[si].dirs[di].covered {
                let s = seed.site_point.s;
                ctx.note(&mut state, NoteKind::SeedCovered, "", seed.subspace, s, "daughter already traced by another branch".into());
                continue;
            }
        }
        if branches.len() >= settings.max_branches {
            return Err(BifurcationError::QueueOverflow(settings.max_branches));
        }
        let id = format!("B{}", branches.len());
        let q = ctx.restrictions.get(seed.subspace).expect("seed subspace has a restriction");
        let candidates = candidates_of(lattice, seed.subspace, odd);
        let from_event = seed.event.is_some();
        let origin_point = from_event.then(|| stack(seed.site_point.s, &seed.site_point.x));
        let mut monitor = BranchMonitor {
            ctx: &ctx,
            state: &mut state,
            branch: id.clone(),
            mother: seed.subspace,
            candidates: candidates.clone(),
            origin: origin_point,
        };
        let result = follow_branch(q, &seed.z, &seed.tangent, window, &settings.continuation, &mut monitor);
        let followed = match result {
            Ok(r) => r,
            Err(e) => {
                ctx.note(&mut state, NoteKind::FollowFailed, &id, seed.subspace, seed.site_point.s, e.to_string());
                if let Some(ev) = seed.event {
                    state.events[ev].suspected_degenerate = true;
                }
                continue;
            }
        };
        let mut points = Vec::with_capacity(followed.points.len() + 1);
        if from_event {
            points.push(seed.site_point);
        }
        points.extend(followed.points);
        if let Some(ev) = seed.event {
            state.events[ev].daughter_branches.push(id.clone());
        }
        branches.push(Branch {
            id,
            subspace: lattice.get(seed.subspace).id.clone(),
            orbit: lattice.orbit_of(seed.subspace),
            origin: seed.origin,
            termination: followed.termination,
            signature_ids: candidates.iter().map(|&w| lattice.get(w).id.clone()).collect(),
            points,
        });
    }
    Ok(BranchForest { branches, events: state.events, notes: state.notes })
}
