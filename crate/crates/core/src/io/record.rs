use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{IoError, RunConfig};
use crate::bifurcation::{restricted_jacobian, BifurcationEvent, BranchForest, BranchOrigin, ExploreSettings, Note};
use crate::continuation::Termination;
use crate::network::{InternalDynamics, NetworkSystem};
use crate::polydiag::{PolyBasisMatrix, Subspace, SubspaceKind, SubspaceLattice};
use crate::rational::{format_rational, parse_rational, RatMatrix};
use crate::symmetry::SymmetryGroup;

pub const FORMAT_NAME: &str = "netbif-forest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub n: usize,
    /// Exact entries as `p` or `p/q`.
    pub matrix: Vec<Vec<String>>,
    pub h: f64,
    pub dynamics: InternalDynamics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceRecord {
    pub id: String,
    pub kind: SubspaceKind,
    pub dim: usize,
    /// Rows of the basis matrix; empty for the trivial subspace.
    pub basis: Vec<Vec<i8>>,
    pub orbit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub s: f64,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub tangent: Vec<f64>,
    pub signatures: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub id: String,
    pub subspace: String,
    pub orbit: usize,
    pub origin: BranchOrigin,
    pub termination: Termination,
    pub signature_ids: Vec<String>,
    pub points: Vec<PointRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub representative: String,
    pub members: Vec<String>,
    pub branches: Vec<String>,
}

/// Complete, self-contained record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestRecord {
    pub format: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    pub system: SystemRecord,
    pub subspaces: Vec<SubspaceRecord>,
    /// 1-based one-line permutations.
    pub automorphisms: Vec<Vec<usize>>,
    pub sign_flip: bool,
    pub settings: ExploreSettings,
    pub functional: Vec<f64>,
    pub branches: Vec<BranchRecord>,
    pub events: Vec<BifurcationEvent>,
    pub notes: Vec<Note>,
    pub orbits: Vec<OrbitRecord>,
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

impl ForestRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        config: Option<&RunConfig>,
        system: &NetworkSystem,
        lattice: &SubspaceLattice,
        group: &SymmetryGroup,
        settings: &ExploreSettings,
        functional: &[f64],
        forest: &BranchForest,
    ) -> Self {
        let m = system.matrix();
        let matrix = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| format_rational(m.get(i, j))).collect()).collect();
        let subspaces = lattice
            .subspaces()
            .iter()
            .enumerate()
            .map(|(k, w)| SubspaceRecord {
                id: w.id.clone(),
                kind: w.kind(),
                dim: w.dim(),
                basis: w.basis().map_or_else(Vec::new, |b| (0..b.n()).map(|i| (0..b.d()).map(|l| b.entry(i, l)).collect()).collect()),
                orbit: lattice.orbit_of(k),
            })
            .collect();
        let branches = forest
            .branches
            .iter()
            .map(|b| BranchRecord {
                id: b.id.clone(),
                subspace: b.subspace.clone(),
                orbit: b.orbit,
                origin: b.origin.clone(),
                termination: b.termination,
                signature_ids: b.signature_ids.clone(),
                points: b
                    .points
                    .iter()
                    .map(|p| PointRecord { s: p.s, y: vec_of(&p.y), x: vec_of(&p.x), tangent: vec_of(&p.tangent), signatures: p.signatures.clone() })
                    .collect(),
            })
            .collect();
        let orbits = lattice
            .orbits()
            .iter()
            .enumerate()
            .map(|(k, members)| OrbitRecord {
                representative: lattice.get(members[0]).id.clone(),
                members: members.iter().map(|&w| lattice.get(w).id.clone()).collect(),
                branches: forest.branches.iter().filter(|b| b.orbit == k).map(|b| b.id.clone()).collect(),
            })
            .collect();
        let config = config.map(|c| RunConfig { base_dir: Default::default(), ..c.clone() });
        Self {
            format: FORMAT_NAME.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            system: SystemRecord { n: system.n(), matrix, h: system.coupling(), dynamics: system.dynamics().clone() },
            subspaces,
            automorphisms: group.permutations().iter().map(|p| p.iter().map(|v| v + 1).collect()).collect(),
            sign_flip: group.has_sign_flip(),
            settings: settings.clone(),
            functional: functional.to_vec(),
            branches,
            events: forest.events.clone(),
            notes: forest.notes.clone(),
            orbits,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let r: ForestRecord = serde_json::from_str(text).map_err(|e| IoError::Record(e.to_string()))?;
        if r.format != FORMAT_NAME {
            return Err(IoError::Record(format!("unexpected format '{}'", r.format)));
        }
        Ok(r)
    }

    pub fn system(&self) -> Result<NetworkSystem, IoError> {
        let n = self.system.n;
        if self.system.matrix.len() != n || self.system.matrix.iter().any(|r| r.len() != n) {
            return Err(IoError::Record("matrix shape does not match n".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for v in self.system.matrix.iter().flatten() {
            data.push(parse_rational(v).ok_or_else(|| IoError::Record(format!("bad matrix entry '{v}'")))?);
        }
        NetworkSystem::new(RatMatrix::from_row_major(n, n, data), self.system.h, self.system.dynamics.clone())
            .map_err(|e| IoError::Record(e.to_string()))
    }

    pub fn subspace(&self, id: &str) -> Result<Subspace, IoError> {
        let r = self.subspaces.iter().find(|s| s.id == id).ok_or_else(|| IoError::Record(format!("unknown subspace {id}")))?;
        if r.dim == 0 {
            return Ok(Subspace::trivial(r.id.clone(), self.system.n));
        }
        let rows: Vec<Vec<i64>> = r.basis.iter().map(|row| row.iter().map(|&v| v as i64).collect()).collect();
        let b = PolyBasisMatrix::from_rows(&rows).map_err(|e| IoError::Record(format!("subspace {id}: {e}")))?;
        Ok(Subspace::from_basis(r.id.clone(), b))
    }
}

/// Outcome of re-checking a saved record.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub points_checked: usize,
    pub events_checked: usize,
    /// Largest `||F(s, x)|| / (1 + ||x||)` over all stored points and events.
    pub max_residual: f64,
    pub violations: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

const RESIDUAL_BOUND: f64 = 1e-8;

/// Re-evaluates every stored point and event against the stored system.
pub fn verify_record(record: &ForestRecord) -> Result<VerifyReport, IoError> {
    let sys = record.system()?;
    let mut report = VerifyReport { points_checked: 0, events_checked: 0, max_residual: 0.0, violations: Vec::new() };
    let residual = |s: f64, x: &DVector<f64>| -> f64 {
        sys.eval(s, x).map_or(f64::INFINITY, |f| f.norm() / (1.0 + x.norm()))
    };
    for b in &record.branches {
        let w = record.subspace(&b.subspace)?;
        for (k, p) in b.points.iter().enumerate() {
            report.points_checked += 1;
            if p.x.len() != sys.n() || p.y.len() != w.dim() {
                report.violations.push(format!("{} point {k}: wrong vector length", b.id));
                continue;
            }
            let x = DVector::from_column_slice(&p.x);
            let r = residual(p.s, &x);
            report.max_residual = report.max_residual.max(r);
            if r > RESIDUAL_BOUND {
                report.violations.push(format!("{} point {k}: residual {r:e}", b.id));
            }
            if (w.lift(&DVector::from_column_slice(&p.y)) - &x).norm() > RESIDUAL_BOUND * (1.0 + x.norm()) {
                report.violations.push(format!("{} point {k}: x is not the lift of y", b.id));
            }
            if (DVector::from_column_slice(&p.tangent).norm() - 1.0).abs() > 1e-8 {
                report.violations.push(format!("{} point {k}: tangent is not a unit vector", b.id));
            }
            if p.signatures.len() != b.signature_ids.len() {
                report.violations.push(format!("{} point {k}: signature list length", b.id));
            }
        }
    }
    for e in &record.events {
        report.events_checked += 1;
        let x = DVector::from_column_slice(&e.x_star);
        let x0 = DVector::from_column_slice(&e.critical_vector);
        if x.len() != sys.n() || x0.len() != sys.n() {
            report.violations.push(format!("{}: wrong vector length", e.id));
            continue;
        }
        let r = residual(e.s_star, &x);
        report.max_residual = report.max_residual.max(r);
        if r > RESIDUAL_BOUND {
            report.violations.push(format!("{}: residual {r:e}", e.id));
        }
        let mother = record.subspace(&e.mother)?;
        let daughter = record.subspace(&e.daughter)?;
        if (x0.norm() - 1.0).abs() > 1e-8 {
            report.violations.push(format!("{}: critical vector is not a unit vector", e.id));
        }
        if daughter.membership_residual(&x0) > 1e-6 {
            report.violations.push(format!("{}: critical vector is not in {}", e.id, e.daughter));
        }
        if mother.membership_residual(&x0) < 0.1 {
            report.violations.push(format!("{}: critical vector lies in the mother subspace", e.id));
        }
        if mother.membership_residual(&x) > 1e-8 * (1.0 + x.norm()) {
            report.violations.push(format!("{}: bifurcation point is not in {}", e.id, e.mother));
        }
        if let Ok(q) = sys.restrict(&daughter) {
            let j = restricted_jacobian(&q, e.s_star, &x);
            let smallest = j.singular_values().min();
            if smallest > 10.0 * record.settings.gap_tol {
                report.violations.push(format!("{}: restricted Jacobian is not singular (sigma_min {smallest:e})", e.id));
            }
        }
        if e.cond_b_checked {
            report.violations.push(format!("{}: cond_b_checked must be false", e.id));
        }
    }
    Ok(report)
}
