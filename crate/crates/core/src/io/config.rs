//! Run configuration, read from a `key = value` file with `[dynamics]` and
//! `[tolerances]` sections (TOML syntax). Paths are relative to the
//! configuration file.
//!
//! ```toml
//! matrix = "diamond.mat"
//! s_min = -3.0
//! s_max = 5.0
//!
//! [dynamics]
//! family = "cubic_soft"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::bifurcation::{ExploreSettings, StartPoint};
use crate::continuation::{ContinuationSettings, Window};
use crate::network::{InternalDynamics, MAX_S_DEGREE, MAX_X_DEGREE};
use crate::polydiag::DEFAULT_N_MAX;

fn default_h() -> f64 {
    -1.0
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_max_branches() -> usize {
    512
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// For `custom`: row `j` holds the coefficients of `s^j x^0, ..., s^j x^5`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Vec<f64>>>,
}

impl DynamicsConfig {
    pub fn build(&self) -> Result<InternalDynamics, IoError> {
        if self.family == "custom" {
            let rows = self.coefficients.as_ref().ok_or_else(|| IoError::Config("custom dynamics needs 'coefficients'".into()))?;
            if rows.len() > MAX_S_DEGREE + 1 || rows.iter().any(|r| r.len() > MAX_X_DEGREE + 1) {
                return Err(IoError::Config(format!(
                    "coefficients must be at most {} rows of at most {} entries",
                    MAX_S_DEGREE + 1,
                    MAX_X_DEGREE + 1
                )));
            }
            let mut c = [[0.0; MAX_X_DEGREE + 1]; MAX_S_DEGREE + 1];
            for (j, row) in rows.iter().enumerate() {
                c[j][..row.len()].copy_from_slice(row);
            }
            return InternalDynamics::custom(c).map_err(|e| IoError::Config(e.to_string()));
        }
        InternalDynamics::from_name(&self.family, self.alpha, self.beta).map_err(|e| IoError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tol_newton: f64,
    pub tol_mem: f64,
    pub gap_tol: f64,
    pub merge_tol: f64,
    pub delta_init: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_spawn: f64,
    pub seed_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = ContinuationSettings::default();
        let e = ExploreSettings::default();
        Self {
            tol_newton: c.tol_newton,
            tol_mem: e.tol_mem,
            gap_tol: e.gap_tol,
            merge_tol: c.merge_tol,
            delta_init: c.step_init,
            delta_min: c.step_min,
            delta_max: c.step_max,
            delta_spawn: e.delta_spawn,
            seed_tol: e.seed_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub matrix: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspaces: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automorphisms: Option<PathBuf>,
    #[serde(default = "default_h")]
    pub h: f64,
    pub s_min: f64,
    pub s_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_x: Option<Vec<f64>>,
    /// Coefficients `c` of the plotted functional `c · x`; defaults to the mean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<f64>>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_max_branches")]
    pub max_branches: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| IoError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = super::read_file(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            IoError::Config(m) => IoError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |m: String| Err(IoError::Config(m));
        if !(self.s_min.is_finite() && self.s_max.is_finite() && self.s_min < self.s_max) {
            return bad(format!("need s_min < s_max, got {} and {}", self.s_min, self.s_max));
        }
        if !self.h.is_finite() {
            return bad("h must be finite".into());
        }
        let t = &self.tolerances;
        let all = [
            ("tol_newton", t.tol_newton),
            ("tol_mem", t.tol_mem),
            ("gap_tol", t.gap_tol),
            ("merge_tol", t.merge_tol),
            ("delta_init", t.delta_init),
            ("delta_min", t.delta_min),
            ("delta_max", t.delta_max),
            ("delta_spawn", t.delta_spawn),
            ("seed_tol", t.seed_tol),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        if !(t.delta_min <= t.delta_init && t.delta_init <= t.delta_max) {
            return bad("need delta_min <= delta_init <= delta_max".into());
        }
        if self.start_s.is_some() != self.start_x.is_some() {
            return bad("start_s and start_x must be given together".into());
        }
        if self.max_branches == 0 {
            return bad("max_branches must be positive".into());
        }
        self.dynamics.build()?;
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn start(&self) -> Option<StartPoint> {
        Some(StartPoint { s: self.start_s?, x: self.start_x.clone()? })
    }

    pub fn explore_settings(&self) -> ExploreSettings {
        let t = &self.tolerances;
        let d = ExploreSettings::default();
        ExploreSettings {
            window: Window { s_min: self.s_min, s_max: self.s_max },
            continuation: ContinuationSettings {
                tol_newton: t.tol_newton,
                step_init: t.delta_init,
                step_min: t.delta_min,
                step_max: t.delta_max,
                merge_tol: t.merge_tol,
                ..ContinuationSettings::default()
            },
            tol_mem: t.tol_mem,
            gap_tol: t.gap_tol,
            delta_spawn: t.delta_spawn,
            seed_tol: t.seed_tol,
            max_branches: self.max_branches,
            ..d
        }
    }
}
