//! Run configuration (TOML).
//!
//! Every section is optional and filled from defaults; unknown keys are
//! rejected. `schema_version` must be 1.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::groundstate::SolveOptions;
use crate::landscape::CandidateOptions;
use crate::model::{validate_params, ModelError, PotentialTriple, ProblemParams, SearchBox};
use crate::newton::NewtonOptions;
use crate::perturb::{ReportThresholds, SweepOptions};
use crate::radial::{RadialError, RadialGrid};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config: unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("config: [problem] {0}")]
    Problem(#[source] ModelError),
    #[error("config: [potentials] {0}")]
    Potentials(#[source] ModelError),
    #[error("config: [grids] {0}")]
    Grid(#[source] RadialError),
    #[error("config: {section}: {msg}")]
    Invalid { section: &'static str, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub problem: ProblemSection,
    #[serde(default)]
    pub potentials: PotentialsSection,
    #[serde(default)]
    pub grids: GridsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub landscape: LandscapeSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "UPPERCASE")]
pub struct PotentialsSection {
    pub k: String,
    pub q: String,
    pub v: String,
}

impl Default for PotentialsSection {
    fn default() -> Self {
        Self {
            k: "1".into(),
            q: "1".into(),
            v: "1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsSection {
    /// Outer radius `R` of the radial grid; dimension default when absent.
    pub radius: Option<f64>,
    /// Radial node count `m`; dimension default when absent.
    pub nodes: Option<usize>,
    #[serde(default = "half_width")]
    pub half_width: f64,
    #[serde(default = "nodes_per_eps")]
    pub nodes_per_eps: f64,
}

fn half_width() -> f64 {
    8.0
}

impl Default for GridsSection {
    fn default() -> Self {
        Self {
            radius: None,
            nodes: None,
            half_width: half_width(),
            nodes_per_eps: nodes_per_eps(),
        }
    }
}

fn nodes_per_eps() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub min_step: f64,
    pub armijo: f64,
    pub continuation_steps_per_unit: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let n = NewtonOptions::default();
        Self {
            tol: n.tol,
            max_iter: n.max_iter,
            min_step: n.min_step,
            armijo: n.armijo,
            continuation_steps_per_unit: SolveOptions::default().steps_per_unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeSection {
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub points_per_axis: usize,
    pub multistarts: usize,
    pub seed: u64,
    /// Also solve the frozen system at every `sigma-map` point.
    pub validate_direct: bool,
}

impl Default for LandscapeSection {
    fn default() -> Self {
        let c = CandidateOptions::default();
        Self {
            box_lo: Vec::new(),
            box_hi: Vec::new(),
            points_per_axis: 41,
            multistarts: c.multistarts,
            seed: c.seed,
            validate_direct: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub epsilons: Vec<f64>,
    pub start: f64,
    pub peak_threshold: f64,
    pub energy_threshold: f64,
    pub jitter: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let t = ReportThresholds::default();
        Self {
            epsilons: vec![0.4, 0.3, 0.2, 0.1, 0.05],
            start: 0.0,
            peak_threshold: t.peak_distance,
            energy_threshold: t.energy_gap,
            jitter: t.jitter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            precision: 9,
        }
    }
}

/// A parsed configuration with the derived solver objects.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub params: ProblemParams,
    pub potentials: PotentialTriple,
    pub grid: RadialGrid,
    pub region: SearchBox,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(cfg.schema_version));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output.directory.clear();
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            min_step: self.solver.min_step,
            armijo: self.solver.armijo,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            newton: self.newton(),
            steps_per_unit: self.solver.continuation_steps_per_unit,
        }
    }

    pub fn candidate_options(&self) -> CandidateOptions {
        CandidateOptions {
            multistarts: self.landscape.multistarts,
            seed: self.landscape.seed,
            ..CandidateOptions::default()
        }
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            half_width: self.grids.half_width,
            nodes_per_eps: self.grids.nodes_per_eps,
            newton: self.newton(),
            ..SweepOptions::default()
        }
    }

    pub fn thresholds(&self) -> ReportThresholds {
        ReportThresholds {
            peak_distance: self.sweep.peak_threshold,
            energy_gap: self.sweep.energy_threshold,
            jitter: self.sweep.jitter,
            ..ReportThresholds::default()
        }
    }

    /// Validates every section and builds the solver inputs.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let pr = &self.problem;
        let params = validate_params(pr.n, pr.p, pr.q).map_err(ConfigError::Problem)?;
        let pot = &self.potentials;
        let potentials =
            PotentialTriple::parse(&pot.k, &pot.q, Some(&pot.v), pr.n).map_err(ConfigError::Potentials)?;
        let default = RadialGrid::default_for(pr.n);
        let grid = RadialGrid::new(
            pr.n,
            self.grids.radius.unwrap_or(default.radius()),
            self.grids.nodes.unwrap_or(default.len()),
        )
        .map_err(ConfigError::Grid)?;
        let invalid = |section, msg: String| ConfigError::Invalid { section, msg };
        if !(self.grids.half_width > 0.0 && self.grids.nodes_per_eps >= 4.0) {
            return Err(invalid("[grids]", "half_width must be > 0 and nodes_per_eps >= 4".into()));
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.max_iter > 0 && s.min_step > 0.0 && s.min_step < 1.0 && s.armijo > 0.0 && s.armijo < 1.0)
            || !(s.continuation_steps_per_unit > 0.0)
        {
            return Err(invalid("[solver]", "tolerances must be positive, min_step and armijo in (0, 1)".into()));
        }
        let l = &self.landscape;
        let region = if l.box_lo.is_empty() && l.box_hi.is_empty() {
            SearchBox::cube(pr.n, 3.0)
        } else {
            if l.box_lo.len() != pr.n || l.box_hi.len() != pr.n {
                return Err(invalid(
                    "[landscape]",
                    format!("box_lo and box_hi need {} coordinates", pr.n),
                ));
            }
            if l.box_lo.iter().zip(&l.box_hi).any(|(a, b)| !(a < b)) {
                return Err(invalid("[landscape]", "box_lo must be below box_hi".into()));
            }
            SearchBox::new(l.box_lo.clone(), l.box_hi.clone())
        };
        if l.points_per_axis < 2 || l.multistarts == 0 {
            return Err(invalid("[landscape]", "points_per_axis >= 2 and multistarts >= 1 required".into()));
        }
        let sw = &self.sweep;
        if sw.epsilons.iter().any(|e| !(*e > 0.0)) || sw.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("[sweep]", "epsilons must be positive and strictly decreasing".into()));
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(invalid("[output]", "precision must be between 1 and 17".into()));
        }
        Ok(Resolved {
            config: self.clone(),
            params,
            potentials,
            grid,
            region,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_toml("[problem]\nn = 1\np = 3.0\nq = 3.0\n").unwrap();
        assert_eq!(cfg.schema_version, 1);
        assert_eq!(cfg.output.precision, 9);
        assert_eq!(cfg.potentials.v, "1");
        let r = cfg.resolve().unwrap();
        assert_eq!(r.grid.len(), 4001);
        assert!(r.potentials.is_constant());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("[problem]\nn = 1\np = 3.0\nq = 3.0\nr = 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        let err = RunConfig::from_toml("[problem]\nn = 1\np = 3.0\nq = 3.0\n[extra]\na = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn schema_version_is_checked() {
        let err = RunConfig::from_toml("schema_version = 2\n[problem]\nn = 1\np = 3.0\nq = 3.0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Schema(2)));
    }

    #[test]
    fn exponent_invariant_is_cited() {
        let cfg = RunConfig::from_toml("[problem]\nn = 1\np = 1.0\nq = 3.0\n").unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("p > 1"), "{err}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::from_toml("[problem]\nn = 1\np = 3.0\nq = 3.0\n").unwrap();
        let b = RunConfig::from_toml("schema_version = 1\n[problem]\nn = 1\np = 3.0\nq = 3.0\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.landscape.seed += 1;
        assert_ne!(a.hash(), c.hash());
        assert_eq!(RunConfig::from_toml(&a.to_toml()).unwrap(), a);
    }
}
