//! Run configuration in sectioned TOML.
//!
//! ```toml
//! split = "ph"
//!
//! [geometry]
//! H_over_D = 0.8
//! J = 0.5
//!
//! [material]
//! ell = 0.04
//!
//! [mesh]
//! delta_fine = 0.01
//!
//! [output]
//! directory = "out/fig3d"
//! ```
//! Absent fields take the defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::energy::{MaterialParams, SplitKind};
use crate::error::{Error, Result};
use crate::geometry::JunctionParams;
use crate::mesh::MeshOptions;
use crate::post::ClassifierConfig;
use crate::solver::SolverConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSettings {
    pub delta_fine: f64,
    /// Defaults to eight times the fine size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_coarse: Option<f64>,
    pub seed: u64,
    pub grading: f64,
    pub min_angle_deg: f64,
}

impl Default for MeshSettings {
    fn default() -> Self {
        let o = MeshOptions::new(0.005, 0.04);
        MeshSettings {
            delta_fine: o.delta_fine,
            delta_coarse: None,
            seed: o.seed,
            grading: o.grading,
            min_angle_deg: o.min_angle_deg,
        }
    }
}

impl MeshSettings {
    pub fn delta_coarse(&self) -> f64 {
        self.delta_coarse.unwrap_or(8.0 * self.delta_fine)
    }

    pub fn options(&self) -> MeshOptions {
        MeshOptions {
            grading: self.grading,
            min_angle_deg: self.min_angle_deg,
            ..MeshOptions::new(self.delta_fine, self.delta_coarse()).with_seed(self.seed)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Field snapshot cadence in load steps (0: failure pair only).
    pub snapshot_every: usize,
    pub vtk: bool,
    pub history: bool,
    pub report: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            snapshot_every: 0,
            vtk: true,
            history: true,
            report: true,
        }
    }
}

/// Everything needed to reproduce one simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub split: SplitKind,
    pub geometry: JunctionParams,
    pub material: MaterialParams,
    pub mesh: MeshSettings,
    pub solver: SolverConfig,
    pub classifier: ClassifierConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            split: SplitKind::PositiveHydrostatic,
            geometry: JunctionParams::default(),
            material: MaterialParams::default(),
            mesh: MeshSettings::default(),
            solver: SolverConfig::default(),
            classifier: ClassifierConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn config_error(path: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::Config {
            path: if path.is_empty() { name } else { format!("{path}.{name}") },
            message: reason,
        },
        other => other,
    }
}

impl RunConfig {
    /// Desk-scale defaults: ℓ/D = 0.04 and δ = ℓ/4.
    pub fn desk() -> Self {
        let mut c = RunConfig::default();
        c.material.ell = 0.04;
        c.mesh.delta_fine = 0.01;
        c.geometry.s_over_d = 0.5;
        c.geometry.fine_margin_over_d = 0.3;
        c
    }

    /// Solver settings with the output cadence applied.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            snapshot_every: self.output.snapshot_every,
            ..self.solver.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate().map_err(|e| config_error("geometry", e))?;
        self.material.validate().map_err(|e| config_error("material", e))?;
        self.solver.validate().map_err(|e| config_error("solver", e))?;
        self.classifier.validate().map_err(|e| config_error("classifier", e))?;
        let m = &self.mesh;
        if !(m.delta_fine > 0.0 && m.delta_fine.is_finite()) {
            return Err(config_error("mesh", crate::error::invalid("delta_fine", "must be positive")));
        }
        if !(m.delta_coarse() >= m.delta_fine) {
            return Err(config_error("mesh", crate::error::invalid("delta_coarse", "must not be finer than delta_fine")));
        }
        if !(m.min_angle_deg > 0.0 && m.min_angle_deg <= 30.0) {
            return Err(config_error("mesh", crate::error::invalid("min_angle_deg", "must lie in (0, 30]")));
        }
        Ok(())
    }

    /// Non-fatal resolution advisories.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let ell = self.material.ell;
        if self.mesh.delta_fine > ell / 4.0 * (1.0 + 1e-12) {
            w.push(format!(
                "delta_fine = {} exceeds ell/4 = {}; the crack band is under-resolved",
                self.mesh.delta_fine,
                ell / 4.0
            ));
        }
        if ell / self.geometry.d > 1.0 / 30.0 {
            w.push(format!(
                "ell/D = {:.4} exceeds 1/30; results are far from the sharp-crack limit",
                ell / self.geometry.d
            ));
        }
        w
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses and validates a configuration; errors carry the offending key path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
        path: String::new(),
        message: e.message().to_string(),
    })?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.material.ell, 0.02);
        assert_eq!(c.material.young, 1.0);
        assert_eq!(c.material.poisson, 0.2);
        assert_eq!(c.material.toughness, 1.0);
        assert_eq!(c.material.eta, 1e-6);
        assert_eq!(c.mesh.delta_fine, 0.005);
        assert_eq!(c.geometry.d, 1.0);
        assert!(c.warnings().is_empty());
    }

    #[test]
    fn invalid_poisson_names_its_path() {
        match parse_config("[material]\nnu = 0.7\n") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "material.nu"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_mistyped_keys_are_rejected() {
        match parse_config("[geometry]\nJ = 0.5\nwidth = 3\n") {
            Err(Error::Config { path, message }) => {
                assert!(path.starts_with("geometry"), "{path}");
                assert!(message.contains("width"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        match parse_config("[solver]\nmax_steps = \"many\"\n") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "solver.max_steps"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::desk();
        c.split = SplitKind::HydrostaticDeviatoric;
        c.geometry.delta_gap = Some(1.5);
        c.solver.load_increment = Some(0.125);
        c.output.snapshot_every = 5;
        let again = parse_config(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        assert!(!c.warnings().is_empty());
    }
}
