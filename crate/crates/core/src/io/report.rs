//! Per-run failure summary.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::energy::{numerical_toughness, SplitKind};
use crate::error::{Error, Result};
use crate::fem::FemModel;
use crate::post::{Classification, DamageRegion, FailureMode, WearRate};
use crate::solver::RunOutcome;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub split: SplitKind,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "H_over_D")]
    pub h_over_d: f64,
    #[serde(rename = "Delta", skip_serializing_if = "Option::is_none", default)]
    pub delta_gap: Option<f64>,
    pub ell: f64,
    pub delta_fine: f64,
    pub numerical_toughness: f64,
    pub num_nodes: usize,
    pub num_elements: usize,
    pub mode: FailureMode,
    pub wear_rate: WearRate,
    pub particle_events: usize,
    pub interface_coverage: f64,
    pub junction_corner_hits: usize,
    pub bulk_corner_hits: usize,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure_u_t: Option<f64>,
    pub load_increment: f64,
    pub peak_reaction: f64,
    pub elastic_energy: f64,
    pub fracture_energy: f64,
    /// Every load step reached its alternate-minimization tolerance.
    pub converged: bool,
    pub regions: Vec<DamageRegion>,
}

impl FailureReport {
    pub fn new(cfg: &RunConfig, model: &FemModel, outcome: &RunOutcome, class: &Classification) -> Self {
        let h = &outcome.history;
        let failure_u_t = outcome
            .failure_step
            .and_then(|s| h.iter().find(|r| r.step == s))
            .map(|r| r.u_t);
        let e = outcome.final_state.energies;
        FailureReport {
            split: cfg.split,
            j: cfg.geometry.j,
            h_over_d: cfg.geometry.h_over_d,
            delta_gap: cfg.geometry.delta_gap,
            ell: cfg.material.ell,
            delta_fine: cfg.mesh.delta_fine,
            numerical_toughness: numerical_toughness(cfg.material.toughness, cfg.mesh.delta_fine, cfg.material.ell),
            num_nodes: model.num_nodes(),
            num_elements: model.num_elements(),
            mode: class.mode,
            wear_rate: class.mode.wear_rate(),
            particle_events: class.particle_events,
            interface_coverage: class.interface_coverage,
            junction_corner_hits: class.junction_corner_hits,
            bulk_corner_hits: class.bulk_corner_hits,
            steps: h.len(),
            failure_step: outcome.failure_step,
            failure_u_t,
            load_increment: outcome.load_increment,
            peak_reaction: h.iter().fold(0.0f64, |m, r| m.max(r.reaction.abs())),
            elastic_energy: e.elastic,
            fracture_energy: e.fracture,
            converged: h.iter().all(|r| r.converged),
            regions: class.regions.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    /// Multi-line human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let gap = self.delta_gap.map_or(String::new(), |d| format!(", Delta = {d}"));
        let _ = writeln!(s, "{} split, J = {}, H/D = {}{}", self.split, self.j, self.h_over_d, gap);
        let _ = writeln!(
            s,
            "ell = {}, delta = {}, Gc_num = {:.5}, {} nodes / {} triangles",
            self.ell, self.delta_fine, self.numerical_toughness, self.num_nodes, self.num_elements
        );
        let _ = writeln!(
            s,
            "mode: {} (wear rate {}), particle events: {}",
            self.mode, self.wear_rate, self.particle_events
        );
        match (self.failure_step, self.failure_u_t) {
            (Some(k), Some(u)) => {
                let _ = writeln!(s, "failure at step {k} (u_t = {u:.6}), peak reaction {:.6}", self.peak_reaction);
            }
            _ => {
                let _ = writeln!(s, "no failure within {} steps", self.steps);
            }
        }
        let _ = writeln!(
            s,
            "energies: elastic {:.6}, fracture {:.6}{}",
            self.elastic_energy,
            self.fracture_energy,
            if self.converged { "" } else { " (some steps not converged)" }
        );
        for (k, r) in self.regions.iter().enumerate() {
            let _ = writeln!(
                s,
                "  region {k}: {} elements, length {:.4}, thickness {:.4}, orientation {:.1} deg, {} nucleation site(s)",
                r.num_elements,
                r.length,
                r.thickness,
                r.orientation_deg,
                r.nucleation_sites.len()
            );
        }
        s
    }
}

pub fn parse_report(text: &str) -> Result<FailureReport> {
    toml::from_str(text).map_err(|e| Error::Config {
        path: "report".into(),
        message: e.message().to_string(),
    })
}
