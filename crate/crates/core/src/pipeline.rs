//! One configured case from geometry to failure report, and its on-disk layout.
//!
//! A case directory holds `config.toml`, `mesh.txt`, `history.csv`,
//! `snapshot_NNNNN.vtk`, `final.ckpt`, `crossings.csv` and `report.toml`.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::fem::FemModel;
use crate::geometry::{build_junction, JunctionGeometry};
use crate::io::{self, FailureReport, RunConfig};
use crate::mesh::{triangulate, Mesh};
use crate::post::{classify_failure, extract_damage_regions, Classification, ClassifierConfig, DisplayThresholds};
use crate::solver::{self, Crossings, RunOutcome, StepRecord};

pub struct CaseResult {
    pub geometry: JunctionGeometry,
    pub model: FemModel,
    pub outcome: RunOutcome,
    pub classification: Classification,
    pub report: FailureReport,
    pub wall_time: Duration,
}

pub fn run_case(cfg: &RunConfig) -> Result<CaseResult> {
    run_case_observed(cfg, &mut |_| {})
}

pub fn run_case_observed(cfg: &RunConfig, observer: &mut dyn FnMut(&StepRecord)) -> Result<CaseResult> {
    cfg.validate()?;
    let t0 = Instant::now();
    let geometry = build_junction(&cfg.geometry)?;
    let model = FemModel::new(triangulate(&geometry, &cfg.mesh.options())?)?;
    let outcome = solver::run_quasistatic_observed(
        &geometry,
        &model,
        &cfg.material,
        cfg.split,
        &cfg.solver_config(),
        observer,
    )?;
    let classification = classify_state(
        &geometry,
        &model,
        &outcome.final_state.alpha,
        &outcome.crossings,
        cfg.material.ell,
        &cfg.classifier,
    );
    let report = FailureReport::new(cfg, &model, &outcome, &classification);
    Ok(CaseResult {
        geometry,
        model,
        outcome,
        classification,
        report,
        wall_time: t0.elapsed(),
    })
}

/// Classifies a damage field with the given thresholds.
pub fn classify_state(
    geometry: &JunctionGeometry,
    model: &FemModel,
    alpha: &[f64],
    crossings: &Crossings,
    ell: f64,
    classifier: &ClassifierConfig,
) -> Classification {
    let regions = extract_damage_regions(model, alpha, classifier.loc_threshold, Some(crossings));
    classify_failure(model, &regions, geometry, ell, classifier)
}

/// Writes the artifacts enabled in `cfg.output` into `dir`.
pub fn write_case(result: &CaseResult, cfg: &RunConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    fs::write(dir.join("mesh.txt"), result.model.mesh.to_text())?;
    solver::write_checkpoint(&dir.join("final.ckpt"), &result.outcome.final_state)?;
    io::write_crossings(&dir.join("crossings.csv"), &result.outcome.crossings)?;
    if cfg.output.history {
        io::write_history_csv(&dir.join("history.csv"), &result.outcome.history)?;
    }
    if cfg.output.vtk {
        let bands = DisplayThresholds::default();
        for s in &result.outcome.snapshots {
            io::write_field_snapshot(
                &dir.join(format!("snapshot_{:05}.vtk", s.step)),
                &result.model,
                &cfg.material,
                cfg.split,
                s,
                &bands,
            )?;
        }
    }
    if cfg.output.report {
        fs::write(dir.join("report.toml"), result.report.to_toml())?;
    }
    Ok(())
}

/// Re-runs the classifier on a stored case, optionally with new thresholds.
pub fn reclassify_dir(dir: &Path, classifier: Option<&ClassifierConfig>) -> Result<Classification> {
    let cfg = io::load_config(&dir.join("config.toml"))?;
    let geometry = build_junction(&cfg.geometry)?;
    let model = FemModel::new(Mesh::from_text(&fs::read_to_string(dir.join("mesh.txt"))?)?)?;
    let state = solver::read_checkpoint(&dir.join("final.ckpt"))?;
    let crossings = io::read_crossings(&dir.join("crossings.csv"), model.num_elements())?;
    Ok(classify_state(
        &geometry,
        &model,
        &state.alpha,
        &crossings,
        cfg.material.ell,
        classifier.unwrap_or(&cfg.classifier),
    ))
}
