//! Parameter sweeps, the transition fit, the analytical bound and junction interaction.

pub mod benchmarks;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{nucleation_stress, MaterialParams, SplitKind};
use crate::error::{Error, Result};
use crate::io::RunConfig;
use crate::pipeline::{run_case, write_case, CaseResult};
use crate::post::{ClassifierConfig, FailureMode};

/// Outcome bookkeeping shared by sweep and interaction points.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub steps: usize,
    pub failure_step: Option<usize>,
    pub converged: bool,
    pub wall_time_s: f64,
    pub elastic_energy: f64,
    pub fracture_energy: f64,
    /// Set when the run aborted; the mode is then `Mixed`.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub j: f64,
    pub h_over_d: f64,
    pub ell_over_d: f64,
    pub delta_over_d: f64,
    pub split: SplitKind,
    pub mode: FailureMode,
    pub particle_events: usize,
    pub meta: RunMeta,
    pub classifier: ClassifierConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteractionPoint {
    pub j: f64,
    pub h_over_d: f64,
    pub delta_gap: f64,
    /// Transition constant used for the coordinates.
    pub c: f64,
    pub j_r: f64,
    pub j_a: f64,
    pub split: SplitKind,
    pub mode: FailureMode,
    pub particle_events: usize,
    pub meta: RunMeta,
}

/// Cartesian grid of single-junction cases.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub js: Vec<f64>,
    pub h_over_ds: Vec<f64>,
    /// Empty keeps the base regularization length.
    pub ell_over_ds: Vec<f64>,
}

impl SweepGrid {
    pub fn new(js: Vec<f64>, h_over_ds: Vec<f64>) -> Self {
        SweepGrid {
            js,
            h_over_ds,
            ell_over_ds: Vec::new(),
        }
    }

    /// Grid points ordered by (ℓ/D, H/D, J).
    pub fn points(&self) -> Vec<(f64, f64, Option<f64>)> {
        let ells: Vec<Option<f64>> = if self.ell_over_ds.is_empty() {
            vec![None]
        } else {
            self.ell_over_ds.iter().map(|&l| Some(l)).collect()
        };
        let mut out = Vec::new();
        for &l in &ells {
            for &h in &self.h_over_ds {
                for &j in &self.js {
                    out.push((j, h, l));
                }
            }
        }
        out
    }
}

/// Evenly spaced values `start, start + step, ...` up to `end` inclusive.
pub fn linspace_step(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor().max(0.0) as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Parses `a,b,c` or `start:end:step`.
pub fn parse_value_list(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidParameter {
        name: "values".into(),
        reason: format!("`{s}`: {why}"),
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(bad("need start <= end and a positive step"));
            }
            linspace_step(a, b, step)
        }
        [_] => s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<Result<_>>()?,
        _ => return Err(bad("expected a list or start:end:step")),
    };
    if out.is_empty() {
        return Err(bad("no values"));
    }
    Ok(out)
}

/// Named regularization-length study: a geometry family swept over ℓ/D.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizationPreset {
    pub name: &'static str,
    pub grid: SweepGrid,
}

/// J = 0.3 over H/D ∈ {0.3, ..., 0.7}.
pub fn preset_g1() -> RegularizationPreset {
    RegularizationPreset {
        name: "G1",
        grid: SweepGrid {
            js: vec![0.3],
            h_over_ds: vec![0.3, 0.4, 0.5, 0.6, 0.7],
            ell_over_ds: regularization_lengths(),
        },
    }
}

/// J = 0.7 over H/D ∈ {0.2, ..., 0.5}.
pub fn preset_g2() -> RegularizationPreset {
    RegularizationPreset {
        name: "G2",
        grid: SweepGrid {
            js: vec![0.7],
            h_over_ds: vec![0.2, 0.3, 0.4, 0.5],
            ell_over_ds: regularization_lengths(),
        },
    }
}

pub fn preset(name: &str) -> Option<RegularizationPreset> {
    match name.to_ascii_uppercase().as_str() {
        "G1" => Some(preset_g1()),
        "G2" => Some(preset_g2()),
        _ => None,
    }
}

fn regularization_lengths() -> Vec<f64> {
    vec![0.005, 0.01, 0.015, 0.02, 0.025, 0.03]
}

/// Configuration of one grid point; a new ℓ keeps δ/ℓ and hence the numerical toughness.
pub fn point_config(base: &RunConfig, j: f64, h_over_d: f64, ell_over_d: Option<f64>) -> RunConfig {
    let mut cfg = base.clone();
    cfg.geometry.j = j;
    cfg.geometry.h_over_d = h_over_d;
    if let Some(l) = ell_over_d {
        let ratio = base.mesh.delta_fine / base.material.ell;
        let coarse_ratio = base.mesh.delta_coarse() / base.mesh.delta_fine;
        cfg.material.ell = l * base.geometry.d;
        cfg.mesh.delta_fine = ratio * cfg.material.ell;
        cfg.mesh.delta_coarse = Some(coarse_ratio * cfg.mesh.delta_fine);
    }
    cfg
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter {
            name: "jobs".into(),
            reason: e.to_string(),
        })
}

fn meta_of(res: &Result<CaseResult>, seconds: f64) -> (FailureMode, usize, RunMeta) {
    match res {
        Ok(r) => (
            r.classification.mode,
            r.classification.particle_events,
            RunMeta {
                steps: r.outcome.history.len(),
                failure_step: r.outcome.failure_step,
                converged: r.report.converged,
                wall_time_s: seconds,
                elastic_energy: r.report.elastic_energy,
                fracture_energy: r.report.fracture_energy,
                error: None,
            },
        ),
        Err(e) => (
            FailureMode::Mixed,
            0,
            RunMeta {
                wall_time_s: seconds,
                error: Some(e.to_string()),
                ..RunMeta::default()
            },
        ),
    }
}

fn run_and_store(cfg: &RunConfig, dir: Option<&Path>) -> Result<CaseResult> {
    let r = run_case(cfg)?;
    if let Some(d) = dir {
        write_case(&r, cfg, d)?;
    }
    Ok(r)
}

/// Runs every grid point on `jobs` workers; failures are recorded per point.
///
/// With `out`, each case is written to its own subdirectory.
pub fn sweep_single(grid: &SweepGrid, base: &RunConfig, jobs: usize, out: Option<&Path>) -> Result<Vec<SweepPoint>> {
    let points = grid.points();
    let pool = pool(jobs)?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|&(j, h, l)| {
                let cfg = point_config(base, j, h, l);
                let dir = out.map(|o| {
                    o.join(format!(
                        "{}_J{:.4}_H{:.4}_l{:.4}",
                        cfg.split,
                        j,
                        h,
                        cfg.material.ell / cfg.geometry.d
                    ))
                });
                let t0 = Instant::now();
                let res = run_and_store(&cfg, dir.as_deref());
                let (mode, particle_events, meta) = meta_of(&res, t0.elapsed().as_secs_f64());
                SweepPoint {
                    j,
                    h_over_d: h,
                    ell_over_d: cfg.material.ell / cfg.geometry.d,
                    delta_over_d: cfg.mesh.delta_fine / cfg.geometry.d,
                    split: cfg.split,
                    mode,
                    particle_events,
                    meta,
                    classifier: cfg.classifier,
                }
            })
            .collect()
    }))
}

/// Bracket of the mechanism transition at one H/D.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionBracket {
    pub h_over_d: f64,
    /// Largest below-transition J under `j_large`.
    pub j_small: f64,
    /// Smallest J failing as a large particle.
    pub j_large: f64,
}

impl TransitionBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.j_small + self.j_large)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.j_large - self.j_small)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionFit {
    /// Constant of the law `J* = C·D/H`.
    pub c: f64,
    /// Propagated half-width of the brackets.
    pub c_uncertainty: f64,
    /// Root-mean-square misfit of the bracket midpoints.
    pub residual: f64,
    pub brackets: Vec<TransitionBracket>,
    /// H/D rows left out of the fit, with the reason.
    pub excluded: Vec<(f64, String)>,
}

impl TransitionFit {
    pub fn predict(&self, h_over_d: f64) -> f64 {
        self.c / h_over_d
    }
}

/// Least-squares fit of `J* = C·D/H` through the per-row bracket midpoints.
pub fn fit_transition(points: &[SweepPoint]) -> Result<TransitionFit> {
    let mut rows: BTreeMap<i64, Vec<&SweepPoint>> = BTreeMap::new();
    for p in points {
        rows.entry((p.h_over_d * 1e9).round() as i64).or_default().push(p);
    }
    let mut brackets = Vec::new();
    let mut excluded = Vec::new();
    for row in rows.values() {
        let h = row[0].h_over_d;
        let j_large = row
            .iter()
            .filter(|p| p.mode == FailureMode::LargeParticle)
            .map(|p| p.j)
            .fold(f64::INFINITY, f64::min);
        if !j_large.is_finite() {
            excluded.push((h, "no LargeParticle point".to_string()));
            continue;
        }
        let j_small = row
            .iter()
            .filter(|p| p.mode.is_below_transition() && p.j < j_large)
            .map(|p| p.j)
            .fold(f64::NEG_INFINITY, f64::max);
        if !j_small.is_finite() {
            excluded.push((h, "no below-transition point under the first LargeParticle".to_string()));
            continue;
        }
        brackets.push(TransitionBracket { h_over_d: h, j_small, j_large });
    }
    if brackets.len() < 2 {
        return Err(Error::InsufficientBrackets(brackets.len()));
    }
    let x: Vec<f64> = brackets.iter().map(|b| 1.0 / b.h_over_d).collect();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let c = brackets.iter().zip(&x).map(|(b, v)| b.midpoint() * v).sum::<f64>() / sxx;
    let c_uncertainty = brackets.iter().zip(&x).map(|(b, v)| b.half_width() * v).sum::<f64>() / sxx;
    let residual = (brackets
        .iter()
        .zip(&x)
        .map(|(b, v)| (b.midpoint() - c * v).powi(2))
        .sum::<f64>()
        / brackets.len() as f64)
        .sqrt();
    Ok(TransitionFit {
        c,
        c_uncertainty,
        residual,
        brackets,
        excluded,
    })
}

/// Lower bound on the transition junction ratio from the debris energy balance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalBound {
    /// `(16β/3α)(1-ν²) ℓ/H`.
    pub from_length: f64,
    /// `(2β/α)(E·Gc/σ_c²)/H` with the material strength.
    pub from_strength: f64,
    pub sigma_c: f64,
    /// Equivalent transition constant `bound · H/D`.
    pub c_equivalent: f64,
}

/// Both forms of the bound for debris-shape factors `alpha_shape` and `beta_shape`.
pub fn theoretical_bound(alpha_shape: f64, beta_shape: f64, mat: &MaterialParams, h: f64, d: f64) -> TheoreticalBound {
    let nu = mat.poisson;
    let from_length = 16.0 * beta_shape / (3.0 * alpha_shape) * (1.0 - nu * nu) * mat.ell / h;
    let sigma_c = nucleation_stress(mat);
    let from_strength = 2.0 * beta_shape / alpha_shape * (mat.young * mat.toughness / (sigma_c * sigma_c)) / h;
    TheoreticalBound {
        from_length,
        from_strength,
        sigma_c,
        c_equivalent: from_length * h / d,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionCoordinates {
    /// Critical projected junction length `C·D²/(2H)`.
    pub j_p_star: f64,
    /// Real contact length over the critical one.
    pub j_r: f64,
    /// Apparent contact length over the critical one.
    pub j_a: f64,
}

pub fn interaction_coordinates(d: f64, h: f64, j: f64, delta: f64, c: f64) -> InteractionCoordinates {
    let j_p_star = c * d * d / (2.0 * h);
    InteractionCoordinates {
        j_p_star,
        j_r: (j * d / 2.0) / j_p_star,
        j_a: (d + delta / 2.0) / j_p_star,
    }
}

/// Double-junction runs for each (J, H/D) over the gap grid `deltas` (in units of D).
pub fn sweep_interaction(
    geometries: &[(f64, f64)],
    deltas: &[f64],
    base: &RunConfig,
    c: f64,
    jobs: usize,
    out: Option<&Path>,
) -> Result<Vec<InteractionPoint>> {
    let mut cases = Vec::new();
    for &(j, h) in geometries {
        for &dl in deltas {
            cases.push((j, h, dl));
        }
    }
    let pool = pool(jobs)?;
    Ok(pool.install(|| {
        cases
            .par_iter()
            .map(|&(j, h, dl)| {
                let mut cfg = point_config(base, j, h, None);
                let d = cfg.geometry.d;
                cfg.geometry.delta_gap = Some(dl * d);
                let dir = out.map(|o| o.join(format!("{}_J{j:.4}_H{h:.4}_Delta{dl:.4}", cfg.split)));
                let t0 = Instant::now();
                let res = run_and_store(&cfg, dir.as_deref());
                let (mode, particle_events, meta) = meta_of(&res, t0.elapsed().as_secs_f64());
                let ic = interaction_coordinates(d, h * d, j, dl * d, c);
                InteractionPoint {
                    j,
                    h_over_d: h,
                    delta_gap: dl,
                    c,
                    j_r: ic.j_r,
                    j_a: ic.j_a,
                    split: cfg.split,
                    mode,
                    particle_events,
                    meta,
                }
            })
            .collect()
    }))
}

/// Geometries where a MacroParticle at some gap is followed by another mode at a smaller gap.
pub fn macro_persistence_violations(points: &[InteractionPoint]) -> Vec<String> {
    let mut groups: BTreeMap<(i64, i64), Vec<&InteractionPoint>> = BTreeMap::new();
    for p in points {
        groups
            .entry(((p.j * 1e9).round() as i64, (p.h_over_d * 1e9).round() as i64))
            .or_default()
            .push(p);
    }
    let mut out = Vec::new();
    for g in groups.values_mut() {
        g.sort_by(|a, b| b.delta_gap.total_cmp(&a.delta_gap));
        let mut seen: Option<f64> = None;
        for p in g.iter() {
            match (seen, p.mode) {
                (None, FailureMode::MacroParticle) => seen = Some(p.delta_gap),
                (Some(at), m) if m != FailureMode::MacroParticle => out.push(format!(
                    "J = {}, H/D = {}: MacroParticle at Delta = {at} but {m} at Delta = {}",
                    p.j, p.h_over_d, p.delta_gap
                )),
                _ => {}
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn synthetic(c: f64, js: &[f64], hs: &[f64]) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &h in hs {
            for &j in js {
                let mode = if j < c / h {
                    FailureMode::SmallParticle
                } else {
                    FailureMode::LargeParticle
                };
                out.push(SweepPoint {
                    j,
                    h_over_d: h,
                    ell_over_d: 0.04,
                    delta_over_d: 0.01,
                    split: SplitKind::PositiveHydrostatic,
                    mode,
                    particle_events: 1,
                    meta: RunMeta::default(),
                    classifier: ClassifierConfig::default(),
                });
            }
        }
        out
    }

    #[test]
    fn fit_recovers_synthetic_constant() {
        let js = linspace_step(0.05, 1.0, 0.05);
        let pts = synthetic(0.27, &js, &[0.3, 0.4, 0.5, 0.6, 0.7, 0.8]);
        let fit = fit_transition(&pts).unwrap();
        assert!((fit.c - 0.27).abs() <= 0.025, "{}", fit.c);
        assert_eq!(fit.brackets.len(), 6);
        for b in &fit.brackets {
            assert!(b.j_small < b.j_large);
        }
    }

    #[test]
    fn fit_needs_two_brackets() {
        let js = linspace_step(0.1, 1.0, 0.1);
        let mut pts = synthetic(0.27, &js, &[0.5, 0.6]);
        for p in &mut pts {
            p.mode = FailureMode::LargeParticle;
        }
        assert!(matches!(fit_transition(&pts), Err(Error::InsufficientBrackets(0))));
        assert!(matches!(fit_transition(&[]), Err(Error::InsufficientBrackets(0))));
    }

    #[test]
    fn unbracketed_rows_are_excluded() {
        let js = linspace_step(0.1, 1.0, 0.1);
        let mut pts = synthetic(0.27, &js, &[0.4, 0.5, 0.6]);
        pts.extend(synthetic(0.27, &[0.5, 0.6], &[0.1]));
        let fit = fit_transition(&pts).unwrap();
        assert_eq!(fit.brackets.len(), 3);
        assert_eq!(fit.excluded.len(), 1);
        assert_eq!(fit.excluded[0].0, 0.1);
    }

    #[test]
    fn bound_unit_shape_factors() {
        let mat = MaterialParams::default();
        for ell in [0.005, 0.02, 0.04] {
            let m = mat.with_ell(ell);
            let b = theoretical_bound(1.0, 1.0, &m, 0.5, 1.0);
            let expect = 16.0 / 3.0 * 0.96 * ell / 0.5;
            assert!((b.from_length - expect).abs() <= 1e-14);
            assert!((b.from_length - 5.12 * ell / 0.5).abs() <= 1e-14);
            assert!((b.from_length - b.from_strength).abs() <= 1e-12 * b.from_length);
        }
    }

    #[test]
    fn interaction_coordinate_values() {
        let ic = interaction_coordinates(1.0, 0.6, 0.7, 1.0, 0.27);
        assert!((ic.j_p_star - 0.225).abs() < 1e-15);
        assert!((ic.j_r - 0.35 / 0.225).abs() < 1e-12);
        assert!((ic.j_a - 1.5 / 0.225).abs() < 1e-12);
        assert!((ic.j_r - 1.5556).abs() < 1e-4 && (ic.j_a - 6.6667).abs() < 1e-4);
    }

    #[test]
    fn presets_and_grids() {
        let g1 = preset_g1();
        assert_eq!(g1.grid.points().len(), 5 * 6);
        assert_eq!(preset("g2").unwrap().grid.h_over_ds, vec![0.2, 0.3, 0.4, 0.5]);
        assert!(preset("G3").is_none());
        assert!(SweepGrid::default().points().is_empty());
        assert_eq!(linspace_step(0.1, 0.5, 0.1).len(), 5);
        assert_eq!(parse_value_list("0.3, 0.8").unwrap(), vec![0.3, 0.8]);
        assert_eq!(parse_value_list("0.1:0.3:0.1").unwrap().len(), 3);
        assert!(parse_value_list("0.1:x:0.1").is_err());
        assert!(parse_value_list("").is_err());
    }

    #[test]
    fn regularization_points_keep_numerical_toughness() {
        let base = RunConfig::default();
        let g0 = crate::energy::numerical_toughness(1.0, base.mesh.delta_fine, base.material.ell);
        for l in regularization_lengths() {
            let c = point_config(&base, 0.3, 0.5, Some(l));
            let g = crate::energy::numerical_toughness(1.0, c.mesh.delta_fine, c.material.ell);
            assert!((g - g0).abs() < 1e-12);
            assert!((c.mesh.delta_coarse() / c.mesh.delta_fine - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn macro_persistence() {
        let p = |dl: f64, mode| InteractionPoint {
            j: 0.7,
            h_over_d: 0.6,
            delta_gap: dl,
            c: 0.27,
            j_r: 0.0,
            j_a: 0.0,
            split: SplitKind::PositiveHydrostatic,
            mode,
            particle_events: 1,
            meta: RunMeta::default(),
        };
        let ok = vec![
            p(2.0, FailureMode::LargeParticle),
            p(1.0, FailureMode::MacroParticle),
            p(0.5, FailureMode::MacroParticle),
        ];
        assert!(macro_persistence_violations(&ok).is_empty());
        let bad = vec![
            p(0.5, FailureMode::LargeParticle),
            p(2.0, FailureMode::LargeParticle),
            p(1.0, FailureMode::MacroParticle),
        ];
        assert_eq!(macro_persistence_violations(&bad).len(), 1);
    }
}
