//! Rule-based labelling of the failure mechanism.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::regions::DamageRegion;
use crate::error::{invalid, Error, Result};
use crate::fem::FemModel;
use crate::geometry::{dist, JunctionGeometry, Point, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureMode {
    NoFailure,
    Slip,
    SingleShearBand,
    DoubleShearBand,
    SmallParticle,
    LargeParticle,
    MacroParticle,
    Mixed,
}

impl FailureMode {
    pub const ALL: [FailureMode; 8] = [
        FailureMode::NoFailure,
        FailureMode::Slip,
        FailureMode::SingleShearBand,
        FailureMode::DoubleShearBand,
        FailureMode::SmallParticle,
        FailureMode::LargeParticle,
        FailureMode::MacroParticle,
        FailureMode::Mixed,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FailureMode::NoFailure => "NoFailure",
            FailureMode::Slip => "Slip",
            FailureMode::SingleShearBand => "SingleShearBand",
            FailureMode::DoubleShearBand => "DoubleShearBand",
            FailureMode::SmallParticle => "SmallParticle",
            FailureMode::LargeParticle => "LargeParticle",
            FailureMode::MacroParticle => "MacroParticle",
            FailureMode::Mixed => "Mixed",
        }
    }

    /// Below the small-to-large particle transition.
    pub fn is_below_transition(self) -> bool {
        matches!(
            self,
            FailureMode::Slip | FailureMode::SingleShearBand | FailureMode::DoubleShearBand | FailureMode::SmallParticle
        )
    }

    pub fn wear_rate(self) -> WearRate {
        match self {
            FailureMode::NoFailure => WearRate::None,
            FailureMode::Slip | FailureMode::SingleShearBand | FailureMode::DoubleShearBand => WearRate::Low,
            FailureMode::SmallParticle | FailureMode::LargeParticle => WearRate::Mild,
            FailureMode::MacroParticle => WearRate::Severe,
            FailureMode::Mixed => WearRate::Unclassified,
        }
    }
}

impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FailureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FailureMode::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid("mode", format!("unknown failure mode `{s}`")))
    }
}

/// Qualitative wear regime attached to a mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WearRate {
    None,
    Low,
    Mild,
    Severe,
    Unclassified,
}

impl fmt::Display for WearRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WearRate::None => "none",
            WearRate::Low => "low",
            WearRate::Mild => "mild",
            WearRate::Severe => "severe",
            WearRate::Unclassified => "unclassified",
        })
    }
}

/// Classifier thresholds; lengths are in units of ℓ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub loc_threshold: f64,
    pub interface_distance: f64,
    pub interface_coverage: f64,
    /// Fraction of a region's area that must lie near an interface to count as aligned with it.
    pub interface_area_fraction: f64,
    pub orientation_tol_deg: f64,
    pub corner_radius: f64,
    /// Regions shorter than this are ignored.
    pub min_region_length: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            loc_threshold: 0.5,
            interface_distance: 2.0,
            interface_coverage: 0.7,
            interface_area_fraction: 0.7,
            orientation_tol_deg: 20.0,
            corner_radius: 3.0,
            min_region_length: 4.0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.loc_threshold > 0.0 && self.loc_threshold < 1.0) {
            return Err(invalid("loc_threshold", "must lie in (0, 1)"));
        }
        for (name, v) in [
            ("interface_distance", self.interface_distance),
            ("corner_radius", self.corner_radius),
            ("orientation_tol_deg", self.orientation_tol_deg),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive"));
            }
        }
        for (name, v) in [
            ("interface_coverage", self.interface_coverage),
            ("interface_area_fraction", self.interface_area_fraction),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(name, "must lie in (0, 1]"));
            }
        }
        if !(self.min_region_length >= 0.0) {
            return Err(invalid("min_region_length", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub mode: FailureMode,
    /// Separate debris events (per-asperity closures for particle modes).
    pub particle_events: usize,
    /// Regions that passed the size filter.
    pub regions: Vec<DamageRegion>,
    /// Best interface coverage among aligned regions.
    pub interface_coverage: f64,
    /// Junction corners with a nucleation site within the corner radius.
    pub junction_corner_hits: usize,
    /// Bulk corners with a nucleation site within the corner radius.
    pub bulk_corner_hits: usize,
}

struct Interface {
    seg: Segment,
}

impl Interface {
    /// Area fraction of `r` near the segment and the covered fraction of its length.
    fn alignment(&self, model: &FemModel, r: &DamageRegion, tol: f64) -> (f64, f64) {
        const BINS: usize = 256;
        let mut covered = [false; BINS];
        let mut near = 0.0;
        let len = self.seg.length();
        for &e in &r.elements {
            let c = model.mesh.centroid(e);
            if self.seg.distance(c) > tol {
                continue;
            }
            near += model.elements[e].area;
            let ts: Vec<f64> = model.mesh.triangles[e]
                .iter()
                .map(|&v| self.seg.project(model.mesh.nodes[v]) / len)
                .collect();
            let lo = ts.iter().fold(f64::INFINITY, |m, t| m.min(*t)).clamp(0.0, 1.0);
            let hi = ts.iter().fold(f64::NEG_INFINITY, |m, t| m.max(*t)).clamp(0.0, 1.0);
            let (b0, b1) = ((lo * BINS as f64).floor() as usize, (hi * BINS as f64).ceil() as usize);
            for b in covered.iter_mut().take(b1.min(BINS)).skip(b0) {
                *b = true;
            }
        }
        let coverage = covered.iter().filter(|&&b| b).count() as f64 / BINS as f64;
        (near / r.area, coverage)
    }
}

fn sites(r: &DamageRegion) -> Vec<Point> {
    if r.nucleation_sites.is_empty() {
        r.nucleation_point.into_iter().collect()
    } else {
        r.nucleation_sites.clone()
    }
}

/// Assigns one mode to the damage state at failure.
///
/// Rules, first match wins: no significant region gives `NoFailure`; regions
/// all hugging an interface and covering most of it give `Slip`; bulk-corner
/// nucleation gives `MacroParticle` (double junction, corners of different
/// asperities hit without any asperity closing its own pair) or
/// `LargeParticle`; near-horizontal bands give `SingleShearBand` or
/// `DoubleShearBand`; nucleation at two or more junction corners gives
/// `SmallParticle`; anything else is `Mixed`.
pub fn classify_failure(
    model: &FemModel,
    regions: &[DamageRegion],
    geom: &JunctionGeometry,
    ell: f64,
    cfg: &ClassifierConfig,
) -> Classification {
    let significant: Vec<DamageRegion> = regions
        .iter()
        .filter(|r| r.length >= cfg.min_region_length * ell)
        .cloned()
        .collect();
    let lm = &geom.landmarks;
    let radius = cfg.corner_radius * ell;
    let all_sites: Vec<Point> = significant.iter().flat_map(sites).collect();
    let hits = |corners: &[Point]| -> Vec<bool> {
        corners
            .iter()
            .map(|&c| all_sites.iter().any(|&s| dist(s, c) <= radius))
            .collect()
    };
    let bulk_hit = hits(&lm.bulk_corners);
    let junction_sites = hits(&lm.junction_corners).iter().filter(|&&h| h).count();
    let mut out = Classification {
        mode: FailureMode::Mixed,
        particle_events: 0,
        regions: significant.clone(),
        interface_coverage: 0.0,
        junction_corner_hits: junction_sites,
        bulk_corner_hits: bulk_hit.iter().filter(|&&h| h).count(),
    };
    if significant.is_empty() {
        out.mode = FailureMode::NoFailure;
        return out;
    }

    let interfaces: Vec<Interface> = lm.interfaces.iter().map(|&seg| Interface { seg }).collect();
    let tol = cfg.interface_distance * ell;
    let mut aligned = vec![false; significant.len()];
    for (k, r) in significant.iter().enumerate() {
        for i in &interfaces {
            let (frac, cov) = i.alignment(model, r, tol);
            if frac >= cfg.interface_area_fraction {
                aligned[k] = true;
                out.interface_coverage = out.interface_coverage.max(cov);
            }
        }
    }
    if aligned.iter().all(|&a| a) && out.interface_coverage >= cfg.interface_coverage {
        out.mode = FailureMode::Slip;
        return out;
    }

    let per_asperity: Vec<usize> = bulk_hit.chunks(2).map(|c| c.iter().filter(|&&h| h).count()).collect();
    let closed = per_asperity.iter().filter(|&&n| n == 2).count();
    let touched = per_asperity.iter().filter(|&&n| n > 0).count();
    if geom.is_double() && closed == 0 && touched >= 2 {
        out.mode = FailureMode::MacroParticle;
        out.particle_events = 1;
        return out;
    }
    if touched > 0 {
        out.mode = FailureMode::LargeParticle;
        out.particle_events = closed.max(1);
        return out;
    }

    let flat: Vec<&DamageRegion> = significant
        .iter()
        .zip(&aligned)
        .filter(|(r, &a)| !a && r.inclination_deg() <= cfg.orientation_tol_deg)
        .map(|(r, _)| r)
        .collect();
    if significant.len() == 1 && flat.len() == 1 {
        out.mode = FailureMode::SingleShearBand;
        return out;
    }
    if significant.len() == 2 && flat.len() == 2 {
        let d = (flat[0].orientation_deg - flat[1].orientation_deg).abs();
        if d.min(180.0 - d) <= cfg.orientation_tol_deg {
            out.mode = FailureMode::DoubleShearBand;
            return out;
        }
    }
    if junction_sites >= 2 {
        out.mode = FailureMode::SmallParticle;
        out.particle_events = 1;
        return out;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for m in FailureMode::ALL {
            assert_eq!(m.label().parse::<FailureMode>().unwrap(), m);
        }
        assert!("Debris".parse::<FailureMode>().is_err());
        assert_eq!(FailureMode::MacroParticle.wear_rate(), WearRate::Severe);
        assert_eq!(FailureMode::Slip.wear_rate(), WearRate::Low);
        assert_eq!(FailureMode::LargeParticle.wear_rate(), WearRate::Mild);
    }

    #[test]
    fn default_thresholds_are_valid() {
        ClassifierConfig::default().validate().unwrap();
        let bad = ClassifierConfig {
            loc_threshold: 1.5,
            ..ClassifierConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
