//! Stress invariants, display masks, damage regions and failure classification.

pub mod classify;
pub mod regions;

pub use classify::{classify_failure, ClassifierConfig, Classification, FailureMode, WearRate};
pub use regions::{extract_damage_regions, DamageRegion};

use serde::{Deserialize, Serialize};

use crate::energy::{self, MaterialParams, SplitKind};
use crate::fem::FemModel;
use crate::tensor::Sym2;

/// Equivalent, hydrostatic and positive hydrostatic stress.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StressInvariants {
    pub sigma_eq: f64,
    pub sigma_h: f64,
    pub sigma_m_plus: f64,
}

/// In-plane invariants: `σ_eq = sqrt(3/2 σ_d:σ_d)` and `σ_h = tr σ / 2`.
pub fn stress_invariants(sigma: &Sym2) -> StressInvariants {
    let d = sigma.deviator();
    let sigma_h = 0.5 * sigma.trace();
    StressInvariants {
        sigma_eq: (1.5 * d.norm_sq()).sqrt(),
        sigma_h,
        sigma_m_plus: sigma_h.max(0.0),
    }
}

/// Visualization bands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisplayThresholds {
    pub damage: f64,
    pub sigma_eq: [f64; 2],
    pub tension: [f64; 2],
    pub compression: [f64; 2],
}

impl Default for DisplayThresholds {
    fn default() -> Self {
        DisplayThresholds {
            damage: 1e-3,
            sigma_eq: [0.5, 5.0],
            tension: [0.5, 4.0],
            compression: [-5.0, -0.5],
        }
    }
}

/// Per-element raw fields and their display masks.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplayFields {
    pub stress: Vec<Sym2>,
    pub invariants: Vec<StressInvariants>,
    pub alpha_mean: Vec<f64>,
    pub damage_mask: Vec<bool>,
    pub sigma_eq_clipped: Vec<f64>,
    pub tension_mask: Vec<bool>,
    pub compression_mask: Vec<bool>,
}

/// Element stresses of a solved state and their thresholded views.
pub fn threshold_fields(
    model: &FemModel,
    mat: &MaterialParams,
    split: SplitKind,
    u: &[f64],
    alpha: &[f64],
    bands: &DisplayThresholds,
) -> DisplayFields {
    let stress: Vec<Sym2> = model
        .elements
        .iter()
        .map(|el| {
            let g = mat.eta + el.mean_square_complement(alpha);
            energy::stress(&el.strain(u), g, mat, split)
        })
        .collect();
    let invariants: Vec<StressInvariants> = stress.iter().map(stress_invariants).collect();
    let alpha_mean = model.element_means(alpha);
    let within = |v: f64, b: [f64; 2]| v >= b[0] && v <= b[1];
    DisplayFields {
        damage_mask: alpha_mean.iter().map(|&a| a >= bands.damage).collect(),
        sigma_eq_clipped: invariants
            .iter()
            .map(|s| s.sigma_eq.clamp(bands.sigma_eq[0], bands.sigma_eq[1]))
            .collect(),
        tension_mask: invariants.iter().map(|s| within(s.sigma_h, bands.tension)).collect(),
        compression_mask: invariants.iter().map(|s| within(s.sigma_h, bands.compression)).collect(),
        stress,
        invariants,
        alpha_mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_of_simple_states() {
        let z = stress_invariants(&Sym2::ZERO);
        assert_eq!(z, StressInvariants::default());
        let s = stress_invariants(&Sym2::new(0.0, 0.0, 2.0));
        assert_eq!(s.sigma_h, 0.0);
        assert!((s.sigma_eq - 3f64.sqrt() * 2.0).abs() < 1e-14);
        let p = stress_invariants(&Sym2::spherical(-1.5));
        assert_eq!(p.sigma_h, -1.5);
        assert_eq!(p.sigma_eq, 0.0);
        assert_eq!(p.sigma_m_plus, 0.0);
    }
}
