//! Homogeneous-strip verification problems with closed-form answers.

use serde::{Deserialize, Serialize};

use crate::energy::{nucleation_stress, numerical_toughness, MaterialParams, SplitKind};
use crate::error::Result;
use crate::fem::{BoundaryConditions, FemModel};
use crate::mesh::RectangleMesh;
use crate::solver::{Simulation, SimulationState, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NucleationResult {
    pub sigma_c: f64,
    /// Midpoint of the bracket below.
    pub onset_stress: f64,
    /// Stress at the last undamaged step.
    pub last_intact_stress: f64,
    /// Intact-response stress at the first load step carrying damage.
    pub first_damaged_stress: f64,
    pub onset_step: usize,
}

impl NucleationResult {
    pub fn relative_error(&self) -> f64 {
        (self.onset_stress - self.sigma_c).abs() / self.sigma_c
    }
}

fn strip(width: f64, height: f64, delta: f64) -> Result<FemModel> {
    let nx = (width / delta).round().max(1.0) as usize;
    let ny = (height / delta).round().max(1.0) as usize;
    FemModel::new(RectangleMesh::new(0.0, 0.0, width, height, nx, ny).alternating().build()?)
}

/// Uniaxial plane-strain tension of a strip loaded in steps of `σ_c / steps_to_onset`.
pub fn strip_nucleation(
    split: SplitKind,
    mat: &MaterialParams,
    delta: f64,
    width: f64,
    height: f64,
    steps_to_onset: usize,
) -> Result<NucleationResult> {
    let model = strip(width, height, delta)?;
    let sigma_c = nucleation_stress(mat);
    let e_eff = mat.plane_strain_modulus();
    let du = sigma_c / e_eff * height / steps_to_onset as f64;
    let cfg = SolverConfig {
        max_steps: 2 * steps_to_onset,
        startup_steps: 0,
        ..SolverConfig::default()
    };
    let bcs = BoundaryConditions::uniaxial_tension(&model.mesh)?;
    let mut sim = Simulation::new(&model, *mat, split, bcs, cfg)?;
    let mut last_intact: Option<(f64, f64)> = None;
    let mut onset: Option<(usize, f64)> = None;
    let mut watch = |r: &crate::solver::StepRecord| {
        if onset.is_some() {
            return;
        }
        if r.max_alpha > 0.0 {
            onset = Some((r.step, r.u_t));
        } else {
            last_intact = Some((r.u_t, r.reaction.abs() / width));
        }
    };
    sim.run_observed(SimulationState::initial(model.num_nodes()), du, &mut watch)?;
    let (step, u_onset) = onset.ok_or_else(|| crate::error::Error::NotConverged {
        iterations: 2 * steps_to_onset,
        residual: f64::NAN,
    })?;
    let (u_prev, s_prev) = last_intact.unwrap_or((0.0, 0.0));
    let upper = if u_prev > 0.0 { s_prev * u_onset / u_prev } else { f64::NAN };
    Ok(NucleationResult {
        sigma_c,
        onset_stress: 0.5 * (s_prev + upper),
        last_intact_stress: s_prev,
        first_damaged_stress: upper,
        onset_step: step,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrackEnergyResult {
    pub energy_per_length: f64,
    pub numerical_toughness: f64,
}

impl CrackEnergyResult {
    pub fn relative_error(&self) -> f64 {
        (self.energy_per_length - self.numerical_toughness).abs() / self.numerical_toughness
    }
}

/// Straight crack seeded as a fully damaged element layer across a strip, then
/// relaxed by alternate minimization under a small opening.
pub fn crack_band_energy(mat: &MaterialParams, delta: f64, width: f64, height: f64) -> Result<CrackEnergyResult> {
    let model = strip(width, height, delta)?;
    let ny = (height / delta).round() as usize;
    let row = (ny / 2) as f64 * height / ny as f64;
    let n = model.num_nodes();
    let mut state = SimulationState::initial(n);
    for (k, p) in model.mesh.nodes.iter().enumerate() {
        let y = p[1];
        if (y - row).abs() < 1e-9 * height || (y - row - height / ny as f64).abs() < 1e-9 * height {
            state.alpha_lower[k] = 1.0;
            state.alpha[k] = 1.0;
        }
    }
    let bcs = BoundaryConditions::uniaxial_tension(&model.mesh)?;
    let cfg = SolverConfig {
        tol_alpha: 1e-8,
        ..SolverConfig::default()
    };
    let mut sim = Simulation::new(&model, *mat, SplitKind::PositiveHydrostatic, bcs, cfg)?;
    // opening well below the bulk strength
    state.u_t = 0.1 * nucleation_stress(mat) / mat.plane_strain_modulus() * height;
    sim.alternate_minimize(&mut state, None)?;
    Ok(CrackEnergyResult {
        energy_per_length: state.energies.fracture / width,
        numerical_toughness: numerical_toughness(mat.toughness, delta, mat.ell),
    })
}
