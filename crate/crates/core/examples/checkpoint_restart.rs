//! Stops a strip run half way, restarts it from a checkpoint and compares the result
//! with an uninterrupted run.
//!
//! `cargo run --release --example checkpoint_restart`

use junction_wear::energy::{nucleation_stress, MaterialParams, SplitKind};
use junction_wear::fem::{BoundaryConditions, FemModel};
use junction_wear::mesh::RectangleMesh;
use junction_wear::solver::{read_checkpoint, write_checkpoint, Simulation, SimulationState, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = FemModel::new(RectangleMesh::new(0.0, 0.0, 0.2, 0.4, 10, 20).alternating().build()?)?;
    let mat = MaterialParams::default().with_ell(0.04);
    let du = nucleation_stress(&mat) / mat.plane_strain_modulus() * 0.4 / 40.0;
    let cfg = |steps| SolverConfig {
        max_steps: steps,
        stop_at_failure: false,
        ..SolverConfig::default()
    };
    let sim = |steps| -> Result<Simulation<'_>, junction_wear::Error> {
        let bcs = BoundaryConditions::uniaxial_tension(&model.mesh)?;
        Simulation::new(&model, mat, SplitKind::PositiveHydrostatic, bcs, cfg(steps))
    };
    let full = sim(90)?.run(SimulationState::initial(model.num_nodes()), du)?;

    let first = sim(45)?.run(SimulationState::initial(model.num_nodes()), du)?;
    let path = std::env::temp_dir().join("junction_wear_restart.ckpt");
    write_checkpoint(&path, &first.final_state)?;
    let restored = read_checkpoint(&path)?;
    let second = sim(45)?.run(restored, du)?;

    let a = &full.final_state;
    let b = &second.final_state;
    let diff = a.alpha.iter().zip(&b.alpha).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    println!("uninterrupted: step {} max alpha {:.6} reaction {:.6}", a.step, a.max_alpha(), a.reaction);
    println!("restarted:     step {} max alpha {:.6} reaction {:.6}", b.step, b.max_alpha(), b.reaction);
    println!("max |alpha difference| = {diff:e}");
    Ok(())
}
