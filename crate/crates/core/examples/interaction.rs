//! Real and apparent contact lengths of a junction pair, and optionally the simulated
//! mechanism for each gap.
//!
//! `cargo run --release --example interaction -- [J] [H/D] [C] [--run]`

use junction_wear::io::RunConfig;
use junction_wear::study::{interaction_coordinates, macro_persistence_violations, sweep_interaction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).filter(|a| a != "--run").collect();
    let run = std::env::args().any(|a| a == "--run");
    let j: f64 = args.first().map_or(Ok(0.7), |s| s.parse())?;
    let h: f64 = args.get(1).map_or(Ok(0.6), |s| s.parse())?;
    let c: f64 = args.get(2).map_or(Ok(0.27), |s| s.parse())?;
    let deltas = [0.5, 1.0, 1.5, 2.0];

    println!("{:>8} {:>8} {:>8}", "Delta/D", "j_r", "j_a");
    for dl in deltas {
        let k = interaction_coordinates(1.0, h, j, dl, c);
        println!("{dl:>8} {:>8.4} {:>8.4}", k.j_r, k.j_a);
    }
    if run {
        let base = RunConfig::desk();
        let pts = sweep_interaction(&[(j, h)], &[1.0, 1.5], &base, c, 1, None)?;
        for p in &pts {
            println!("Delta/D {:.2}: {} ({} particle events)", p.delta_gap, p.mode, p.particle_events);
        }
        for v in macro_persistence_violations(&pts) {
            println!("warning: {v}");
        }
    }
    Ok(())
}
