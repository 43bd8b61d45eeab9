//! Regularization-length study: strength, numerical toughness and the analytical bound
//! over the G1/G2 grids, with an optional simulated sweep.
//!
//! `cargo run --release --example regularization_study -- [G1|G2] [--run]`

use junction_wear::energy::{nucleation_stress, numerical_toughness};
use junction_wear::io::RunConfig;
use junction_wear::study::{point_config, preset, sweep_single, theoretical_bound};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).filter(|a| a != "--run").unwrap_or_else(|| "G1".into());
    let run = std::env::args().any(|a| a == "--run");
    let p = preset(&name).ok_or("unknown preset, expected G1 or G2")?;
    let base = RunConfig::desk();

    println!("{} : J = {:?}, H/D = {:?}", p.name, p.grid.js, p.grid.h_over_ds);
    println!("{:>7} {:>8} {:>9} {:>9} {:>12}", "ell/D", "delta", "sigma_c", "Gc_num", "bound(H=0.5)");
    for &l in &p.grid.ell_over_ds {
        let cfg = point_config(&base, p.grid.js[0], 0.5, Some(l));
        let m = &cfg.material;
        println!(
            "{l:>7} {:>8.5} {:>9.4} {:>9.5} {:>12.5}",
            cfg.mesh.delta_fine,
            nucleation_stress(m),
            numerical_toughness(m.toughness, cfg.mesh.delta_fine, m.ell),
            theoretical_bound(1.0, 1.0, m, 0.5, 1.0).from_length
        );
    }
    if run {
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
        for pt in sweep_single(&p.grid, &base, threads, None)? {
            println!("J {:.2} H/D {:.2} ell/D {:.4}: {}", pt.j, pt.h_over_d, pt.ell_over_d, pt.mode);
        }
    }
    Ok(())
}
