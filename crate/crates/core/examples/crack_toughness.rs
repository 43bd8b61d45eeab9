//! Fracture energy per unit length of a relaxed straight crack versus the numerical toughness.
//!
//! `cargo run --release --example crack_toughness -- [ell] [delta]`

use junction_wear::energy::MaterialParams;
use junction_wear::study::benchmarks::crack_band_energy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ell: f64 = args.first().map_or(Ok(0.02), |s| s.parse())?;
    let delta: f64 = args.get(1).map_or(Ok(ell / 4.0), |s| s.parse())?;
    let mat = MaterialParams::default().with_ell(ell);
    let r = crack_band_energy(&mat, delta, 0.1, 24.0 * ell)?;
    println!(
        "ell {ell}, delta {delta}: energy/length {:.5}, Gc_num {:.5}, error {:.2}%",
        r.energy_per_length,
        r.numerical_toughness,
        100.0 * r.relative_error()
    );
    Ok(())
}
