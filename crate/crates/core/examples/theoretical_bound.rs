//! Tabulates the energy-balance lower bound on the transition junction ratio.
//!
//! `cargo run --example theoretical_bound -- [alpha_shape] [beta_shape]`

use junction_wear::energy::MaterialParams;
use junction_wear::study::theoretical_bound;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let a: f64 = args.first().map_or(Ok(1.0), |s| s.parse())?;
    let b: f64 = args.get(1).map_or(Ok(1.0), |s| s.parse())?;
    println!("{:>8} {:>6} {:>10} {:>10} {:>10} {:>8}", "ell/D", "H/D", "length", "strength", "sigma_c", "C_eq");
    for ell in [0.005, 0.01, 0.02, 0.03, 0.04] {
        for h in [0.3, 0.5, 0.8] {
            let mat = MaterialParams::default().with_ell(ell);
            let r = theoretical_bound(a, b, &mat, h, 1.0);
            println!(
                "{ell:>8} {h:>6} {:>10.5} {:>10.5} {:>10.4} {:>8.4}",
                r.from_length, r.from_strength, r.sigma_c, r.c_equivalent
            );
        }
    }
    Ok(())
}
