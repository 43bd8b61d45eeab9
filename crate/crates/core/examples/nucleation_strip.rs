//! Damage onset in a homogeneous plane-strain strip against the analytical strength.
//!
//! `cargo run --release --example nucleation_strip -- [ell] [steps_to_onset]`

use junction_wear::energy::{MaterialParams, SplitKind};
use junction_wear::study::benchmarks::strip_nucleation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ell: f64 = args.first().map_or(Ok(0.02), |s| s.parse())?;
    let steps: usize = args.get(1).map_or(Ok(100), |s| s.parse())?;
    let mat = MaterialParams::default().with_ell(ell);
    for split in SplitKind::ALL {
        let r = strip_nucleation(split, &mat, ell / 4.0, 0.1, 0.2, steps)?;
        println!(
            "{:<8} sigma_c {:.4}  onset {:.4} (bracket {:.4}..{:.4}, step {})  error {:.2}%",
            split.label(),
            r.sigma_c,
            r.onset_stress,
            r.last_intact_stress,
            r.first_damaged_stress,
            r.onset_step,
            100.0 * r.relative_error()
        );
    }
    Ok(())
}
