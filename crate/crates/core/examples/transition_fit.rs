//! Fits the transition constant C in J* = C / (H/D) to a sweep table.
//!
//! With a path argument the table is read from a `jwear sweep` output; without one a
//! synthetic table following C = 0.27 is used.
//!
//! `cargo run --example transition_fit -- [sweep.csv]`

use junction_wear::energy::SplitKind;
use junction_wear::io::read_sweep_csv;
use junction_wear::post::{ClassifierConfig, FailureMode};
use junction_wear::study::{fit_transition, linspace_step, RunMeta, SweepPoint};

fn synthetic(c: f64) -> Vec<SweepPoint> {
    let mut pts = Vec::new();
    for h in [0.4, 0.5, 0.6, 0.7] {
        for j in linspace_step(0.1, 1.0, 0.1) {
            let mode = if j < c / h { FailureMode::SmallParticle } else { FailureMode::LargeParticle };
            pts.push(SweepPoint {
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
    pts
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pts = match std::env::args().nth(1) {
        Some(p) => read_sweep_csv(p.as_ref())?,
        None => synthetic(0.27),
    };
    let fit = fit_transition(&pts)?;
    for (h, why) in &fit.excluded {
        println!("H/D {h}: excluded ({why})");
    }
    for b in &fit.brackets {
        println!(
            "H/D {:.2}: J* in [{:.2}, {:.2}] -> midpoint {:.3}, fit {:.3}",
            b.h_over_d,
            b.j_small,
            b.j_large,
            b.midpoint(),
            fit.predict(b.h_over_d)
        );
    }
    println!("C = {:.4} +/- {:.4}, rms residual {:.4}", fit.c, fit.c_uncertainty, fit.residual);
    Ok(())
}
