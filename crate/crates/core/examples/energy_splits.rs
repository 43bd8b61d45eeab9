//! Compares how the three energy splits degrade tension, compression and shear.
//!
//! `cargo run --example energy_splits`

use junction_wear::energy::{split_energy, stress, MaterialParams, SplitKind};
use junction_wear::tensor::Sym2;

fn main() {
    let mat = MaterialParams::default();
    let states = [
        ("tension", Sym2::spherical(0.01)),
        ("compression", Sym2::spherical(-0.01)),
        ("simple shear", Sym2::new(0.0, 0.0, 0.01)),
        ("shear + compression", Sym2::new(-0.01, -0.005, 0.01)),
    ];
    println!("{:<22} {:<8} {:>12} {:>12} {:>12}", "strain", "split", "intact", "degradable", "sigma_xy(a=1)");
    for (name, eps) in states {
        for split in SplitKind::ALL {
            let e = split_energy(&eps, &mat, split);
            let s = stress(&eps, mat.eta, &mat, split);
            println!(
                "{name:<22} {:<8} {:>12.4e} {:>12.4e} {:>12.4e}",
                split.label(),
                e.intact,
                e.degradable,
                s.xy
            );
        }
    }
}
