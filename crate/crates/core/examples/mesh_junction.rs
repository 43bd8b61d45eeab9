//! Meshes a single or double junction and writes the mesh and its planar outline.
//!
//! `cargo run --release --example mesh_junction -- [H/D] [J] [delta] [Delta] [out_dir]`

use std::path::PathBuf;

use junction_wear::geometry::{build_junction, JunctionParams};
use junction_wear::mesh::{triangulate, MeshOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: f64| args.get(i).map_or(Ok(d), |s| s.parse::<f64>());
    let (h, j, delta) = (arg(0, 0.5)?, arg(1, 0.5)?, arg(2, 0.02)?);
    let params = match args.get(3) {
        Some(g) => JunctionParams::double(h, j, g.parse()?),
        None => JunctionParams::single(h, j),
    };
    let out = PathBuf::from(args.get(4).map_or("out/mesh", String::as_str));

    let geom = build_junction(&params)?;
    println!(
        "domain [{:.3}, {:.3}] x [{:.3}, {:.3}], area {:.5}",
        geom.x_min, geom.x_max, geom.y_bottom, geom.y_top, geom.area()
    );
    for (k, c) in geom.landmarks.junction_corners.iter().enumerate() {
        println!("junction corner {k}: ({:.4}, {:.4})", c[0], c[1]);
    }
    for (k, c) in geom.landmarks.bulk_corners.iter().enumerate() {
        println!("bulk corner {k}: ({:.4}, {:.4})", c[0], c[1]);
    }
    let mesh = triangulate(&geom, &MeshOptions::new(delta, 8.0 * delta))?;
    print!("{}", mesh.quality_report());
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("junction.poly"), geom.to_poly_string())?;
    std::fs::write(out.join("mesh.txt"), mesh.to_text())?;
    println!("wrote {}", out.display());
    Ok(())
}
