//! Legacy ASCII VTK unstructured grids.

use std::fmt::Write as _;
use std::path::Path;

use super::fmt_f64;
use crate::energy::{MaterialParams, SplitKind};
use crate::error::Result;
use crate::fem::FemModel;
use crate::post::{threshold_fields, DisplayThresholds};
use crate::solver::Snapshot;

const VTK_TRIANGLE: u8 = 5;

/// Point data `alpha` and `u` (two components); cell data stresses, invariants and masks.
pub fn snapshot_to_vtk(
    model: &FemModel,
    mat: &MaterialParams,
    split: SplitKind,
    snap: &Snapshot,
    bands: &DisplayThresholds,
) -> String {
    let mesh = &model.mesh;
    let (n, m) = (mesh.num_nodes(), mesh.num_triangles());
    let f = threshold_fields(model, mat, split, &snap.u, &snap.alpha, bands);
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "junction-wear step {} u_t {}", snap.step, fmt_f64(snap.u_t));
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for p in &mesh.nodes {
        let _ = writeln!(s, "{} {} 0", fmt_f64(p[0]), fmt_f64(p[1]));
    }
    let _ = writeln!(s, "CELLS {m} {}", 4 * m);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {m}");
    for _ in 0..m {
        let _ = writeln!(s, "{VTK_TRIANGLE}");
    }

    let _ = writeln!(s, "POINT_DATA {n}");
    let _ = writeln!(s, "SCALARS alpha double 1\nLOOKUP_TABLE default");
    for a in &snap.alpha {
        let _ = writeln!(s, "{}", fmt_f64(a.clamp(0.0, 1.0)));
    }
    let _ = writeln!(s, "SCALARS u double 2\nLOOKUP_TABLE default");
    for k in 0..n {
        let _ = writeln!(s, "{} {}", fmt_f64(snap.u[2 * k]), fmt_f64(snap.u[2 * k + 1]));
    }

    let _ = writeln!(s, "CELL_DATA {m}");
    let mut scalars = |name: &str, vals: &mut dyn Iterator<Item = f64>| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in vals {
            let _ = writeln!(s, "{}", fmt_f64(v));
        }
    };
    scalars("sigma_xx", &mut f.stress.iter().map(|t| t.xx));
    scalars("sigma_yy", &mut f.stress.iter().map(|t| t.yy));
    scalars("sigma_xy", &mut f.stress.iter().map(|t| t.xy));
    scalars("sigma_eq", &mut f.invariants.iter().map(|i| i.sigma_eq));
    scalars("sigma_h", &mut f.invariants.iter().map(|i| i.sigma_h));
    scalars("sigma_eq_clipped", &mut f.sigma_eq_clipped.iter().copied());
    scalars("alpha_mean", &mut f.alpha_mean.iter().copied());
    let mut mask = |name: &str, vals: &[bool]| {
        let _ = writeln!(s, "SCALARS {name} int 1\nLOOKUP_TABLE default");
        for &v in vals {
            let _ = writeln!(s, "{}", u8::from(v));
        }
    };
    mask("damage_mask", &f.damage_mask);
    mask("tension_mask", &f.tension_mask);
    mask("compression_mask", &f.compression_mask);
    let _ = writeln!(s, "SCALARS region int 1\nLOOKUP_TABLE default");
    for r in &mesh.regions {
        let _ = writeln!(s, "{}", r.id());
    }
    s
}

pub fn write_field_snapshot(
    path: &Path,
    model: &FemModel,
    mat: &MaterialParams,
    split: SplitKind,
    snap: &Snapshot,
    bands: &DisplayThresholds,
) -> Result<()> {
    std::fs::write(path, snapshot_to_vtk(model, mat, split, snap, bands))?;
    Ok(())
}
