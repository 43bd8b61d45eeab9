use std::path::Path;

use junction_wear::io::{parse_config, RunConfig};
use junction_wear::pipeline::{run_case, write_case};
use vtkio::model::{Attribute, DataSet, Piece};

fn coarse() -> RunConfig {
    parse_config(
        "split = \"ph\"\n[geometry]\nH_over_D = 0.5\nS_over_D = 0.5\nfine_margin_over_d = 0.3\n\
         [material]\nell = 0.1\n[mesh]\ndelta_fine = 0.025\n[output]\nsnapshot_every = 10\n",
    )
    .unwrap()
}

fn run_into(dir: &Path) -> (usize, usize) {
    let cfg = coarse();
    let res = run_case(&cfg).unwrap();
    write_case(&res, &cfg, dir).unwrap();
    (res.model.num_nodes(), res.model.num_elements())
}

#[test]
fn outputs_are_reproducible_and_readable() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let (nodes, elements) = run_into(&a);
    run_into(&b);

    for f in ["report.toml", "history.csv", "final.ckpt", "mesh.txt", "crossings.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert!(x == y, "{f} differs between identical runs");
    }

    let history = std::fs::read_to_string(a.join("history.csv")).unwrap();
    let report = junction_wear::io::parse_report(&std::fs::read_to_string(a.join("report.toml")).unwrap()).unwrap();
    let rows: Vec<Vec<f64>> = history
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    assert_eq!(rows.len(), report.steps);
    let header: Vec<&str> = history.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    if let Some(fs) = report.failure_step {
        let (frac, step) = (col("fracture_energy"), col("step"));
        let row = rows.iter().position(|r| r[step] as usize == fs).unwrap();
        assert!(row > 0 && rows[row][frac] > rows[row - 1][frac]);
    }

    let mut snaps: Vec<_> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "vtk"))
        .collect();
    snaps.sort();
    assert!(!snaps.is_empty());
    for p in &snaps {
        let vtk = vtkio::Vtk::import(p).unwrap_or_else(|e| panic!("{}: {e:?}", p.display()));
        let DataSet::UnstructuredGrid { pieces, .. } = vtk.data else {
            panic!("not an unstructured grid")
        };
        let Piece::Inline(piece) = &pieces[0] else { panic!("external piece") };
        assert_eq!(piece.points.len(), 3 * nodes);
        assert_eq!(piece.cells.types.len(), elements);
        let alpha = piece
            .data
            .point
            .iter()
            .find_map(|a| match a {
                Attribute::DataArray(d) if d.name == "alpha" => Some(d.data.clone().cast_into::<f64>().unwrap()),
                _ => None,
            })
            .expect("alpha field");
        assert_eq!(alpha.len(), nodes);
        assert!(alpha.iter().all(|v| (0.0..=1.0).contains(v)));
        let cell_names: Vec<String> = piece
            .data
            .cell
            .iter()
            .filter_map(|a| match a {
                Attribute::DataArray(d) => Some(d.name.clone()),
                _ => None,
            })
            .collect();
        for name in ["sigma_eq", "sigma_h", "region"] {
            assert!(cell_names.iter().any(|n| n == name), "missing {name}");
        }
    }
}
