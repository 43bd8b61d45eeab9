//! Prints a character map of the final damage of a run directory written by
//! `jwear run`: `#` for α ≥ 0.5, `+` for α > 0.1, `.` for intact material.
//!
//! `cargo run --release --example damage_map -- <run_dir> [x0 x1 y0 y1]`

use std::path::PathBuf;

use junction_wear::fem::FemModel;
use junction_wear::mesh::Mesh;
use junction_wear::solver::read_checkpoint;

const COLS: usize = 120;
const ROWS: usize = 32;

fn rank(c: char) -> u8 {
    match c {
        '#' => 3,
        '+' => 2,
        '.' => 1,
        _ => 0,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().ok_or("usage: damage_map <run_dir> [x0 x1 y0 y1]")?);
    let window: Vec<f64> = args.map(|s| s.parse()).collect::<Result<_, _>>()?;
    let mesh = Mesh::from_text(&std::fs::read_to_string(dir.join("mesh.txt"))?)?;
    let state = read_checkpoint(&dir.join("final.ckpt"))?;
    let model = FemModel::new(mesh)?;
    let means = model.element_means(&state.alpha);

    let (x0, x1, y0, y1) = match window.as_slice() {
        [a, b, c, d] => (*a, *b, *c, *d),
        _ => {
            let damaged: Vec<[f64; 2]> = (0..means.len())
                .filter(|&e| means[e] > 0.1)
                .map(|e| model.mesh.centroid(e))
                .collect();
            if damaged.is_empty() {
                println!("no damage");
                return Ok(());
            }
            let lo = |k: usize| damaged.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = |k: usize| damaged.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            (lo(0) - 0.3, hi(0) + 0.3, lo(1) - 0.3, hi(1) + 0.3)
        }
    };
    let mut grid = vec![vec![' '; COLS]; ROWS];
    for (e, &a) in means.iter().enumerate() {
        let c = model.mesh.centroid(e);
        if c[0] < x0 || c[0] >= x1 || c[1] < y0 || c[1] >= y1 {
            continue;
        }
        let i = ((c[0] - x0) / (x1 - x0) * COLS as f64) as usize;
        let j = ROWS - 1 - ((c[1] - y0) / (y1 - y0) * ROWS as f64) as usize;
        let ch = if a >= 0.5 {
            '#'
        } else if a > 0.1 {
            '+'
        } else {
            '.'
        };
        if rank(ch) > rank(grid[j][i]) {
            grid[j][i] = ch;
        }
    }
    println!("x in [{x0:.3}, {x1:.3}], y in [{y0:.3}, {y1:.3}]");
    for row in grid {
        println!("{}", row.into_iter().collect::<String>());
    }
    Ok(())
}
