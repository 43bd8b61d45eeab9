//! Configuration files and everything written to disk.

pub mod config;
pub mod report;
pub mod tables;
pub mod vtk;

pub use config::{load_config, parse_config, MeshSettings, OutputConfig, RunConfig};
pub use report::{parse_report, FailureReport};
pub use tables::{
    history_to_string, read_crossings, read_interaction_csv, read_sweep_csv, parse_sweep_str, write_crossings, write_history_csv,
    write_interaction_csv, write_sweep_csv,
};
pub use vtk::{snapshot_to_vtk, write_field_snapshot};

/// Float with 17 significant digits, stable across platforms.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.16e}")
    }
}
