//! CSV tables: load histories, sweep and interaction results, crossing times.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use super::fmt_f64;
use crate::error::{Error, Result};
use crate::post::ClassifierConfig;
use crate::solver::{Crossings, StepRecord};
use crate::study::{InteractionPoint, RunMeta, SweepPoint};

pub const HISTORY_HEADER: [&str; 9] = [
    "step",
    "u_t",
    "elastic_energy",
    "fracture_energy",
    "total_energy",
    "reaction_force",
    "max_alpha",
    "altmin_iters",
    "converged",
];

fn to_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn history_to_string(history: &[StepRecord]) -> Result<String> {
    to_csv(
        &HISTORY_HEADER,
        history.iter().map(|r| {
            vec![
                r.step.to_string(),
                fmt_f64(r.u_t),
                fmt_f64(r.elastic),
                fmt_f64(r.fracture),
                fmt_f64(r.total),
                fmt_f64(r.reaction),
                fmt_f64(r.max_alpha),
                r.altmin_iterations.to_string(),
                r.converged.to_string(),
            ]
        }),
    )
}

pub fn write_history_csv(path: &Path, history: &[StepRecord]) -> Result<()> {
    std::fs::write(path, history_to_string(history)?)?;
    Ok(())
}

/// Elements with a recorded crossing as `element,step,iteration`.
pub fn write_crossings(path: &Path, crossings: &Crossings) -> Result<()> {
    let text = to_csv(
        &["element", "step", "iteration"],
        crossings
            .iter()
            .enumerate()
            .filter_map(|(e, c)| c.map(|(s, i)| vec![e.to_string(), s.to_string(), i.to_string()])),
    )?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_crossings(path: &Path, num_elements: usize) -> Result<Crossings> {
    let mut out = vec![None; num_elements];
    for row in Table::read(path)?.rows() {
        let e: usize = row.get("element")?;
        if e >= num_elements {
            return Err(row.error(format!("element {e} out of range")));
        }
        out[e] = Some((row.get("step")?, row.get("iteration")?));
    }
    Ok(out)
}

const SWEEP_HEADER: [&str; 22] = [
    "J",
    "H_over_D",
    "ell_over_D",
    "delta_over_D",
    "split",
    "mode",
    "wear_rate",
    "particle_events",
    "steps",
    "failure_step",
    "converged",
    "elastic_energy",
    "fracture_energy",
    "wall_time_s",
    "loc_threshold",
    "interface_distance",
    "interface_coverage",
    "interface_area_fraction",
    "orientation_tol_deg",
    "corner_radius",
    "min_region_length",
    "error",
];

const INTERACTION_HEADER: [&str; 17] = [
    "J",
    "H_over_D",
    "Delta_over_D",
    "C",
    "j_r",
    "j_a",
    "split",
    "mode",
    "wear_rate",
    "particle_events",
    "steps",
    "failure_step",
    "converged",
    "elastic_energy",
    "fracture_energy",
    "wall_time_s",
    "error",
];

fn meta_fields(m: &RunMeta) -> [String; 6] {
    [
        m.steps.to_string(),
        m.failure_step.map_or(String::new(), |s| s.to_string()),
        m.converged.to_string(),
        fmt_f64(m.elastic_energy),
        fmt_f64(m.fracture_energy),
        fmt_f64(m.wall_time_s),
    ]
}

fn read_meta(row: &Row<'_>) -> Result<RunMeta> {
    let error = row.str("error")?;
    Ok(RunMeta {
        steps: row.get("steps")?,
        failure_step: row.opt("failure_step")?,
        converged: row.get("converged")?,
        wall_time_s: row.get("wall_time_s")?,
        elastic_energy: row.get("elastic_energy")?,
        fracture_energy: row.get("fracture_energy")?,
        error: (!error.is_empty()).then(|| error.to_string()),
    })
}

pub fn sweep_to_string(points: &[SweepPoint]) -> Result<String> {
    to_csv(
        &SWEEP_HEADER,
        points.iter().map(|p| {
            let c = &p.classifier;
            let mut r = vec![
                fmt_f64(p.j),
                fmt_f64(p.h_over_d),
                fmt_f64(p.ell_over_d),
                fmt_f64(p.delta_over_d),
                p.split.to_string(),
                p.mode.to_string(),
                p.mode.wear_rate().to_string(),
                p.particle_events.to_string(),
            ];
            r.extend(meta_fields(&p.meta));
            r.extend(
                [
                    c.loc_threshold,
                    c.interface_distance,
                    c.interface_coverage,
                    c.interface_area_fraction,
                    c.orientation_tol_deg,
                    c.corner_radius,
                    c.min_region_length,
                ]
                .map(fmt_f64),
            );
            r.push(p.meta.error.clone().unwrap_or_default());
            r
        }),
    )
}

pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> Result<()> {
    std::fs::write(path, sweep_to_string(points)?)?;
    Ok(())
}

/// Reads a sweep table; only `J`, `H_over_D` and `mode` are required.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepPoint>> {
    parse_sweep(&Table::read(path)?)
}

pub fn parse_sweep_str(text: &str) -> Result<Vec<SweepPoint>> {
    parse_sweep(&Table::parse(text.as_bytes())?)
}

fn parse_sweep(t: &Table) -> Result<Vec<SweepPoint>> {
    let d = ClassifierConfig::default();
    t.rows()
        .map(|row| {
            let or = |name: &str, v: f64| -> Result<f64> { Ok(row.opt(name)?.unwrap_or(v)) };
            Ok(SweepPoint {
                j: row.get("J")?,
                h_over_d: row.get("H_over_D")?,
                ell_over_d: or("ell_over_D", f64::NAN)?,
                delta_over_d: or("delta_over_D", f64::NAN)?,
                split: row.opt("split")?.unwrap_or(crate::energy::SplitKind::PositiveHydrostatic),
                mode: row.get("mode")?,
                particle_events: row.opt("particle_events")?.unwrap_or(0),
                meta: if row.has("steps") { read_meta(&row)? } else { RunMeta::default() },
                classifier: ClassifierConfig {
                    loc_threshold: or("loc_threshold", d.loc_threshold)?,
                    interface_distance: or("interface_distance", d.interface_distance)?,
                    interface_coverage: or("interface_coverage", d.interface_coverage)?,
                    interface_area_fraction: or("interface_area_fraction", d.interface_area_fraction)?,
                    orientation_tol_deg: or("orientation_tol_deg", d.orientation_tol_deg)?,
                    corner_radius: or("corner_radius", d.corner_radius)?,
                    min_region_length: or("min_region_length", d.min_region_length)?,
                },
            })
        })
        .collect()
}

pub fn interaction_to_string(points: &[InteractionPoint]) -> Result<String> {
    to_csv(
        &INTERACTION_HEADER,
        points.iter().map(|p| {
            let mut r = vec![
                fmt_f64(p.j),
                fmt_f64(p.h_over_d),
                fmt_f64(p.delta_gap),
                fmt_f64(p.c),
                fmt_f64(p.j_r),
                fmt_f64(p.j_a),
                p.split.to_string(),
                p.mode.to_string(),
                p.mode.wear_rate().to_string(),
                p.particle_events.to_string(),
            ];
            r.extend(meta_fields(&p.meta));
            r.push(p.meta.error.clone().unwrap_or_default());
            r
        }),
    )
}

pub fn write_interaction_csv(path: &Path, points: &[InteractionPoint]) -> Result<()> {
    std::fs::write(path, interaction_to_string(points)?)?;
    Ok(())
}

pub fn read_interaction_csv(path: &Path) -> Result<Vec<InteractionPoint>> {
    let t = Table::read(path)?;
    t.rows()
        .map(|row| {
            Ok(InteractionPoint {
                j: row.get("J")?,
                h_over_d: row.get("H_over_D")?,
                delta_gap: row.get("Delta_over_D")?,
                c: row.get("C")?,
                j_r: row.get("j_r")?,
                j_a: row.get("j_a")?,
                split: row.get("split")?,
                mode: row.get("mode")?,
                particle_events: row.get("particle_events")?,
                meta: read_meta(&row)?,
            })
        })
        .collect()
}

/// Header-indexed string table.
struct Table {
    columns: HashMap<String, usize>,
    records: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Table> {
        Table::parse(std::fs::File::open(path)?)
    }

    fn parse(src: impl std::io::Read) -> Result<Table> {
        let mut r = csv::Reader::from_reader(src);
        let columns = r
            .headers()?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        let records = r.records().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Table { columns, records })
    }

    fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.records.iter().enumerate().map(|(k, rec)| Row {
            table: self,
            rec,
            line: k + 2,
        })
    }
}

struct Row<'a> {
    table: &'a Table,
    rec: &'a csv::StringRecord,
    line: usize,
}

impl Row<'_> {
    fn error(&self, message: String) -> Error {
        Error::Parse {
            line: self.line,
            message,
        }
    }

    fn has(&self, name: &str) -> bool {
        self.table.columns.contains_key(name)
    }

    fn str(&self, name: &str) -> Result<&str> {
        let i = *self
            .table
            .columns
            .get(name)
            .ok_or_else(|| self.error(format!("missing column `{name}`")))?;
        Ok(self.rec.get(i).unwrap_or("").trim())
    }

    fn get<T: FromStr>(&self, name: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(name)?
            .ok_or_else(|| self.error(format!("empty value in column `{name}`")))
    }

    /// Absent column or empty cell gives `None`.
    fn opt<T: FromStr>(&self, name: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if !self.has(name) {
            return Ok(None);
        }
        let s = self.str(name)?;
        if s.is_empty() {
            return Ok(None);
        }
        s.parse()
            .map(Some)
            .map_err(|e| self.error(format!("column `{name}`: cannot parse `{s}`: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::SplitKind;
    use crate::post::FailureMode;

    fn record(step: usize, fracture: f64) -> StepRecord {
        StepRecord {
            step,
            u_t: 0.1 * step as f64,
            elastic: 0.5 * step as f64,
            fracture,
            total: 0.5 * step as f64 + fracture,
            reaction: 1.0,
            max_alpha: 0.0,
            altmin_iterations: 1,
            converged: true,
            max_energy_rise: 0.0,
            min_alpha_increment: 0.0,
        }
    }

    #[test]
    fn empty_history_is_header_only() {
        let s = history_to_string(&[]).unwrap();
        assert_eq!(s, format!("{}\n", HISTORY_HEADER.join(",")));
    }

    #[test]
    fn history_rows_parse_back() {
        let s = history_to_string(&[record(1, 0.0), record(2, 0.0)]).unwrap();
        let t = Table::parse(s.as_bytes()).unwrap();
        for row in t.rows() {
            let e: f64 = row.get("elastic_energy").unwrap();
            let tot: f64 = row.get("total_energy").unwrap();
            assert!((e - tot).abs() <= 1e-12);
            assert!(row.get::<bool>("converged").unwrap());
        }
    }

    #[test]
    fn sweep_round_trip() {
        let p = SweepPoint {
            j: 0.1 + 0.2,
            h_over_d: 0.45,
            ell_over_d: 0.04,
            delta_over_d: 0.01,
            split: SplitKind::HydrostaticDeviatoric,
            mode: FailureMode::SingleShearBand,
            particle_events: 0,
            meta: RunMeta {
                steps: 80,
                failure_step: Some(79),
                converged: true,
                wall_time_s: 12.5,
                elastic_energy: 1.0 / 3.0,
                fracture_energy: 0.25,
                error: None,
            },
            classifier: ClassifierConfig::default(),
        };
        let mut q = p.clone();
        q.mode = FailureMode::Mixed;
        q.meta = RunMeta {
            error: Some("linear system is singular: x, \"y\"".into()),
            ..RunMeta::default()
        };
        let text = sweep_to_string(&[p.clone(), q.clone()]).unwrap();
        assert_eq!(parse_sweep_str(&text).unwrap(), vec![p, q]);
    }

    #[test]
    fn minimal_sweep_columns() {
        let pts = parse_sweep_str("J,H_over_D,mode\n0.5,0.3,SmallParticle\n0.6,0.3,LargeParticle\n").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].mode, FailureMode::LargeParticle);
        match parse_sweep_str("J,H_over_D,mode\n0.5,0.3,Debris\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
