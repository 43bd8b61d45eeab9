//! Versioned plain-text checkpoint of a solver state.
//!
//! ```text
//! junction-wear-checkpoint 1
//! step 12
//! u_t 1.5e-2
//! nodes 3
//! energies <elastic> <fracture> <total>
//! reaction <value>
//! u
//! <2 × nodes lines>
//! alpha
//! <nodes lines>
//! alpha_lower
//! <nodes lines>
//! ```
//! Floats use the shortest round-trip representation, so restarts are exact.

use std::fmt::Write as _;
use std::path::Path;

use super::{Energies, SimulationState};
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "junction-wear-checkpoint";

pub fn checkpoint_to_string(state: &SimulationState) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {CHECKPOINT_VERSION}");
    let _ = writeln!(s, "step {}", state.step);
    let _ = writeln!(s, "u_t {:e}", state.u_t);
    let _ = writeln!(s, "nodes {}", state.alpha.len());
    let e = state.energies;
    let _ = writeln!(s, "energies {:e} {:e} {:e}", e.elastic, e.fracture, e.total);
    let _ = writeln!(s, "reaction {:e}", state.reaction);
    for (name, v) in [("u", &state.u), ("alpha", &state.alpha), ("alpha_lower", &state.alpha_lower)] {
        let _ = writeln!(s, "{name}");
        for x in v.iter() {
            let _ = writeln!(s, "{x:e}");
        }
    }
    s
}

pub fn write_checkpoint(path: &Path, state: &SimulationState) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(state))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<SimulationState> {
    checkpoint_from_str(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => Err(Error::Parse {
                line: self.line + 1,
                message: "unexpected end of checkpoint".into(),
            }),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let l = self.next()?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(parts.collect())
    }

    fn number<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("invalid number `{s}`")))
    }

    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.keyed(key)?;
        if v.len() != 1 {
            return Err(self.err(format!("`{key}` takes one value")));
        }
        self.number(v[0])
    }

    fn block(&mut self, key: &str, n: usize) -> Result<Vec<f64>> {
        if !self.keyed(key)?.is_empty() {
            return Err(self.err(format!("`{key}` header takes no values")));
        }
        (0..n)
            .map(|_| {
                let l = self.next()?;
                self.number(l)
            })
            .collect()
    }
}

pub fn checkpoint_from_str(text: &str) -> Result<SimulationState> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let version: u32 = lines.single(MAGIC)?;
    if version != CHECKPOINT_VERSION {
        return Err(lines.err(format!("unsupported checkpoint version {version}")));
    }
    let step = lines.single("step")?;
    let u_t = lines.single("u_t")?;
    let n: usize = lines.single("nodes")?;
    let e = lines.keyed("energies")?;
    if e.len() != 3 {
        return Err(lines.err("`energies` takes three values"));
    }
    let energies = Energies {
        elastic: lines.number(e[0])?,
        fracture: lines.number(e[1])?,
        total: lines.number(e[2])?,
    };
    let reaction = lines.single("reaction")?;
    let u = lines.block("u", 2 * n)?;
    let alpha = lines.block("alpha", n)?;
    let alpha_lower = lines.block("alpha_lower", n)?;
    Ok(SimulationState {
        step,
        u_t,
        u,
        alpha,
        alpha_lower,
        energies,
        reaction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> SimulationState {
        SimulationState {
            step: 7,
            u_t: 0.1 + 0.2,
            u: vec![1.0 / 3.0, -2e-300, 0.0, 5.5],
            alpha: vec![0.25, std::f64::consts::PI / 4.0],
            alpha_lower: vec![0.2, 0.7],
            energies: Energies {
                elastic: 1.25,
                fracture: 0.1,
                total: 1.35,
            },
            reaction: -3.0e-7,
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let s = state();
        assert_eq!(checkpoint_from_str(&checkpoint_to_string(&s)).unwrap(), s);
    }

    #[test]
    fn version_and_truncation_are_reported() {
        let text = checkpoint_to_string(&state());
        let bad = text.replacen("checkpoint 1", "checkpoint 9", 1);
        assert!(matches!(checkpoint_from_str(&bad), Err(Error::Parse { line: 1, .. })));
        let cut: String = text.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(checkpoint_from_str(&cut).is_err());
    }
}
