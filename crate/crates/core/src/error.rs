use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("meshing failed near facet ({x0:.6}, {y0:.6})-({x1:.6}, {y1:.6}): {reason}")]
    Meshing {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        reason: String,
    },

    #[error("degenerate triangle {element} (signed area {area:e})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("conjugate gradients did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("tension/compression sign set still changing after {iterations} iterations ({} oscillating elements)", elements.len())]
    SignSetCycling {
        iterations: usize,
        elements: Vec<usize>,
    },

    #[error("bound-constrained damage solve did not converge (KKT residual {kkt_residual:e} after {iterations} iterations)")]
    DamageNotConverged { iterations: usize, kkt_residual: f64 },

    #[error("damage appeared during the first load steps (max alpha {max_alpha:e} at step {step}); reduce the load increment")]
    EarlyDamage { step: usize, max_alpha: f64 },

    #[error("transition fit needs at least 2 bracketed H/D rows, found {0}")]
    InsufficientBrackets(usize),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
