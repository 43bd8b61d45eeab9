//! Dirichlet data proportional to a scalar load parameter.

use crate::error::{invalid, Result};
use crate::geometry::BoundaryTag;
use crate::mesh::Mesh;

/// Prescribed displacements `value = unit_value × load` on selected dofs, plus
/// the node sets whose reactions are reported.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryConditions {
    /// `(dof, unit value)`, dofs interleaved as `2 node + component`.
    pub prescribed: Vec<(usize, f64)>,
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
    /// Component of the reported reaction (0 horizontal, 1 vertical).
    pub reaction_component: usize,
}

impl BoundaryConditions {
    /// Top boundary moved by `+u_t/2`, bottom by `-u_t/2` horizontally; vertical
    /// displacement zero on both.
    pub fn junction_shear(mesh: &Mesh) -> Result<Self> {
        let top = mesh.boundary_nodes(BoundaryTag::Top);
        let bottom = mesh.boundary_nodes(BoundaryTag::Bottom);
        if top.is_empty() || bottom.is_empty() {
            return Err(invalid("mesh", "top and bottom boundaries must be tagged"));
        }
        let mut prescribed = Vec::with_capacity(2 * (top.len() + bottom.len()));
        for &n in &top {
            prescribed.push((2 * n, 0.5));
            prescribed.push((2 * n + 1, 0.0));
        }
        for &n in &bottom {
            prescribed.push((2 * n, -0.5));
            prescribed.push((2 * n + 1, 0.0));
        }
        prescribed.sort_by_key(|p| p.0);
        Ok(BoundaryConditions {
            prescribed,
            top,
            bottom,
            reaction_component: 0,
        })
    }

    /// Vertical stretch: bottom held at `u_y = 0`, top at `u_y = load`, sides
    /// free, with one bottom node pinned horizontally.
    pub fn uniaxial_tension(mesh: &Mesh) -> Result<Self> {
        let top = mesh.boundary_nodes(BoundaryTag::Top);
        let bottom = mesh.boundary_nodes(BoundaryTag::Bottom);
        if top.is_empty() || bottom.is_empty() {
            return Err(invalid("mesh", "top and bottom boundaries must be tagged"));
        }
        let mut prescribed: Vec<(usize, f64)> = top
            .iter()
            .map(|&n| (2 * n + 1, 1.0))
            .chain(bottom.iter().map(|&n| (2 * n + 1, 0.0)))
            .collect();
        prescribed.push((2 * bottom[0], 0.0));
        prescribed.sort_by_key(|p| p.0);
        Ok(BoundaryConditions {
            prescribed,
            top,
            bottom,
            reaction_component: 1,
        })
    }

    pub fn constrained_mask(&self, ndof: usize) -> Vec<bool> {
        let mut m = vec![false; ndof];
        for &(d, _) in &self.prescribed {
            m[d] = true;
        }
        m
    }

    /// Writes the prescribed values at `load` into `u`.
    pub fn apply(&self, u: &mut [f64], load: f64) {
        for &(d, v) in &self.prescribed {
            u[d] = v * load;
        }
    }
}
