//! P1 finite elements for the displacement and damage sub-problems.

pub mod bcs;
pub mod cg;
pub mod cholesky;
pub mod damage;
pub mod element;
pub mod elasticity;
pub mod sparse;

pub use bcs::BoundaryConditions;
pub use cg::{solve_spd, CgSolution};
pub use damage::{assemble_damage_system, DamageProblem, DamageSystem};
pub use element::{element_strain, P1Element};
pub use elasticity::{
    assemble_displacement_system, effective_moduli, solve_displacement, DisplacementSolution,
    ElasticProblem, LinearSolver,
};
pub use sparse::CsrMatrix;

use crate::error::Result;
use crate::mesh::Mesh;

/// Mesh plus precomputed element data.
#[derive(Clone, Debug)]
pub struct FemModel {
    pub mesh: Mesh,
    pub elements: Vec<P1Element>,
    /// Nodes held at zero damage (touching the undamageable region).
    pub fixed_damage: Vec<bool>,
}

impl FemModel {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let elements = element::elements(&mesh)?;
        let fixed_damage = mesh.undamageable_nodes();
        Ok(FemModel {
            mesh,
            elements,
            fixed_damage,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.mesh.num_nodes()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Sorted node neighbourhoods including the node itself.
    pub fn node_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = (0..self.num_nodes()).map(|i| vec![i]).collect();
        for t in &self.mesh.triangles {
            for &a in t {
                for &b in t {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Element-mean damage.
    pub fn element_means(&self, alpha: &[f64]) -> Vec<f64> {
        self.elements.iter().map(|e| e.mean(alpha)).collect()
    }
}
